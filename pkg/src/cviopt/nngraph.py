"""Exact M-nearest-neighbour structure and its symmetrized edge set."""

from __future__ import annotations

import threading
import weakref
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components as _cc
from scipy.spatial.distance import cdist

from .dataio import Dataset
from .errors import ParameterError
from .partition import relabel_first_occurrence


@dataclass(frozen=True)
class NNGraph:
    """Per-point M nearest neighbours, ordered by increasing distance.

    ``neighbours[i]`` never contains i itself; exact distance ties are
    broken towards the lower point index (unreachable after jitter, but
    the rule keeps construction deterministic).
    """

    M: int
    neighbours: np.ndarray  # (n, M) int64
    distances: np.ndarray  # (n, M) float64

    @property
    def n(self) -> int:
        return self.neighbours.shape[0]


@dataclass(frozen=True)
class EdgeList:
    """Deduplicated undirected near-neighbour edges with u < v."""

    u: np.ndarray
    v: np.ndarray
    dist: np.ndarray
    n: int

    def __len__(self) -> int:
        return self.u.shape[0]


def build_knn(ds: Dataset, M: int) -> NNGraph:
    """Exact M nearest neighbours per point under Euclidean distance.

    Brute force in chunks; O(n^2 d) but exact, which is what definitions
    (rather than estimates) of the NN-based indices require.
    """
    n = ds.n
    if not 1 <= M <= n - 1:
        raise ParameterError(f"need 1 <= M <= n-1, got M={M}, n={n}")
    pts = ds.points
    nbrs = np.empty((n, M), dtype=np.int64)
    dists = np.empty((n, M), dtype=np.float64)
    chunk = max(1, int(4_000_000 // max(n, 1)))
    for s in range(0, n, chunk):
        e = min(n, s + chunk)
        block = cdist(pts[s:e], pts)
        block[np.arange(e - s), np.arange(s, e)] = np.inf  # exclude self
        # stable sort on distance == ties broken by lower column index
        order = np.argsort(block, axis=1, kind="stable")[:, :M]
        nbrs[s:e] = order
        dists[s:e] = np.take_along_axis(block, order, axis=1)
    nbrs.setflags(write=False)
    dists.setflags(write=False)
    return NNGraph(M=M, neighbours=nbrs, distances=dists)


def symmetric_edges(g: NNGraph) -> EdgeList:
    """Undirected union of the directed NN lists, sorted by (u, v)."""
    n, M = g.neighbours.shape
    i_idx = np.repeat(np.arange(n, dtype=np.int64), M)
    j_idx = g.neighbours.ravel()
    d = g.distances.ravel()
    u = np.minimum(i_idx, j_idx)
    v = np.maximum(i_idx, j_idx)
    keys = u * n + v
    _, first = np.unique(keys, return_index=True)
    eu, ev, ed = u[first], v[first], d[first]
    for arr in (eu, ev, ed):
        arr.setflags(write=False)
    return EdgeList(u=eu, v=ev, dist=ed, n=n)


def connected_components(g: NNGraph) -> np.ndarray:
    """Component labels 0..c-1 over the symmetrized edge set.

    Components are numbered by first occurrence in point order.
    """
    edges = symmetric_edges(g)
    n = g.n
    adj = coo_matrix(
        (np.ones(len(edges)), (edges.u, edges.v)), shape=(n, n)
    )
    _, labels = _cc(adj, directed=False)
    return relabel_first_occurrence(labels.astype(np.int64))


_lock = threading.Lock()
_graph_cache: "weakref.WeakKeyDictionary[Dataset, dict]" = weakref.WeakKeyDictionary()
_edge_cache: "weakref.WeakKeyDictionary[Dataset, dict]" = weakref.WeakKeyDictionary()


def knn_for(ds: Dataset, M: int) -> NNGraph:
    """Cached build_knn: each (dataset, M) graph is computed once."""
    with _lock:
        per_ds = _graph_cache.setdefault(ds, {})
        g = per_ds.get(M)
    if g is None:
        g = build_knn(ds, M)
        with _lock:
            per_ds[M] = g
    return g


def edges_for(ds: Dataset, M: int) -> EdgeList:
    """Cached symmetrized edge list for (dataset, M)."""
    with _lock:
        per_ds = _edge_cache.setdefault(ds, {})
        e = per_ds.get(M)
    if e is None:
        e = symmetric_edges(knn_for(ds, M))
        with _lock:
            per_ds[M] = e
    return e

"""Shared Euclidean geometry: cached pairwise distances and the exact EMST.

Caches are keyed by Dataset identity (weak references), so a dataset's
distance matrix and minimum spanning tree are computed once and reused by
every index evaluator and optimization run over that dataset.
"""

from __future__ import annotations

import os
import threading
import weakref

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import minimum_spanning_tree
from scipy.spatial.distance import cdist

from .dataio import Dataset
from .errors import ParameterError

#: Largest n for which the full n x n distance matrix is materialized.
DENSE_LIMIT = int(os.environ.get("CVIOPT_DENSE_LIMIT", "4096"))

_lock = threading.Lock()
_pairwise_cache: "weakref.WeakKeyDictionary[Dataset, np.ndarray]" = weakref.WeakKeyDictionary()
_emst_cache: "weakref.WeakKeyDictionary[Dataset, tuple]" = weakref.WeakKeyDictionary()


def pairwise(ds: Dataset) -> np.ndarray | None:
    """Full distance matrix for small datasets, None above DENSE_LIMIT."""
    if ds.n > DENSE_LIMIT:
        return None
    with _lock:
        mat = _pairwise_cache.get(ds)
    if mat is None:
        mat = cdist(ds.points, ds.points)
        mat.setflags(write=False)
        with _lock:
            _pairwise_cache[ds] = mat
    return mat


class DistanceProvider:
    """Row access to the pairwise distance matrix, dense or on demand."""

    def __init__(self, ds: Dataset) -> None:
        self._ds = ds
        self._mat = pairwise(ds)

    @property
    def dense(self) -> np.ndarray | None:
        return self._mat

    def row(self, i: int) -> np.ndarray:
        if self._mat is not None:
            return self._mat[i]
        return cdist(self._ds.points[i : i + 1], self._ds.points)[0]

    def sub(self, idx_a: np.ndarray, idx_b: np.ndarray) -> np.ndarray:
        """Distance block between two index sets."""
        if self._mat is not None:
            return self._mat[np.ix_(idx_a, idx_b)]
        return cdist(self._ds.points[idx_a], self._ds.points[idx_b])


def emst(ds: Dataset) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Exact Euclidean minimum spanning tree as (u, v, weight) edge arrays.

    Needs the dense distance matrix; raises for datasets above DENSE_LIMIT.
    """
    with _lock:
        cached = _emst_cache.get(ds)
    if cached is not None:
        return cached
    mat = pairwise(ds)
    if mat is None:
        raise ParameterError(
            f"EMST needs the dense distance matrix (n={ds.n} > {DENSE_LIMIT}); "
            "raise CVIOPT_DENSE_LIMIT to allow it"
        )
    graph = mat
    off_diag_min = np.min(mat + np.diag(np.full(ds.n, np.inf)))
    if off_diag_min <= 0.0:
        # csr drops explicit zeros; shifting every edge by a constant keeps
        # the argmin spanning tree while making duplicate-point edges visible
        graph = mat + 1.0 - np.eye(ds.n)
    tree = minimum_spanning_tree(csr_matrix(graph)).tocoo()
    u = np.minimum(tree.row, tree.col).astype(np.int64)
    v = np.maximum(tree.row, tree.col).astype(np.int64)
    w = mat[u, v].astype(np.float64)
    order = np.lexsort((v, u))
    result = (u[order], v[order], w[order])
    for arr in result:
        arr.setflags(write=False)
    with _lock:
        _emst_cache[ds] = result
    return result

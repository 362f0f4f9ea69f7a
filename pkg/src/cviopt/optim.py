"""Maximizing an index over all k-partitions: candidate generation plus
tabu-assisted steepest-ascent hill climbing.

The climb repeatedly relocates single points.  Each step selects the best
neighbour that has not been visited before, even if it is worse than the
current partition (descent is how the search escapes local ridges); the
shared tabu list guarantees no partition is expanded twice within a run.
The returned solution is always a single-move local maximum of the
objective.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial.distance import cdist

from . import dataio
from .cvi import CVISpec, evaluate, make_evaluator
from .dataio import Dataset, ReferenceSet
from .errors import (
    ConfigError,
    ContractViolationError,
    GenerationError,
    ParameterError,
)
from .nngraph import NNGraph
from .partition import (
    Move,
    Partition,
    canonical_key,
    from_labels,
    iter_moves,
)

DEFAULT_PATIENCE = 250  # non-improvement budget per candidate
DEFAULT_VANTAGE_V = 5  # vantage points per cluster


class TabuList:
    """Canonical label vectors of partitions the climb has stepped onto."""

    def __init__(self) -> None:
        self._seen: set[bytes] = set()

    def __len__(self) -> int:
        return len(self._seen)

    def __contains__(self, labels: np.ndarray) -> bool:
        return canonical_key(labels) in self._seen

    def add(self, labels: np.ndarray) -> None:
        self._seen.add(canonical_key(labels))


@dataclass
class OptimTrace:
    """Diagnostics of one optimization run."""

    candidate_count: int = 0
    steps: int = 0
    tabu_size: int = 0
    best_history: list[float] = field(default_factory=list)
    best_value: float = float("-inf")


def random_partition(n: int, k: int, rng) -> Partition:
    """Labels i.i.d. uniform on 0..k-1, resampled until surjective."""
    if k > n:
        raise ParameterError(f"cannot split {n} points into {k} nonempty clusters")
    rng = np.random.default_rng(rng)
    while True:
        labels = rng.integers(0, k, size=n)
        if np.bincount(labels, minlength=k).min() > 0:
            return from_labels(labels, k)


def vantage_point_partition(
    ds: Dataset, k: int, V: int = DEFAULT_VANTAGE_V, rng=None, max_retries: int = 100
) -> Partition:
    """Partition induced by V*k vantage points sampled in the bounding box.

    Vantage point t represents cluster t // V; every data point joins the
    cluster of its nearest vantage point.  Resampled until surjective.
    """
    if V < 1:
        raise ParameterError("need V >= 1 vantage points per cluster")
    rng = np.random.default_rng(rng)
    lo = ds.points.min(axis=0)
    hi = ds.points.max(axis=0)
    for _ in range(max_retries):
        pivots = rng.uniform(lo, hi, size=(V * k, ds.d))
        nearest = cdist(ds.points, pivots).argmin(axis=1)
        labels = nearest // V
        if np.bincount(labels, minlength=k).min() > 0:
            return from_labels(labels, k)
    raise GenerationError(
        f"no surjective vantage-point partition after {max_retries} draws"
    )


def lloyd_kmeans(
    ds: Dataset, k: int, restarts: int = 10, rng=None, max_iter: int = 300
) -> Partition:
    """Best-of-restarts Lloyd iteration; empty clusters are repaired by
    splitting the largest cluster at its point farthest from the centroid."""
    if k < 2:
        raise ParameterError("need k >= 2")
    if k > ds.n:
        raise ParameterError(f"cannot split {ds.n} points into {k} clusters")
    rng = np.random.default_rng(rng)
    pts = ds.points
    best_labels = None
    best_wcss = np.inf
    for _ in range(restarts):
        centers = pts[rng.choice(ds.n, size=k, replace=False)].copy()
        labels = None
        for _ in range(max_iter):
            d2 = cdist(pts, centers, "sqeuclidean")
            new_labels = d2.argmin(axis=1)
            sizes = np.bincount(new_labels, minlength=k)
            for empty in np.flatnonzero(sizes == 0):
                donor = int(sizes.argmax())
                mem = np.flatnonzero(new_labels == donor)
                mu = pts[mem].mean(axis=0)
                far = mem[int(((pts[mem] - mu) ** 2).sum(axis=1).argmax())]
                new_labels[far] = empty
                sizes = np.bincount(new_labels, minlength=k)
            if labels is not None and np.array_equal(labels, new_labels):
                break
            labels = new_labels
            for j in range(k):
                centers[j] = pts[labels == j].mean(axis=0)
        wcss = 0.0
        for j in range(k):
            mem = pts[labels == j]
            wcss += ((mem - mem.mean(axis=0)) ** 2).sum()
        if wcss < best_wcss:
            best_wcss = wcss
            best_labels = labels
    return from_labels(best_labels, k)


def _climb(
    spec: CVISpec,
    ds: Dataset,
    candidates: Sequence[Partition],
    P: int,
    graph: NNGraph | None,
    trace: OptimTrace,
) -> Partition:
    """The hill-climbing scheme itself; candidates must be pre-sorted by
    decreasing objective value."""
    tabu = TabuList()
    best_labels = candidates[0].labels.copy()
    best_value = evaluate(spec, ds, candidates[0], graph=graph)
    trace.best_history.append(best_value)

    for cand in candidates:
        ev = make_evaluator(spec, ds, cand, graph=graph)
        patience = 1
        work = np.empty_like(ev.labels)
        while True:
            # select the best non-tabu single-move neighbour (first in
            # (point, target) order wins ties)
            chosen: Move | None = None
            chosen_value = float("-inf")
            for m in iter_moves(ev.labels, ev.sizes, ev.k):
                v = ev.peek(m)
                if v > chosen_value:
                    np.copyto(work, ev.labels)
                    work[m.point] = m.dst
                    if work in tabu:
                        continue
                    chosen = m
                    chosen_value = v
            if chosen is None:
                break  # every neighbour tabu or rated -inf: next candidate
            np.copyto(work, ev.labels)
            work[chosen.point] = chosen.dst
            tabu.add(work)
            ev.commit(chosen)
            trace.steps += 1
            if chosen_value > best_value:
                best_value = chosen_value
                best_labels = ev.labels.copy()
            else:
                patience += 1
            trace.best_history.append(best_value)
            if patience > P:
                break
    trace.tabu_size = len(tabu)
    trace.best_value = best_value
    return from_labels(best_labels, candidates[0].k)


def tabu_hill_climb(
    spec: CVISpec,
    ds: Dataset,
    candidates: Sequence[Partition],
    P: int = DEFAULT_PATIENCE,
    graph: NNGraph | None = None,
    trace: OptimTrace | None = None,
) -> Partition:
    """Run the climb from a pool of candidate partitions, best first.

    Returns a partition no single-point relocation can strictly improve,
    and never worse than the best candidate.
    """
    if not candidates:
        raise ContractViolationError("candidate pool is empty")
    if P < 1:
        raise ParameterError("need P >= 1")
    n, k = candidates[0].n, candidates[0].k
    for c in candidates:
        if c.n != n or c.k != k:
            raise ContractViolationError(
                f"candidate with n={c.n}, k={c.k} in a pool of (n={n}, k={k})"
            )
    if n != ds.n:
        raise ContractViolationError("candidates do not match the dataset size")
    values = [evaluate(spec, ds, c, graph=graph) for c in candidates]
    order = sorted(range(len(candidates)), key=lambda i: -values[i])
    ordered = [candidates[i] for i in order]
    if trace is None:
        trace = OptimTrace()
    trace.candidate_count = len(candidates)
    return _climb(spec, ds, ordered, P, graph, trace)


def resolve_noise(ds: Dataset, ext_labels: np.ndarray) -> np.ndarray:
    """External labels (0 = noise) to internal 0-based total labels.

    Each noise point joins the cluster of its nearest non-noise point;
    ties break towards the lower point index.
    """
    lab = np.asarray(ext_labels, dtype=np.int64)
    noise = np.flatnonzero(lab == 0)
    clean = np.flatnonzero(lab != 0)
    if clean.size == 0:
        raise ConfigError("labeling marks every point as noise")
    out = lab.copy()
    if noise.size:
        nearest = cdist(ds.points[noise], ds.points[clean]).argmin(axis=1)
        out[noise] = lab[clean[nearest]]
    return out - 1


def _ingest_candidate_files(
    ds: Dataset, k: int, paths: Iterable[str]
) -> list[Partition]:
    out = []
    for path in paths:
        ext = dataio.load_labels(path, ds.n)
        internal = resolve_noise(ds, ext)
        if internal.max() + 1 != k:
            continue  # candidate for a different cardinality
        out.append(from_labels(internal, k))
    return out


def optimise_dataset(
    spec: CVISpec,
    ds: Dataset,
    k: int,
    refs: ReferenceSet | None = None,
    external_candidate_dirs: Sequence[str] = (),
    seed: int = 0,
    P: int = DEFAULT_PATIENCE,
    n_random: int = 5,
    n_vantage: int = DEFAULT_VANTAGE_V,
    vantage_v: int = DEFAULT_VANTAGE_V,
    kmeans_restarts: int = 10,
    graph: NNGraph | None = None,
) -> tuple[Partition, OptimTrace]:
    """Assemble the candidate pool and run the climb.

    The pool mixes ingested label files, the reference labelings of
    cardinality k (noise points joined to their nearest non-noise
    neighbour), and the built-in generators; duplicates are removed by
    canonical form before the climb.
    """
    pool: list[Partition] = []
    for path_dir in external_candidate_dirs:
        files = sorted(
            os.path.join(path_dir, f)
            for f in os.listdir(path_dir)
            if not f.startswith(".")
        )
        pool.extend(_ingest_candidate_files(ds, k, files))
    if refs is not None:
        for lab, card in zip(refs.labelings, refs.cardinalities):
            if card == k:
                pool.append(from_labels(resolve_noise(ds, lab), k))

    streams = np.random.SeedSequence(seed).spawn(3)
    rng_random = np.random.default_rng(streams[0])
    rng_vantage = np.random.default_rng(streams[1])
    rng_kmeans = np.random.default_rng(streams[2])
    for _ in range(n_random):
        pool.append(random_partition(ds.n, k, rng_random))
    for _ in range(n_vantage):
        try:
            pool.append(vantage_point_partition(ds, k, V=vantage_v, rng=rng_vantage))
        except GenerationError:
            pool.append(random_partition(ds.n, k, rng_vantage))
    if kmeans_restarts > 0:
        pool.append(lloyd_kmeans(ds, k, restarts=kmeans_restarts, rng=rng_kmeans))

    deduped: list[Partition] = []
    seen: set[bytes] = set()
    for cand in pool:
        key = canonical_key(cand.labels)
        if key not in seen:
            seen.add(key)
            deduped.append(cand)
    if not deduped:
        raise ConfigError("empty candidate pool")

    trace = OptimTrace()
    best = tabu_hill_climb(spec, ds, deduped, P=P, graph=graph, trace=trace)
    return best, trace

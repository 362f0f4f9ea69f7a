"""Full (from-scratch) evaluation of every index in the menu.

These are the definitional implementations: direct formulas over the
partition, with no incremental state.  The evaluators in
:mod:`cviopt.cvi.evaluators` must agree with them to 1e-9 relative.
"""

from __future__ import annotations

import numpy as np

from ..dataio import Dataset
from ..errors import ParameterError
from ..geometry import DistanceProvider
from ..nngraph import NNGraph, edges_for, knn_for, symmetric_edges
from ..owa import OWASpec, aggregate
from ..partition import Partition
from .specs import CVISpec


def _centroids(ds: Dataset, p: Partition) -> np.ndarray:
    cents = np.empty((p.k, ds.d))
    for j in range(p.k):
        cents[j] = ds.points[p.labels == j].mean(axis=0)
    return cents


def ball_hall(ds: Dataset, p: Partition) -> float:
    """Negated WCSS weighted by cluster cardinality (larger is better)."""
    total = 0.0
    for j in range(p.k):
        pts = ds.points[p.labels == j]
        mu = pts.mean(axis=0)
        total += ((pts - mu) ** 2).sum() / pts.shape[0]
    return -float(total)


def calinski_harabasz(ds: Dataset, p: Partition) -> float:
    """Variance ratio criterion ((n-k)/(k-1) * BCSS/WCSS)."""
    mu = ds.points.mean(axis=0)
    bcss = 0.0
    wcss = 0.0
    for j in range(p.k):
        pts = ds.points[p.labels == j]
        mu_j = pts.mean(axis=0)
        bcss += pts.shape[0] * ((mu_j - mu) ** 2).sum()
        wcss += ((pts - mu_j) ** 2).sum()
    if wcss <= 0.0:
        return float("inf")
    return float((ds.n - p.k) / (p.k - 1) * bcss / wcss)


def davies_bouldin(ds: Dataset, p: Partition) -> float:
    """Negated mean worst-pair similarity; singletons force -inf."""
    k = p.k
    cents = _centroids(ds, p)
    s = np.empty(k)
    for j in range(k):
        pts = ds.points[p.labels == j]
        if pts.shape[0] > 1:
            s[j] = np.linalg.norm(pts - cents[j], axis=1).mean()
        else:
            s[j] = np.inf
    m = np.linalg.norm(cents[:, None, :] - cents[None, :, :], axis=2)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(m > 0.0, (s[:, None] + s[None, :]) / m, np.inf)
    np.fill_diagonal(r, -np.inf)
    return float(-r.max(axis=1).mean())


def _silhouette_scores(ds: Dataset, p: Partition) -> np.ndarray:
    """Per-point silhouette widths with the singleton convention (score 0)."""
    n, k = ds.n, p.k
    labels = p.labels
    dp = DistanceProvider(ds)
    dsum = np.empty((n, k))
    if dp.dense is not None:
        for j in range(k):
            dsum[:, j] = dp.dense[:, labels == j].sum(axis=1)
    else:
        members = [np.flatnonzero(labels == j) for j in range(k)]
        for i in range(n):
            row = dp.row(i)
            for j in range(k):
                dsum[i, j] = row[members[j]].sum()
    sizes = p.sizes
    ar = np.arange(n)
    mean_to = dsum / sizes[None, :]
    own_sum = dsum[ar, labels]
    mean_to[ar, labels] = np.inf
    b = mean_to.min(axis=1)
    n_own = sizes[labels]
    with np.errstate(divide="ignore", invalid="ignore"):
        a = own_sum / (n_own - 1)
        den = np.maximum(a, b)
        scores = np.where(den > 0.0, (b - a) / den, 0.0)
    scores[n_own == 1] = 0.0  # a_i = +inf, convention +-inf/inf = 0
    return scores


def silhouette(ds: Dataset, p: Partition) -> float:
    """Mean silhouette width over all points."""
    return float(_silhouette_scores(ds, p).mean())


def silhouette_w(ds: Dataset, p: Partition) -> float:
    """Mean of cluster-average silhouette widths, singletons excluded from
    the divisor (their zero scores stay in the sum)."""
    scores = _silhouette_scores(ds, p)
    n_own = p.sizes[p.labels]
    singletons = int((p.sizes == 1).sum())
    effective = p.k - singletons
    if effective < 1:
        return float("-inf")
    return float((scores / n_own).sum() / effective)


def gdunn(ds: Dataset, p: Partition, d_variant: int, big_d_variant: int) -> float:
    """Generalized Dunn index: min between-cluster separation over max
    within-cluster compactness."""
    if d_variant not in (1, 2, 3, 4, 5):
        raise ParameterError(f"bad separation variant d{d_variant}")
    if big_d_variant not in (1, 2, 3):
        raise ParameterError(f"bad compactness variant D{big_d_variant}")
    k = p.k
    labels = p.labels
    dp = DistanceProvider(ds)
    members = [np.flatnonzero(labels == j) for j in range(k)]
    sizes = p.sizes.astype(np.float64)

    cents = None
    sdc = None
    if d_variant in (4, 5) or big_d_variant == 3:
        cents = _centroids(ds, p)
    if d_variant == 5 or big_d_variant == 3:
        sdc = np.array(
            [
                np.linalg.norm(ds.points[members[j]] - cents[j], axis=1).sum()
                for j in range(k)
            ]
        )

    num = np.inf
    if d_variant in (1, 2, 3):
        for i in range(k):
            for j in range(i + 1, k):
                block = dp.sub(members[i], members[j])
                if d_variant == 1:
                    val = block.min()
                elif d_variant == 2:
                    val = block.max()
                else:
                    val = block.mean()
                num = min(num, float(val))
    elif d_variant == 4:
        for i in range(k):
            for j in range(i + 1, k):
                num = min(num, float(np.linalg.norm(cents[i] - cents[j])))
    else:  # d5: size-weighted mean distance to the two centroids
        for i in range(k):
            for j in range(i + 1, k):
                num = min(num, float((sdc[i] + sdc[j]) / (sizes[i] + sizes[j])))

    den = 0.0
    if big_d_variant == 1:
        for j in range(k):
            if members[j].shape[0] > 1:
                den = max(den, float(dp.sub(members[j], members[j]).max()))
    elif big_d_variant == 2:
        # mean over distinct pairs; the zero diagonal cancels in the sum
        for j in range(k):
            nj = members[j].shape[0]
            if nj > 1:
                den = max(den, float(dp.sub(members[j], members[j]).sum() / (nj * (nj - 1))))
    else:
        den = float((sdc / sizes).max())

    if den <= 0.0:
        return float("inf")
    return num / den


def dunn_nn(
    ds: Dataset,
    p: Partition,
    M: int,
    owa_s: OWASpec,
    owa_c: OWASpec,
    graph: NNGraph | None = None,
) -> float:
    """Dunn-type index over the symmetrized M-near-neighbour edge distances."""
    edges = symmetric_edges(graph) if graph is not None else edges_for(ds, M)
    cross = p.labels[edges.u] != p.labels[edges.v]
    cross_d = edges.dist[cross]
    within_d = edges.dist[~cross]
    if cross_d.size == 0:
        return float("inf")  # perfect separation
    num = aggregate(owa_s, cross_d)
    if owa_c.is_const:
        return num
    if within_d.size == 0:
        return float("-inf")  # no within-cluster evidence of compactness
    den = aggregate(owa_c, within_d)
    if den <= 0.0:
        return float("inf")
    return num / den


def wcnn(ds: Dataset, p: Partition, M: int, graph: NNGraph | None = None) -> float:
    """Fraction of directed NN pairs staying within a cluster; -inf whenever
    some cluster has M or fewer points."""
    if (p.sizes <= M).any():
        return float("-inf")
    g = graph if graph is not None else knn_for(ds, M)
    same = p.labels[g.neighbours] == p.labels[:, None]
    return float(same.sum() / (ds.n * M))


def evaluate(spec: CVISpec, ds: Dataset, p: Partition, graph: NNGraph | None = None) -> float:
    """Dispatch a full evaluation of ``spec`` on (ds, p)."""
    if spec.family == "BallHall":
        return ball_hall(ds, p)
    if spec.family == "CalinskiHarabasz":
        return calinski_harabasz(ds, p)
    if spec.family == "DaviesBouldin":
        return davies_bouldin(ds, p)
    if spec.family == "Silhouette":
        return silhouette(ds, p)
    if spec.family == "SilhouetteW":
        return silhouette_w(ds, p)
    if spec.family == "GDunn":
        return gdunn(ds, p, spec.d_variant, spec.big_d_variant)
    if spec.family == "DuNN":
        return dunn_nn(ds, p, spec.m, spec.owa_s, spec.owa_c, graph=graph)
    if spec.family == "WCNN":
        return wcnn(ds, p, spec.m, graph=graph)
    raise ParameterError(f"unknown family {spec.family!r}")

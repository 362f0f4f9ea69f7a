"""Incremental index evaluation for single-point relocation moves.

Every evaluator keeps sufficient statistics of the current partition so
that ``peek`` (value after a hypothetical move) and ``commit`` (apply a
move) are much cheaper than a from-scratch evaluation.  The contract is
semantic: after any sequence of commits, ``value()`` agrees with the
definitional implementation in :mod:`cviopt.cvi.indices` to 1e-9 relative.
Indices without a cheap exact delta fall back to bounded partial
recomputation of the affected clusters.

Evaluators assume distinct points (the preprocessing jitter guarantees
this); they are single-threaded mutable state, while the underlying
Dataset, distance matrix and NN graph are immutable and shared.
"""

from __future__ import annotations

import numpy as np
from sortedcontainers import SortedList

from ..dataio import Dataset
from ..errors import ParameterError
from ..geometry import DistanceProvider, emst
from ..nngraph import NNGraph, edges_for, knn_for, symmetric_edges
from ..owa import smooth_extreme_weights
from ..partition import Move, Partition, check_move, from_labels
from .specs import CVISpec

_INF = float("inf")


def _ratio(num: float, den: float) -> float:
    if den <= 0.0:
        return _INF
    return num / den


class CVIEvaluator:
    """Base class: move validation, label bookkeeping, value caching."""

    def __init__(self, spec: CVISpec, ds: Dataset, part: Partition) -> None:
        self.spec = spec
        self.ds = ds
        self._labels = part.labels.copy()
        self._sizes = part.sizes.astype(np.int64).copy()
        self._k = part.k
        self._n = part.n
        self._init_state()
        self._value = float(self._full_value())

    # -- public API -----------------------------------------------------

    def value(self) -> float:
        return self._value

    @property
    def labels(self) -> np.ndarray:
        view = self._labels.view()
        view.flags.writeable = False
        return view

    @property
    def sizes(self) -> np.ndarray:
        view = self._sizes.view()
        view.flags.writeable = False
        return view

    @property
    def k(self) -> int:
        return self._k

    def partition(self) -> Partition:
        return from_labels(self._labels, self._k)

    def peek(self, m: Move) -> float:
        """Value the index would take after ``m``, without mutating state."""
        check_move(self._labels, self._sizes, self._k, m)
        return float(self._peek(m))

    def commit(self, m: Move) -> None:
        """Advance to the post-move partition; value() becomes peek(m)."""
        check_move(self._labels, self._sizes, self._k, m)
        v = float(self._peek(m))
        self._labels[m.point] = m.dst
        self._sizes[m.src] -= 1
        self._sizes[m.dst] += 1
        self._apply(m)
        self._value = v

    # -- subclass hooks ---------------------------------------------------

    def _init_state(self) -> None:
        raise NotImplementedError

    def _full_value(self) -> float:
        raise NotImplementedError

    def _peek(self, m: Move) -> float:
        raise NotImplementedError

    def _apply(self, m: Move) -> None:
        """Refresh sufficient statistics; called with labels/sizes already
        updated to the post-move partition."""
        raise NotImplementedError

    # -- shared helpers ---------------------------------------------------

    def _members(self, j: int) -> np.ndarray:
        return np.flatnonzero(self._labels == j)


class _CentroidSSEvaluator(CVIEvaluator):
    """Shared machinery for indices built on per-cluster sums of squares.

    Points are centered once: all such indices are translation-invariant
    and centering keeps the sq - |t|^2/n cancellation well conditioned.
    """

    def _init_state(self) -> None:
        self._pts = self.ds.points - self.ds.points.mean(axis=0)
        self._sqnorm = (self._pts**2).sum(axis=1)
        self._t = np.zeros((self._k, self.ds.d))
        self._sq = np.zeros(self._k)
        for j in range(self._k):
            mask = self._labels == j
            self._t[j] = self._pts[mask].sum(axis=0)
            self._sq[j] = self._sqnorm[mask].sum()

    def _apply(self, m: Move) -> None:
        for j in (m.src, m.dst):
            mask = self._labels == j
            self._t[j] = self._pts[mask].sum(axis=0)
            self._sq[j] = self._sqnorm[mask].sum()

    def _move_stats(self, m: Move):
        """(t, sq, sizes) rows for src and dst after the move."""
        x = self._pts[m.point]
        xsq = self._sqnorm[m.point]
        t_src = self._t[m.src] - x
        t_dst = self._t[m.dst] + x
        sq_src = self._sq[m.src] - xsq
        sq_dst = self._sq[m.dst] + xsq
        n_src = self._sizes[m.src] - 1
        n_dst = self._sizes[m.dst] + 1
        return t_src, t_dst, sq_src, sq_dst, n_src, n_dst


class BallHallEvaluator(_CentroidSSEvaluator):
    def _value_from(self, t, sq, sizes) -> float:
        ss = sq - (t**2).sum(axis=1) / sizes
        return float(-(ss / sizes).sum())

    def _full_value(self) -> float:
        return self._value_from(self._t, self._sq, self._sizes)

    def _peek(self, m: Move) -> float:
        t_src, t_dst, sq_src, sq_dst, n_src, n_dst = self._move_stats(m)
        ss = self._sq - (self._t**2).sum(axis=1) / self._sizes
        total = (ss / self._sizes).sum()
        total -= ss[m.src] / self._sizes[m.src] + ss[m.dst] / self._sizes[m.dst]
        total += (sq_src - (t_src**2).sum() / n_src) / n_src
        total += (sq_dst - (t_dst**2).sum() / n_dst) / n_dst
        return float(-total)


class CalinskiHarabaszEvaluator(_CentroidSSEvaluator):
    def _init_state(self) -> None:
        super()._init_state()
        self._tss = float(self._sqnorm.sum())

    def _ch(self, bcss: float) -> float:
        wcss = self._tss - bcss
        if wcss <= 0.0:
            return _INF
        return (self._n - self._k) / (self._k - 1) * bcss / wcss

    def _full_value(self) -> float:
        bcss = float(((self._t**2).sum(axis=1) / self._sizes).sum())
        return self._ch(bcss)

    def _peek(self, m: Move) -> float:
        t_src, t_dst, _, _, n_src, n_dst = self._move_stats(m)
        bcss = float(((self._t**2).sum(axis=1) / self._sizes).sum())
        bcss -= (self._t[m.src] ** 2).sum() / self._sizes[m.src]
        bcss -= (self._t[m.dst] ** 2).sum() / self._sizes[m.dst]
        bcss += (t_src**2).sum() / n_src + (t_dst**2).sum() / n_dst
        return self._ch(bcss)


class DaviesBouldinEvaluator(CVIEvaluator):
    """Partial recompute of the two affected clusters per move; the
    max-over-pairs term is re-derived from the k x k similarity matrix."""

    def _init_state(self) -> None:
        self._pts = self.ds.points
        self._t = np.zeros((self._k, self.ds.d))
        self._sdc = np.zeros(self._k)  # sum of member distances to own centroid
        for j in range(self._k):
            self._refresh(j)

    def _refresh(self, j: int) -> None:
        mem = self._members(j)
        self._t[j] = self._pts[mem].sum(axis=0)
        mu = self._t[j] / mem.shape[0]
        self._sdc[j] = np.linalg.norm(self._pts[mem] - mu, axis=1).sum()

    def _apply(self, m: Move) -> None:
        self._refresh(m.src)
        self._refresh(m.dst)

    @staticmethod
    def _db(t, sizes, sdc) -> float:
        with np.errstate(divide="ignore", invalid="ignore"):
            s = np.where(sizes > 1, sdc / sizes, np.inf)
            cents = t / sizes[:, None]
            m = np.linalg.norm(cents[:, None, :] - cents[None, :, :], axis=2)
            r = np.where(m > 0.0, (s[:, None] + s[None, :]) / m, np.inf)
        np.fill_diagonal(r, -np.inf)
        return float(-r.max(axis=1).mean())

    def _full_value(self) -> float:
        return self._db(self._t, self._sizes.astype(np.float64), self._sdc)

    def _peek(self, m: Move) -> float:
        p, a, b = m.point, m.src, m.dst
        x = self._pts[p]
        t2 = self._t.copy()
        sizes2 = self._sizes.astype(np.float64)
        sdc2 = self._sdc.copy()
        t2[a] -= x
        t2[b] += x
        sizes2[a] -= 1
        sizes2[b] += 1
        mem_a = self._members(a)
        mem_a = mem_a[mem_a != p]
        mem_b = np.append(self._members(b), p)
        sdc2[a] = np.linalg.norm(self._pts[mem_a] - t2[a] / sizes2[a], axis=1).sum()
        sdc2[b] = np.linalg.norm(self._pts[mem_b] - t2[b] / sizes2[b], axis=1).sum()
        return self._db(t2, sizes2, sdc2)


class SilhouetteEvaluator(CVIEvaluator):
    """O(nk) update via per-point sums of distances to every cluster."""

    weighted = False

    def _init_state(self) -> None:
        self._dp = DistanceProvider(self.ds)
        n, k = self._n, self._k
        self._dsum = np.zeros((n, k))
        if self._dp.dense is not None:
            for j in range(k):
                self._dsum[:, j] = self._dp.dense[:, self._labels == j].sum(axis=1)
        else:
            for i in range(n):
                row = self._dp.row(i)
                self._dsum[i] = np.bincount(self._labels, weights=row, minlength=k)
        self._row_cache: tuple[int, np.ndarray] | None = None

    def _row(self, p: int) -> np.ndarray:
        if self._row_cache is not None and self._row_cache[0] == p:
            return self._row_cache[1]
        row = self._dp.row(p)
        self._row_cache = (p, row)
        return row

    def _score(self, dsum_vals, own_sum, labels, sizes) -> float:
        ar = np.arange(self._n)
        with np.errstate(divide="ignore", invalid="ignore"):
            mean_to = dsum_vals / sizes[None, :]
            mean_to[ar, labels] = np.inf
            b = mean_to.min(axis=1)
            n_own = sizes[labels]
            a = own_sum / (n_own - 1)
            den = np.maximum(a, b)
            s = np.where(den > 0.0, (b - a) / den, 0.0)
        s[n_own == 1] = 0.0
        if not self.weighted:
            return float(s.mean())
        singles = int((sizes == 1).sum())
        effective = self._k - singles
        if effective < 1:
            return float("-inf")
        return float((s / n_own).sum() / effective)

    def _full_value(self) -> float:
        own = self._dsum[np.arange(self._n), self._labels]
        return self._score(self._dsum, own, self._labels, self._sizes)

    def _peek(self, m: Move) -> float:
        p, a, b = m.point, m.src, m.dst
        row = self._row(p)
        dsum2 = self._dsum.copy()
        dsum2[:, a] -= row
        dsum2[:, b] += row
        labels2 = self._labels.copy()
        labels2[p] = b
        sizes2 = self._sizes.copy()
        sizes2[a] -= 1
        sizes2[b] += 1
        own = dsum2[np.arange(self._n), labels2]
        return self._score(dsum2, own, labels2, sizes2)

    def _apply(self, m: Move) -> None:
        row = self._row(m.point)
        self._dsum[:, m.src] -= row
        self._dsum[:, m.dst] += row


class SilhouetteWEvaluator(SilhouetteEvaluator):
    weighted = True


class GDunnEvaluator(CVIEvaluator):
    """One evaluator for all 15 GDunn variants.

    Separation d1 rides on the Euclidean MST (the closest cross-partition
    pair is always an MST edge); d2/d3 keep k x k cross max/sum matrices
    with the two affected rows recomputed per move; d4/d5 and D3 derive
    from per-cluster vector sums and distance-to-centroid sums; D1 keeps
    cluster diameters with their witness pairs; D2 keeps within-cluster
    pair-distance sums.
    """

    def _init_state(self) -> None:
        self._dp = DistanceProvider(self.ds)
        self._pts = self.ds.points
        d, D = self.spec.d_variant, self.spec.big_d_variant
        self._dvar, self._Dvar = d, D
        k = self._k
        self._iu = np.triu_indices(k, 1)

        if d == 1:
            mu, mv, mw = emst(self.ds)
            self._mst_u, self._mst_v, self._mst_w = mu, mv, mw
            inc: list[list[int]] = [[] for _ in range(self._n)]
            other: list[list[int]] = [[] for _ in range(self._n)]
            for e in range(mu.shape[0]):
                inc[mu[e]].append(e)
                other[mu[e]].append(mv[e])
                inc[mv[e]].append(e)
                other[mv[e]].append(mu[e])
            self._mst_inc = [np.asarray(ix, dtype=np.int64) for ix in inc]
            self._mst_other = [np.asarray(ox, dtype=np.int64) for ox in other]
            self._mst_cross = self._labels[mu] != self._labels[mv]
        if d == 2:
            self._cmax = np.full((k, k), -np.inf)
            for i in range(k):
                for j in range(i + 1, k):
                    v = self._cross_max(self._members(i), self._members(j))
                    self._cmax[i, j] = self._cmax[j, i] = v
        if d == 3:
            self._csum = np.zeros((k, k))
            for i in range(k):
                for j in range(i + 1, k):
                    v = float(self._dp.sub(self._members(i), self._members(j)).sum())
                    self._csum[i, j] = self._csum[j, i] = v
        if d in (4, 5) or D == 3:
            self._t = np.zeros((k, self.ds.d))
            for j in range(k):
                self._t[j] = self._pts[self._members(j)].sum(axis=0)
        if d == 5 or D == 3:
            self._sdc = np.zeros(k)
            for j in range(k):
                self._sdc[j] = self._sum_dist_to_centroid(self._members(j), self._t[j])
        if D == 1:
            self._diam = np.zeros(k)
            self._diam_pair = np.full((k, 2), -1, dtype=np.int64)
            for j in range(k):
                self._refresh_diameter(j)
        if D == 2:
            self._ws = np.zeros(k)
            for j in range(k):
                mem = self._members(j)
                if mem.shape[0] > 1:
                    self._ws[j] = float(self._dp.sub(mem, mem).sum()) / 2.0

    # -- small helpers ----------------------------------------------------

    def _cross_max(self, mem_i: np.ndarray, mem_j: np.ndarray) -> float:
        return float(self._dp.sub(mem_i, mem_j).max())

    def _sum_dist_to_centroid(self, mem: np.ndarray, t_row: np.ndarray) -> float:
        mu = t_row / mem.shape[0]
        return float(np.linalg.norm(self._pts[mem] - mu, axis=1).sum())

    def _refresh_diameter(self, j: int) -> None:
        mem = self._members(j)
        if mem.shape[0] < 2:
            self._diam[j] = 0.0
            self._diam_pair[j] = (-1, -1)
            return
        block = self._dp.sub(mem, mem)
        flat = int(block.argmax())
        i1, i2 = divmod(flat, mem.shape[0])
        self._diam[j] = float(block[i1, i2])
        self._diam_pair[j] = (mem[i1], mem[i2])

    def _rbc(self, row: np.ndarray) -> np.ndarray:
        """Per-cluster sums of one distance row; own-cluster entry excludes
        the moving point itself because d(p, p) = 0."""
        return np.bincount(self._labels, weights=row, minlength=self._k)

    # -- value assembly ---------------------------------------------------

    def _full_value(self) -> float:
        return _ratio(self._numerator_now(), self._denominator_now())

    def _numerator_now(self) -> float:
        d = self._dvar
        iu = self._iu
        if d == 1:
            return float(self._mst_w[self._mst_cross].min())
        if d == 2:
            return float(self._cmax[iu].min())
        if d == 3:
            sizes = self._sizes.astype(np.float64)
            counts = sizes[:, None] * sizes[None, :]
            return float((self._csum[iu] / counts[iu]).min())
        if d == 4:
            cents = self._t / self._sizes[:, None]
            m = np.linalg.norm(cents[:, None, :] - cents[None, :, :], axis=2)
            return float(m[iu].min())
        sizes = self._sizes.astype(np.float64)
        pair = (self._sdc[:, None] + self._sdc[None, :]) / (sizes[:, None] + sizes[None, :])
        return float(pair[iu].min())

    def _denominator_now(self) -> float:
        D = self._Dvar
        if D == 1:
            return float(self._diam.max())
        if D == 2:
            sizes = self._sizes.astype(np.float64)
            with np.errstate(divide="ignore", invalid="ignore"):
                means = np.where(self._sizes > 1, self._ws / (sizes * (sizes - 1) / 2.0), 0.0)
            return float(means.max())
        return float((self._sdc / self._sizes).max())

    # -- peek ---------------------------------------------------------------

    def _peek(self, m: Move) -> float:
        row = self._dp.row(m.point)
        scratch: dict = {}
        num = self._peek_numerator(m, row, scratch)
        den = self._peek_denominator(m, row, scratch)
        return _ratio(num, den)

    def _rbc_for(self, row: np.ndarray, scratch: dict) -> np.ndarray:
        if "rbc" not in scratch:
            scratch["rbc"] = self._rbc(row)
        return scratch["rbc"]

    def _new_sizes(self, m: Move) -> np.ndarray:
        sizes = self._sizes.astype(np.float64).copy()
        sizes[m.src] -= 1
        sizes[m.dst] += 1
        return sizes

    def _sdc_after(self, m: Move, scratch: dict) -> np.ndarray:
        if "sdc2" in scratch:
            return scratch["sdc2"]
        p, a, b = m.point, m.src, m.dst
        x = self._pts[p]
        sdc2 = self._sdc.copy()
        mem_a = self._members(a)
        mem_a = mem_a[mem_a != p]
        mem_b = np.append(self._members(b), p)
        sdc2[a] = self._sum_dist_to_centroid(mem_a, self._t[a] - x)
        sdc2[b] = self._sum_dist_to_centroid(mem_b, self._t[b] + x)
        scratch["sdc2"] = sdc2
        return sdc2

    def _peek_numerator(self, m: Move, row: np.ndarray, scratch: dict) -> float:
        d, k = self._dvar, self._k
        p, a, b = m.point, m.src, m.dst
        iu = self._iu
        if d == 1:
            mask = self._mst_cross.copy()
            idx = self._mst_inc[p]
            if idx.size:
                mask[idx] = self._labels[self._mst_other[p]] != b
            return float(self._mst_w[mask].min())
        if d == 2:
            c2 = self._cmax.copy()
            mem_a = self._members(a)
            mem_a = mem_a[mem_a != p]
            mem_b = np.append(self._members(b), p)
            mems = {a: mem_a, b: mem_b}
            for j in range(k):
                if j != a:
                    mj = mems.get(j, None)
                    if mj is None:
                        mj = self._members(j)
                    c2[a, j] = c2[j, a] = self._cross_max(mem_a, mj)
                if j != b and j != a:
                    c2[b, j] = c2[j, b] = self._cross_max(mem_b, self._members(j))
            return float(c2[iu].min())
        if d == 3:
            c2 = self._csum.copy()
            rbc = self._rbc_for(row, scratch)
            for j in range(k):
                if j != a:
                    c2[a, j] -= rbc[j]
                    c2[j, a] = c2[a, j]
            for j in range(k):
                if j != b:
                    c2[b, j] += rbc[j]
                    c2[j, b] = c2[b, j]
            sizes2 = self._new_sizes(m)
            counts = sizes2[:, None] * sizes2[None, :]
            return float((c2[iu] / counts[iu]).min())
        if d == 4:
            x = self._pts[p]
            t2 = self._t.copy()
            t2[a] -= x
            t2[b] += x
            sizes2 = self._new_sizes(m)
            cents = t2 / sizes2[:, None]
            mm = np.linalg.norm(cents[:, None, :] - cents[None, :, :], axis=2)
            return float(mm[iu].min())
        sdc2 = self._sdc_after(m, scratch)
        sizes2 = self._new_sizes(m)
        pair = (sdc2[:, None] + sdc2[None, :]) / (sizes2[:, None] + sizes2[None, :])
        return float(pair[iu].min())

    def _peek_denominator(self, m: Move, row: np.ndarray, scratch: dict) -> float:
        D = self._Dvar
        p, a, b = m.point, m.src, m.dst
        if D == 1:
            mem_b = self._members(b)
            diam_b = max(self._diam[b], float(row[mem_b].max()))
            if p in (self._diam_pair[a][0], self._diam_pair[a][1]):
                mem_a = self._members(a)
                mem_a = mem_a[mem_a != p]
                if mem_a.shape[0] < 2:
                    diam_a = 0.0
                else:
                    diam_a = float(self._dp.sub(mem_a, mem_a).max())
            else:
                diam_a = self._diam[a]
            d2 = self._diam.copy()
            d2[a] = diam_a
            d2[b] = diam_b
            return float(d2.max())
        if D == 2:
            rbc = self._rbc_for(row, scratch)
            ws2 = self._ws.copy()
            ws2[a] -= rbc[a]
            ws2[b] += rbc[b]
            sizes2 = self._new_sizes(m)
            with np.errstate(divide="ignore", invalid="ignore"):
                means = np.where(sizes2 > 1, ws2 / (sizes2 * (sizes2 - 1) / 2.0), 0.0)
            return float(means.max())
        sdc2 = self._sdc_after(m, scratch)
        sizes2 = self._new_sizes(m)
        return float((sdc2 / sizes2).max())

    # -- apply ----------------------------------------------------------------

    def _apply(self, m: Move) -> None:
        # labels/sizes already post-move here
        p, a, b = m.point, m.src, m.dst
        d, D = self._dvar, self._Dvar
        if d == 1:
            idx = self._mst_inc[p]
            if idx.size:
                self._mst_cross[idx] = self._labels[self._mst_other[p]] != b
        if d == 2:
            for j in range(self._k):
                if j != a:
                    v = self._cross_max(self._members(a), self._members(j))
                    self._cmax[a, j] = self._cmax[j, a] = v
                if j != b and j != a:
                    v = self._cross_max(self._members(b), self._members(j))
                    self._cmax[b, j] = self._cmax[j, b] = v
        if d == 3:
            for j in range(self._k):
                if j != a:
                    v = float(self._dp.sub(self._members(a), self._members(j)).sum())
                    self._csum[a, j] = self._csum[j, a] = v
                if j != b and j != a:
                    v = float(self._dp.sub(self._members(b), self._members(j)).sum())
                    self._csum[b, j] = self._csum[j, b] = v
        if d in (4, 5) or D == 3:
            for j in (a, b):
                self._t[j] = self._pts[self._members(j)].sum(axis=0)
        if d == 5 or D == 3:
            for j in (a, b):
                self._sdc[j] = self._sum_dist_to_centroid(self._members(j), self._t[j])
        if D == 1:
            row = self._dp.row(p)
            mem_b = self._members(b)
            mem_b = mem_b[mem_b != p]
            if mem_b.size:
                far = float(row[mem_b].max())
                if far > self._diam[b]:
                    self._diam[b] = far
                    self._diam_pair[b] = (p, mem_b[int(row[mem_b].argmax())])
            if p in (self._diam_pair[a][0], self._diam_pair[a][1]):
                self._refresh_diameter(a)
        if D == 2:
            for j in (a, b):
                mem = self._members(j)
                self._ws[j] = (
                    float(self._dp.sub(mem, mem).sum()) / 2.0 if mem.shape[0] > 1 else 0.0
                )


class _MergedExtreme:
    """Order statistics of (multiset - removed + added) near one extreme."""

    @staticmethod
    def take(sl: SortedList, removed: list, added: list, t: int, largest: bool) -> list:
        span = t + len(removed)
        if largest:
            base = list(sl.islice(max(0, len(sl) - span), len(sl)))[::-1]
            rem = sorted(removed, reverse=True)
            add = sorted(added, reverse=True)
        else:
            base = list(sl.islice(0, min(span, len(sl))))
            rem = sorted(removed)
            add = sorted(added)
        kept = []
        ri = 0
        for x in base:
            if ri < len(rem) and rem[ri] == x:
                ri += 1
                continue
            kept.append(x)
        # merge two extreme-sorted lists, keep the first t
        out = []
        i = j = 0
        while len(out) < t and (i < len(kept) or j < len(add)):
            if j >= len(add):
                out.append(kept[i])
                i += 1
            elif i >= len(kept):
                out.append(add[j])
                j += 1
            else:
                ki, aj = kept[i], add[j]
                better = (ki >= aj) if largest else (ki <= aj)
                if better:
                    out.append(ki)
                    i += 1
                else:
                    out.append(add[j])
                    j += 1
        return out


class DuNNEvaluator(CVIEvaluator):
    """Order-statistic multisets over the fixed NN edge set.

    A move flips only the edges incident to the relocated point between
    the cross-cluster and within-cluster multisets, so aggregation costs
    O((M + support) log E) instead of a full re-sort.
    """

    def __init__(self, spec, ds, part, graph: NNGraph | None = None):
        self._graph = graph
        super().__init__(spec, ds, part)

    def _init_state(self) -> None:
        if self._graph is not None:
            edges = symmetric_edges(self._graph)
        else:
            edges = edges_for(self.ds, self.spec.m)
        self._eu, self._ev, self._ed = edges.u, edges.v, edges.dist
        E = len(edges)
        both = np.concatenate([self._eu, self._ev])
        eidx = np.concatenate([np.arange(E), np.arange(E)])
        opp = np.concatenate([self._ev, self._eu])
        order = np.argsort(both, kind="stable")
        both, eidx, opp = both[order], eidx[order], opp[order]
        starts = np.searchsorted(both, np.arange(self._n + 1))
        self._inc = [eidx[starts[i] : starts[i + 1]] for i in range(self._n)]
        self._opp = [opp[starts[i] : starts[i + 1]] for i in range(self._n)]
        self._within = self._labels[self._eu] == self._labels[self._ev]
        self._cross_sl = SortedList(self._ed[~self._within])
        self._within_sl = SortedList(self._ed[self._within])
        self._cross_sum = float(self._ed[~self._within].sum())
        self._within_sum = float(self._ed[self._within].sum())

    def _aggregate(self, sl: SortedList, total: float, spec, removed: list, added: list):
        """Aggregate of (sl - removed + added); None signals an empty multiset."""
        if spec.is_const:
            return 1.0
        z = len(sl) - len(removed) + len(added)
        if z <= 0:
            return None
        if spec.kind == "Mean":
            return (total - sum(removed) + sum(added)) / z
        if spec.kind == "Min":
            return _MergedExtreme.take(sl, removed, added, 1, largest=False)[0]
        if spec.kind == "Max":
            return _MergedExtreme.take(sl, removed, added, 1, largest=True)[0]
        t = min(3 * spec.delta, z)
        w = smooth_extreme_weights(spec.delta, t)
        ext = _MergedExtreme.take(sl, removed, added, t, largest=(spec.kind == "SMax"))
        return float(np.dot(w, np.asarray(ext)))

    def _value_for(self, removed_cross, added_cross) -> float:
        """removed_cross: edges leaving the cross side (they join within)."""
        num = self._aggregate(
            self._cross_sl, self._cross_sum, self.spec.owa_s, removed_cross, added_cross
        )
        if num is None:
            return _INF  # no cross edges: perfect separation
        den = self._aggregate(
            self._within_sl, self._within_sum, self.spec.owa_c, added_cross, removed_cross
        )
        if den is None:
            return -_INF  # no within edges to witness compactness
        return _ratio(num, den)

    def _full_value(self) -> float:
        return self._value_for([], [])

    def _flips(self, m: Move):
        p, a, b = m.point, m.src, m.dst
        inc = self._inc[p]
        lab_o = self._labels[self._opp[p]]
        before_within = lab_o == a
        after_within = lab_o == b
        to_cross = self._ed[inc[before_within & ~after_within]]
        to_within = self._ed[inc[~before_within & after_within]]
        return list(to_cross), list(to_within)

    def _peek(self, m: Move) -> float:
        to_cross, to_within = self._flips(m)
        return self._value_for(removed_cross=to_within, added_cross=to_cross)

    def _apply(self, m: Move) -> None:
        # labels already post-move; recompute flip sets from the pre-move side
        p, a, b = m.point, m.src, m.dst
        inc = self._inc[p]
        lab_o = self._labels[self._opp[p]]
        was_within = lab_o == a
        now_within = lab_o == b
        gone = inc[was_within & ~now_within]
        came = inc[~was_within & now_within]
        for e in gone:
            d = self._ed[e]
            self._within_sl.remove(d)
            self._cross_sl.add(d)
            self._within_sum -= d
            self._cross_sum += d
            self._within[e] = False
        for e in came:
            d = self._ed[e]
            self._cross_sl.remove(d)
            self._within_sl.add(d)
            self._cross_sum -= d
            self._within_sum += d
            self._within[e] = True


class WCNNEvaluator(CVIEvaluator):
    """Integer count of directed same-cluster NN pairs; exact updates."""

    def __init__(self, spec, ds, part, graph: NNGraph | None = None):
        self._graph = graph
        super().__init__(spec, ds, part)

    def _init_state(self) -> None:
        g = self._graph if self._graph is not None else knn_for(self.ds, self.spec.m)
        self._nb = g.neighbours
        n, M = self._nb.shape
        src = np.repeat(np.arange(n, dtype=np.int64), M)
        tgt = self._nb.ravel()
        order = np.argsort(tgt, kind="stable")
        src_sorted = src[order]
        starts = np.searchsorted(tgt[order], np.arange(n + 1))
        self._in_nb = [src_sorted[starts[i] : starts[i + 1]] for i in range(n)]
        self._count = int((self._labels[self._nb] == self._labels[:, None]).sum())

    def _guarded(self, count: int, sizes: np.ndarray) -> float:
        if (sizes <= self.spec.m).any():
            return -_INF
        return count / (self._n * self.spec.m)

    def _full_value(self) -> float:
        return self._guarded(self._count, self._sizes)

    def _delta(self, p: int, a: int, b: int) -> int:
        out_lab = self._labels[self._nb[p]]
        in_lab = self._labels[self._in_nb[p]]
        return int(
            (out_lab == b).sum()
            + (in_lab == b).sum()
            - (out_lab == a).sum()
            - (in_lab == a).sum()
        )

    def _peek(self, m: Move) -> float:
        sizes2 = self._sizes.copy()
        sizes2[m.src] -= 1
        sizes2[m.dst] += 1
        return self._guarded(self._count + self._delta(m.point, m.src, m.dst), sizes2)

    def _apply(self, m: Move) -> None:
        # neighbour labels never include the moved point itself, so the
        # delta is the same whether computed pre- or post-move
        out_lab = self._labels[self._nb[m.point]]
        in_lab = self._labels[self._in_nb[m.point]]
        self._count = int(
            self._count
            + (out_lab == m.dst).sum()
            + (in_lab == m.dst).sum()
            - (out_lab == m.src).sum()
            - (in_lab == m.src).sum()
        )


def make_evaluator(
    spec: CVISpec, ds: Dataset, p: Partition, graph: NNGraph | None = None
) -> CVIEvaluator:
    """Build the incremental evaluator for ``spec`` at partition ``p``."""
    if spec.family == "BallHall":
        return BallHallEvaluator(spec, ds, p)
    if spec.family == "CalinskiHarabasz":
        return CalinskiHarabaszEvaluator(spec, ds, p)
    if spec.family == "DaviesBouldin":
        return DaviesBouldinEvaluator(spec, ds, p)
    if spec.family == "Silhouette":
        return SilhouetteEvaluator(spec, ds, p)
    if spec.family == "SilhouetteW":
        return SilhouetteWEvaluator(spec, ds, p)
    if spec.family == "GDunn":
        return GDunnEvaluator(spec, ds, p)
    if spec.family == "DuNN":
        return DuNNEvaluator(spec, ds, p, graph=graph)
    if spec.family == "WCNN":
        return WCNNEvaluator(spec, ds, p, graph=graph)
    raise ParameterError(f"unknown family {spec.family!r}")

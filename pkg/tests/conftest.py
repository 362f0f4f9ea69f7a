"""Shared fixtures and independent brute-force oracles.

The oracles here deliberately avoid the library's own code paths: pair
counting loops for the adjusted Rand index, full distance sorts for
nearest neighbours, definitional silhouette loops, and restricted-growth
enumeration of set partitions.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
import pytest

from cviopt import dataio, partition


@pytest.fixture
def x4() -> dataio.Dataset:
    """Two tight 1-D pairs far apart: the workhorse toy configuration."""
    return dataio.Dataset(np.array([[0.0], [1.0], [10.0], [11.0]]))


def make_dataset(rng: np.random.Generator, n: int, d: int) -> dataio.Dataset:
    return dataio.Dataset(rng.normal(size=(n, d)))


def random_surjective_labels(rng: np.random.Generator, n: int, k: int) -> np.ndarray:
    while True:
        labels = rng.integers(0, k, size=n)
        if np.bincount(labels, minlength=k).min() > 0:
            return labels


# ---------------------------------------------------------------------------
# oracles


def brute_ari(a, b) -> float:
    """ARI by direct enumeration of point pairs (integer exact)."""
    a = list(a)
    b = list(b)
    n11 = n10 = n01 = n00 = 0
    for i in range(len(a)):
        for j in range(i + 1, len(a)):
            sa = a[i] == a[j]
            sb = b[i] == b[j]
            if sa and sb:
                n11 += 1
            elif sa:
                n10 += 1
            elif sb:
                n01 += 1
            else:
                n00 += 1
    num = 2 * (n11 * n00 - n10 * n01)
    den = (n11 + n10) * (n10 + n00) + (n11 + n01) * (n01 + n00)
    if den == 0:
        return 1.0
    return num / den


def brute_knn(points: np.ndarray, M: int):
    """Neighbour lists by full distance sort with (distance, index) keys."""
    n = points.shape[0]
    nbrs = np.empty((n, M), dtype=np.int64)
    dists = np.empty((n, M))
    for i in range(n):
        cand = []
        for j in range(n):
            if j != i:
                cand.append((math.dist(points[i], points[j]), j))
        cand.sort()
        nbrs[i] = [j for _, j in cand[:M]]
        dists[i] = [d for d, _ in cand[:M]]
    return nbrs, dists


def brute_silhouette_scores(points: np.ndarray, labels: np.ndarray) -> list[float]:
    """Per-point silhouette widths straight from the definitions."""
    n = len(labels)
    k = int(labels.max()) + 1
    scores = []
    for i in range(n):
        own = [j for j in range(n) if labels[j] == labels[i]]
        if len(own) == 1:
            scores.append(0.0)  # a_i = +inf convention
            continue
        a = sum(math.dist(points[i], points[u]) for u in own) / (len(own) - 1)
        b = min(
            sum(math.dist(points[i], points[v]) for v in range(n) if labels[v] == c)
            / sum(1 for v in range(n) if labels[v] == c)
            for c in range(k)
            if c != labels[i]
        )
        scores.append((b - a) / max(a, b))
    return scores


def set_partitions(n: int):
    """All set partitions of range(n) as canonical label tuples (RGS)."""

    def rec(i, labels, m):
        if i == n:
            yield tuple(labels)
            return
        for v in range(m + 1):
            labels.append(v)
            yield from rec(i + 1, labels, max(m, v + 1))
            labels.pop()

    yield from rec(0, [], 0)


def k_partitions(n: int, k: int):
    """All partitions of range(n) into exactly k nonempty blocks."""
    for labels in set_partitions(n):
        if max(labels) + 1 == k:
            yield labels


def wcss(points: np.ndarray, labels) -> float:
    labels = np.asarray(labels)
    total = 0.0
    for j in range(int(labels.max()) + 1):
        block = points[labels == j]
        total += ((block - block.mean(axis=0)) ** 2).sum()
    return float(total)


def all_cluster_permutation_relabels(labels: np.ndarray, k: int):
    for perm in itertools.permutations(range(k)):
        yield np.array([perm[v] for v in labels])

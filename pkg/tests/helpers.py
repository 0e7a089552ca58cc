"""Shared test utilities: random instances and independent reference oracles."""
from __future__ import annotations

import itertools
import math

import numpy as np
from scipy.spatial.distance import pdist, squareform

from spbench.distances import DistanceMatrix
from spbench.partitions import Partition


def random_points(rng, n, d=3):
    return rng.normal(size=(n, d))


def random_distance_matrix(rng, n, d=3) -> DistanceMatrix:
    return DistanceMatrix(squareform(pdist(random_points(rng, n, d))))


def random_partition(rng, n, k_max=6) -> Partition:
    """Random labelling with at least two non-empty clusters."""
    if n < 2:
        raise ValueError("need n >= 2")
    while True:
        k = int(rng.integers(2, min(k_max, n) + 1))
        labels = rng.integers(0, k, size=n)
        if np.unique(labels).size >= 2:
            return Partition(labels)


def enumerate_set_partitions(n):
    """All partitions of range(n) as canonical label tuples."""
    def grow(prefix, used):
        i = len(prefix)
        if i == n:
            yield tuple(prefix)
            return
        for label in range(used + 1):
            yield from grow(prefix + [label], max(used, label + 1))
    yield from grow([], 0)


def aucc_bruteforce(D: DistanceMatrix, P: Partition):
    """Direct comparison of every within pair with every between pair."""
    n = P.n
    within, between = [], []
    for i in range(n):
        for j in range(i + 1, n):
            (within if P.labels[i] == P.labels[j] else between).append(D.values[i, j])
    if not within or not between:
        return None
    score = 0.0
    for w in within:
        for b in between:
            if w < b:
                score += 1.0
            elif w == b:
                score += 0.5
    return score / (len(within) * len(between))


def ari_bruteforce(a: Partition, b: Partition) -> float:
    """Pair-by-pair agreement counting, adjusted for chance with exact fractions."""
    n = a.n
    n11 = n00 = n10 = n01 = 0
    for i in range(n):
        for j in range(i + 1, n):
            same_a = a.labels[i] == a.labels[j]
            same_b = b.labels[i] == b.labels[j]
            if same_a and same_b:
                n11 += 1
            elif same_a:
                n10 += 1
            elif same_b:
                n01 += 1
            else:
                n00 += 1
    total = n11 + n10 + n01 + n00
    sum_a = n11 + n10
    sum_b = n11 + n01
    expected = sum_a * sum_b / total
    denom = (sum_a + sum_b) / 2.0 - expected
    if denom == 0.0:
        return 1.0 if np.array_equal(a.labels, b.labels) else 0.0
    return (n11 - expected) / denom


def ami_bruteforce(a: Partition, b: Partition) -> float:
    """AMI with the expected MI summed from exact hypergeometric counts."""
    if np.array_equal(a.labels, b.labels):
        return 1.0
    n = a.n
    table = np.zeros((a.k, b.k), dtype=np.int64)
    for la, lb in zip(a.labels, b.labels):
        table[la, lb] += 1
    row = table.sum(axis=1)
    col = table.sum(axis=0)

    def entropy(counts):
        return -sum((c / n) * math.log(c / n) for c in counts if c)

    mi = sum((table[i, j] / n) * math.log(n * table[i, j] / (row[i] * col[j]))
             for i in range(a.k) for j in range(b.k) if table[i, j])
    emi = 0.0
    for ai in row:
        for bj in col:
            for nij in range(max(1, ai + bj - n), min(ai, bj) + 1):
                prob = (math.comb(bj, nij) * math.comb(n - bj, ai - nij)
                        / math.comb(n, ai))
                emi += prob * (nij / n) * math.log(n * nij / (ai * bj))
    denom = 0.5 * (entropy(row) + entropy(col)) - emi
    if abs(denom) < 1e-15:
        return 0.0
    return (mi - emi) / denom


def _partition_from_sets(n, clusters) -> Partition:
    labels = np.empty(n, dtype=np.int64)
    for idx, members in enumerate(sorted(clusters, key=min)):
        for m in members:
            labels[m] = idx
    return Partition(labels)


def agglomerative_reference(D: DistanceMatrix, linkage: str):
    """Textbook agglomeration on dict-of-sets state, one partition per level.

    Cluster distances follow the classic recursive definitions: single and
    complete reduce over cross pairs, average weights by sizes, weighted
    averages the two parents, and ward uses the squared-form update on the
    supplied dissimilarities.  Ties pick the pair whose (smallest member,
    smallest member) is lexicographically least.
    """
    n = D.n
    clusters = {i: frozenset([i]) for i in range(n)}
    dist = {(i, j): float(D.values[i, j]) for i in range(n) for j in range(i + 1, n)}
    levels = {n: _partition_from_sets(n, clusters.values())}
    while len(clusters) > 1:
        best = min(dist.items(), key=lambda kv: (kv[1], kv[0]))
        (i, j), d_ij = best
        merged = clusters[i] | clusters[j]
        s_i, s_j = len(clusters[i]), len(clusters[j])
        others = [r for r in clusters if r not in (i, j)]
        new_dist = {}
        for r in others:
            d_ir = dist[tuple(sorted((i, r)))]
            d_jr = dist[tuple(sorted((j, r)))]
            s_r = len(clusters[r])
            if linkage == "single":
                value = min(d_ir, d_jr)
            elif linkage == "complete":
                value = max(d_ir, d_jr)
            elif linkage == "average":
                value = (s_i * d_ir + s_j * d_jr) / (s_i + s_j)
            elif linkage == "weighted":
                value = 0.5 * (d_ir + d_jr)
            else:
                value = math.sqrt(((s_i + s_r) * d_ir ** 2 + (s_j + s_r) * d_jr ** 2
                                   - s_r * d_ij ** 2) / (s_i + s_j + s_r))
            new_dist[r] = value
        del clusters[j]
        rep = min(i, j)
        if rep != i:
            del clusters[i]
        clusters[rep] = merged
        dist = {key: value for key, value in dist.items()
                if i not in key and j not in key}
        for r in others:
            dist[tuple(sorted((rep, r)))] = new_dist[r]
        levels[len(clusters)] = _partition_from_sets(n, clusters.values())
    return levels


def pam_exhaustive_cost(D: DistanceMatrix, k: int) -> float:
    """Globally optimal assignment cost over all medoid subsets."""
    best = math.inf
    for subset in itertools.combinations(range(D.n), k):
        cost = float(D.values[:, list(subset)].min(axis=1).sum())
        best = min(best, cost)
    return best

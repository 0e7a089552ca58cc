"""Partitions, clustering on precomputed dissimilarities, and partition samplers."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distances import DistanceMatrix

LINKAGES = ("single", "complete", "average", "weighted", "ward")
MEDOID_TIE_MODES = ("lowest_index", "random")


def canonical_labels(raw) -> np.ndarray:
    """Relabel clusters as 0..k-1 in order of first appearance."""
    raw = np.asarray(raw).ravel()
    if raw.size == 0:
        raise ValueError("empty labelling")
    _, first, inverse = np.unique(raw, return_index=True, return_inverse=True)
    order = np.argsort(first, kind="stable")
    rank = np.empty(order.size, dtype=np.int64)
    rank[order] = np.arange(order.size)
    return rank[inverse.ravel()]


@dataclass(frozen=True, eq=False)
class Partition:
    """A hard partition of objects 0..n-1, stored in canonical label form."""

    labels: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "labels", canonical_labels(self.labels))
        self.labels.setflags(write=False)

    @property
    def n(self) -> int:
        return self.labels.shape[0]

    @property
    def k(self) -> int:
        return int(self.labels.max()) + 1

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.k)

    def members(self, j: int) -> np.ndarray:
        return np.nonzero(self.labels == j)[0]

    def __eq__(self, other):
        return isinstance(other, Partition) and np.array_equal(self.labels, other.labels)


def _lw_update(linkage, d_il, d_jl, d_ij, s_i, s_j, s_l):
    if linkage == "single":
        return np.minimum(d_il, d_jl)
    if linkage == "complete":
        return np.maximum(d_il, d_jl)
    if linkage == "average":
        return (s_i * d_il + s_j * d_jl) / (s_i + s_j)
    if linkage == "weighted":
        return 0.5 * (d_il + d_jl)
    # ward, applied directly to the supplied dissimilarities
    total = s_i + s_j + s_l
    sq = ((s_i + s_l) * d_il**2 + (s_j + s_l) * d_jl**2 - s_l * d_ij**2) / total
    return np.sqrt(np.maximum(sq, 0.0))


def agglomerative_merges(D: DistanceMatrix, linkage: str) -> list[tuple[int, int]]:
    """Full merge sequence of Lance-Williams agglomeration.

    Clusters live in the slot of their smallest member index; each step
    merges the closest active pair, breaking ties by smallest (i, j).
    """
    if linkage not in LINKAGES:
        raise ValueError(f"unknown linkage: {linkage!r}")
    n = D.n
    work = D.values.astype(np.float64).copy()
    np.fill_diagonal(work, np.inf)
    sizes = np.ones(n)
    active = np.ones(n, dtype=bool)
    merges: list[tuple[int, int]] = []
    for _ in range(n - 1):
        flat = int(np.argmin(work))
        i, j = divmod(flat, n)
        if i > j:  # unreachable for finite ties (see the flat-index ordering)
            i, j = j, i
        merges.append((i, j))
        others = np.nonzero(active)[0]
        others = others[(others != i) & (others != j)]
        if others.size:
            updated = _lw_update(linkage, work[i, others], work[j, others],
                                 work[i, j], sizes[i], sizes[j], sizes[others])
            work[i, others] = updated
            work[others, i] = updated
        sizes[i] += sizes[j]
        active[j] = False
        work[j, :] = np.inf
        work[:, j] = np.inf
        work[i, i] = np.inf
    return merges


def cut_merges(merges: list[tuple[int, int]], n: int, k: int) -> Partition:
    """Partition after applying the first n-k merges."""
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in [1, {n}], got {k}")
    parent = np.arange(n)

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i, j in merges[: n - k]:
        # slots always carry the smallest member, so i absorbs j
        parent[find(j)] = find(i)
    roots = np.array([find(a) for a in range(n)])
    return Partition(roots)


def agglomerative(D: DistanceMatrix, linkage: str, k: int) -> Partition:
    """Cut an agglomerative hierarchy on precomputed dissimilarities at k."""
    return cut_merges(agglomerative_merges(D, linkage), D.n, k)


def _pam_build(d: np.ndarray, k: int) -> np.ndarray:
    n = d.shape[0]
    first = int(np.argmin(d.sum(axis=0)))
    chosen = [first]
    nearest = d[:, first].copy()
    for _ in range(1, k):
        reduction = np.maximum(nearest[:, None] - d, 0.0).sum(axis=0)
        reduction[chosen] = -np.inf
        pick = int(np.argmax(reduction))
        chosen.append(pick)
        nearest = np.minimum(nearest, d[:, pick])
    return np.sort(np.array(chosen))


def _pam_swap(d: np.ndarray, medoids: np.ndarray, max_iter: int):
    n = d.shape[0]
    k = medoids.shape[0]
    for _ in range(max_iter):
        cols = d[:, medoids]
        nearest = np.argmin(cols, axis=1)
        d1 = cols[np.arange(n), nearest]
        if k == 1:
            d2 = np.full(n, np.inf)
        else:
            part = np.partition(cols, 1, axis=1)
            d2 = part[:, 1]
        cost = float(d1.sum())
        in_set = np.zeros(n, dtype=bool)
        in_set[medoids] = True
        cand = np.nonzero(~in_set)[0]
        if cand.size == 0:
            return medoids, cost
        dch = d[:, cand]
        shift = np.minimum(dch - d1[:, None], 0.0)
        base = shift.sum(axis=0)
        gain = np.minimum(d2[:, None], dch) - d1[:, None] - shift
        delta = np.empty((k, cand.size))
        for i in range(k):
            rows = nearest == i
            delta[i] = base + gain[rows].sum(axis=0)
        flat = int(np.argmin(delta))
        best = float(delta.flat[flat])
        if best >= -1e-11 * (1.0 + cost):
            return medoids, cost
        i, h = divmod(flat, cand.size)
        medoids = medoids.copy()
        medoids[i] = cand[h]
        medoids = np.sort(medoids)
    cols = d[:, medoids]
    return medoids, float(cols[np.arange(n), np.argmin(cols, axis=1)].sum())


def kmedoids_pam(D: DistanceMatrix, k: int, n_init: int = 30, max_iter: int = 100,
                 rng: np.random.Generator | None = None) -> Partition:
    """PAM k-medoids: greedy BUILD start plus random restarts, best of all.

    Restart 0 starts from the BUILD seeding; the remaining restarts start
    from uniformly drawn medoid sets.  The lowest final assignment cost
    wins, earlier restarts winning ties.
    """
    n = D.n
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in [1, {n}], got {k}")
    if n_init < 1:
        raise ValueError("n_init must be at least 1")
    if rng is None:
        rng = np.random.default_rng()
    d = D.values
    best_medoids, best_cost = None, np.inf
    for restart in range(n_init):
        if restart == 0:
            start = _pam_build(d, k)
        else:
            start = np.sort(rng.choice(n, size=k, replace=False))
        medoids, cost = _pam_swap(d, start, max_iter)
        if cost < best_cost:
            best_medoids, best_cost = medoids, cost
    labels = np.argmin(d[:, best_medoids], axis=1)
    return Partition(labels)


def medoids(D: DistanceMatrix, P: Partition, tie_mode: str = "lowest_index",
            rng: np.random.Generator | None = None) -> np.ndarray:
    """Per-cluster prototypes: members minimising the within-cluster distance sum.

    Ties (exactly equal sums) go to the lowest object index or to a uniform
    random choice, depending on tie_mode.
    """
    if tie_mode not in MEDOID_TIE_MODES:
        raise ValueError(f"unknown tie_mode: {tie_mode!r}")
    if tie_mode == "random" and rng is None:
        raise ValueError("tie_mode='random' requires an rng")
    out = np.empty(P.k, dtype=np.int64)
    for j in range(P.k):
        idx = P.members(j)
        sums = D.values[np.ix_(idx, idx)].sum(axis=0)
        tied = idx[sums == sums.min()]
        out[j] = tied[0] if tie_mode == "lowest_index" else int(rng.choice(tied))
    return out


def grand_medoid(D: DistanceMatrix, tie_mode: str = "lowest_index",
                 rng: np.random.Generator | None = None) -> int:
    """Prototype of the whole dataset (single-cluster medoid)."""
    single = Partition(np.zeros(D.n, dtype=np.int64))
    return int(medoids(D, single, tie_mode, rng)[0])


def _randbelow(rng: np.random.Generator, bound: int) -> int:
    """Uniform integer in [0, bound) for arbitrarily large Python ints."""
    if bound <= 0:
        raise ValueError("bound must be positive")
    nbits = bound.bit_length()
    nchunks = (nbits + 31) // 32
    while True:
        value = 0
        for chunk in rng.integers(0, 1 << 32, size=nchunks, dtype=np.uint64):
            value = (value << 32) | int(chunk)
        value &= (1 << nbits) - 1
        if value < bound:
            return value


def sample_partition_uniform(n: int, rng: np.random.Generator) -> Partition:
    """Uniform random set partition of n objects (urn method).

    The number of urns is drawn from the Poisson-like weights u^n / u!
    (evaluated in log space, truncated far below the peak), each object is
    assigned to an urn uniformly, and empty urns are discarded; every
    partition then has probability 1/Bell(n).
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    log_w = []
    peak = -np.inf
    u = 1
    while True:
        lw = n * math.log(u) - math.lgamma(u + 1)
        log_w.append(lw)
        if lw > peak:
            peak = lw
        elif lw < peak - 45.0:
            break
        u += 1
    weights = np.exp(np.array(log_w) - peak)
    cdf = np.cumsum(weights / weights.sum())
    urns = int(np.searchsorted(cdf, rng.random(), side="right")) + 1
    return Partition(rng.integers(0, urns, size=n))


def _completion_counts(n: int, k: int) -> list[list[int]]:
    """count[i][j] = label sequences for i remaining objects given j open
    clusters so far, ending with exactly k (exact big integers)."""
    count = [[0] * (k + 2) for _ in range(n + 1)]
    count[0][k] = 1
    for i in range(1, n + 1):
        for j in range(k, -1, -1):
            total = j * count[i - 1][j]
            if j < k:
                total += count[i - 1][j + 1]
            count[i][j] = total
    return count


def sample_partition_fixed_k(n: int, k: int, rng: np.random.Generator) -> Partition:
    """Uniform random partition of n objects into exactly k nonempty clusters.

    Objects are labelled in order through the restricted-growth construction;
    a single exact-integer draw per object picks between joining an open
    cluster (and which one) and opening a new one, weighting each option by
    its count of completions, so every such partition has probability
    1/S(n, k).
    """
    if n < 1 or not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    count = _completion_counts(n, k)
    labels = np.empty(n, dtype=np.int64)
    opened = 0
    for i in range(n):
        remaining = n - i - 1
        draw = _randbelow(rng, count[remaining + 1][opened])
        join_total = opened * count[remaining][opened]
        if draw < join_total:
            labels[i] = draw // count[remaining][opened]
        else:
            labels[i] = opened
            opened += 1
    return Partition(labels)

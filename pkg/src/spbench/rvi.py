"""Seven relative validity indices over precomputed dissimilarities.

All indices take a distance matrix and a partition; the prototype-based
ones (chi, dbi, pbm) additionally take medoid prototypes.  A value of
``None`` means the index is undefined for that input (division by zero or
no valid pairs); undefined is deliberately distinct from any numeric score.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .distances import DistanceMatrix
from .partitions import Partition, grand_medoid
from .partitions import medoids as cluster_medoids

RVI_NAMES = ("swc", "dunn", "c_index", "aucc", "chi", "dbi", "pbm")
RVI_DIRECTIONS = {
    "swc": "max",
    "dunn": "max",
    "c_index": "min",
    "aucc": "max",
    "chi": "max",
    "dbi": "min",
    "pbm": "max",
}
PROTOTYPE_RVIS = ("chi", "dbi", "pbm")


@dataclass(frozen=True)
class Prototypes:
    """Per-cluster medoids plus the grand medoid of the whole dataset."""

    per_cluster: np.ndarray
    grand: int


def prototypes(D: DistanceMatrix, P: Partition, tie_mode: str = "lowest_index",
               rng: np.random.Generator | None = None) -> Prototypes:
    return Prototypes(cluster_medoids(D, P, tie_mode, rng),
                      grand_medoid(D, tie_mode, rng))


@dataclass(frozen=True)
class PairCache:
    """Reusable per-matrix quantities for the pair-counting indices."""

    iu: np.ndarray
    ju: np.ndarray
    condensed: np.ndarray
    ranks: np.ndarray
    sorted_values: np.ndarray
    prefix: np.ndarray


def pair_cache(D: DistanceMatrix) -> PairCache:
    iu, ju = np.triu_indices(D.n, k=1)
    condensed = D.values[iu, ju]
    ranks = rankdata(condensed, method="average")
    sorted_values = np.sort(condensed)
    prefix = np.concatenate([[0.0], np.cumsum(sorted_values)])
    return PairCache(iu, ju, condensed, ranks, sorted_values, prefix)


def _check(D: DistanceMatrix, P: Partition) -> None:
    if D.n != P.n:
        raise ValueError(f"matrix is {D.n}x{D.n} but partition has {P.n} objects")


def swc(D: DistanceMatrix, P: Partition) -> float | None:
    """Mean silhouette width: (b - a) / max(a, b) per object.

    a is the mean distance to the object's own cluster (excluding itself),
    b the smallest mean distance to another cluster.  Singletons score 0,
    as do objects coincident with their nearest foreign cluster (a = b = 0).
    """
    _check(D, P)
    if P.k < 2:
        return None
    d, labels, n, k = D.values, P.labels, P.n, P.k
    sizes = P.sizes
    sums = np.empty((n, k))
    for c in range(k):
        sums[:, c] = d[:, labels == c].sum(axis=1)
    rows = np.arange(n)
    own_size = sizes[labels]
    a = sums[rows, labels] / np.maximum(own_size - 1, 1)
    others = sums / sizes[None, :]
    others[rows, labels] = np.inf
    b = others.min(axis=1)
    denom = np.maximum(a, b)
    widths = np.where((own_size == 1) | (denom == 0.0), 0.0,
                      (b - a) / np.where(denom == 0.0, 1.0, denom))
    return float(widths.mean())


def dunn(D: DistanceMatrix, P: Partition) -> float | None:
    """Smallest between-cluster set distance over largest cluster diameter."""
    _check(D, P)
    if P.k < 2:
        return None
    members = [P.members(c) for c in range(P.k)]
    diameter = 0.0
    for idx in members:
        if idx.size > 1:
            diameter = max(diameter, float(D.values[np.ix_(idx, idx)].max()))
    if diameter == 0.0:
        return None
    separation = np.inf
    for c1 in range(P.k):
        for c2 in range(c1 + 1, P.k):
            separation = min(separation, float(D.values[np.ix_(members[c1], members[c2])].min()))
    return separation / diameter


def c_index(D: DistanceMatrix, P: Partition, cache: PairCache | None = None) -> float | None:
    """(theta - min theta) / (max theta - min theta) over within-cluster pairs.

    theta is the sum of within-cluster pair distances; the extremes take the
    same number of pairs from the sorted ends of all pairwise distances.
    """
    _check(D, P)
    if P.k < 2:
        return None
    if cache is None:
        cache = pair_cache(D)
    within = P.labels[cache.iu] == P.labels[cache.ju]
    omega = int(within.sum())
    if omega == 0:
        return None
    theta = float(cache.condensed[within].sum())
    total = cache.condensed.size
    theta_min = float(cache.prefix[omega])
    theta_max = float(cache.prefix[total] - cache.prefix[total - omega])
    if theta_min == theta_max:
        return None
    # round-off in the two summation orders can push the ratio a few ulp
    # outside the mathematical range [0, 1]
    return min(1.0, max(0.0, (theta - theta_min) / (theta_max - theta_min)))


def aucc(D: DistanceMatrix, P: Partition, cache: PairCache | None = None) -> float | None:
    """Probability that a within-cluster pair is closer than a between pair.

    Equals the area under the ROC curve of "small distance predicts same
    cluster"; ties in distance count half.  Computed from the rank sum with
    average ranks.  The expected value for a random labelling is 0.5.
    """
    _check(D, P)
    if P.k < 2:
        return None
    if cache is None:
        cache = pair_cache(D)
    within = P.labels[cache.iu] == P.labels[cache.ju]
    n_within = int(within.sum())
    n_between = within.size - n_within
    if n_within == 0 or n_between == 0:
        return None
    rank_sum = float(cache.ranks[within].sum())
    # pairs where the between distance is below the within one, ties half
    between_below = rank_sum - n_within * (n_within + 1) / 2.0
    return 1.0 - between_below / (n_within * n_between)


def _within_deviation(d: np.ndarray, P: Partition, proto: Prototypes) -> float:
    total = 0.0
    for c in range(P.k):
        total += float(d[P.members(c), proto.per_cluster[c]].sum())
    return total


def chi(D: DistanceMatrix, P: Partition, proto: Prototypes) -> float | None:
    """(B / W) * ((n - k) / (k - 1)) with medoid prototypes and unit exponent.

    W sums distances to the cluster medoid, T sums distances to the grand
    medoid, and B = T - W.
    """
    _check(D, P)
    if P.k < 2:
        return None
    w = _within_deviation(D.values, P, proto)
    if w == 0.0:
        return None
    t = float(D.values[:, proto.grand].sum())
    return ((t - w) / w) * ((P.n - P.k) / (P.k - 1))


def dbi(D: DistanceMatrix, P: Partition, proto: Prototypes) -> float | None:
    """Mean over clusters of the worst (spread_j + spread_l) / d(medoid_j, medoid_l)."""
    _check(D, P)
    if P.k < 2:
        return None
    d = D.values
    spread = np.array([d[P.members(c), proto.per_cluster[c]].mean() for c in range(P.k)])
    gaps = d[np.ix_(proto.per_cluster, proto.per_cluster)].copy()
    off = ~np.eye(P.k, dtype=bool)
    if np.any(gaps[off] == 0.0):
        return None
    ratios = (spread[:, None] + spread[None, :]) / np.where(off, gaps, 1.0)
    ratios[~off] = -np.inf
    return float(ratios.max(axis=1).mean())


def pbm(D: DistanceMatrix, P: Partition, proto: Prototypes) -> float | None:
    """(1/k) * E1 * (largest medoid gap) / (within-cluster deviation).

    E1 is the deviation of the whole dataset from the grand medoid.  Unlike
    the other six indices this one scales linearly with the distances.
    """
    _check(D, P)
    if P.k < 2:
        return None
    e_k = _within_deviation(D.values, P, proto)
    if e_k == 0.0:
        return None
    e_1 = float(D.values[:, proto.grand].sum())
    gaps = D.values[np.ix_(proto.per_cluster, proto.per_cluster)]
    d_k = float(gaps.max())
    return (e_1 * d_k) / (P.k * e_k)


def rvi_value(name: str, D: DistanceMatrix, P: Partition,
              proto: Prototypes | None = None,
              cache: PairCache | None = None) -> float | None:
    """Uniform dispatch over the seven indices.

    Prototype-based indices compute lowest-index medoids when ``proto`` is
    omitted; the pair cache only affects speed, never values.
    """
    if name in ("swc", "dunn"):
        return swc(D, P) if name == "swc" else dunn(D, P)
    if name == "c_index":
        return c_index(D, P, cache)
    if name == "aucc":
        return aucc(D, P, cache)
    if name in PROTOTYPE_RVIS:
        if proto is None:
            proto = prototypes(D, P)
        if name == "chi":
            return chi(D, P, proto)
        if name == "dbi":
            return dbi(D, P, proto)
        return pbm(D, P, proto)
    raise ValueError(f"unknown index: {name!r}")

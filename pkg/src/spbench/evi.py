"""External validity: adjusted Rand index and adjusted mutual information."""
from __future__ import annotations

import math

import numpy as np

from .dataset import LabelSet
from .partitions import Partition

EVI_NAMES = ("ari", "ami")


def _contingency(a: Partition, b: Partition) -> np.ndarray:
    if a.n != b.n:
        raise ValueError(f"partitions cover {a.n} and {b.n} objects")
    return np.bincount(a.labels * b.k + b.labels,
                       minlength=a.k * b.k).reshape(a.k, b.k)


def _pairs(x: np.ndarray) -> float:
    return float((x.astype(np.float64) * (x - 1.0) / 2.0).sum())


def ari(a: Partition, b: Partition) -> float:
    """Adjusted Rand index: pair-counting agreement, 0 expected by chance.

    Identical partitions score exactly 1; the degenerate case of zero
    adjusted denominator with non-identical partitions scores 0.
    """
    if a.n == b.n and np.array_equal(a.labels, b.labels):
        return 1.0
    table = _contingency(a, b)
    index = _pairs(table)
    pairs_a = _pairs(table.sum(axis=1))
    pairs_b = _pairs(table.sum(axis=0))
    total = a.n * (a.n - 1) / 2.0
    expected = pairs_a * pairs_b / total
    denom = (pairs_a + pairs_b) / 2.0 - expected
    if denom == 0.0:
        return 0.0
    return (index - expected) / denom


def _entropy(counts: np.ndarray, n: int) -> float:
    w = counts[counts > 0] / n
    return float(-(w * np.log(w)).sum())


def _mutual_information(table: np.ndarray, n: int) -> float:
    rows = table.sum(axis=1, keepdims=True)
    cols = table.sum(axis=0, keepdims=True)
    mask = table > 0
    nij = table[mask].astype(np.float64)
    outer = (rows @ cols)[mask].astype(np.float64)
    return float((nij / n * np.log(n * nij / outer)).sum())


def _expected_mutual_information(row_sums, col_sums, n: int) -> float:
    lg = math.lgamma
    total = 0.0
    for ai in row_sums:
        ai = int(ai)
        for bj in col_sums:
            bj = int(bj)
            lo = max(1, ai + bj - n)
            hi = min(ai, bj)
            head = (lg(ai + 1) + lg(bj + 1) + lg(n - ai + 1) + lg(n - bj + 1)
                    - lg(n + 1))
            for nij in range(lo, hi + 1):
                log_p = head - (lg(nij + 1) + lg(ai - nij + 1) + lg(bj - nij + 1)
                                + lg(n - ai - bj + nij + 1))
                total += math.exp(log_p) * (nij / n) * math.log(n * nij / (ai * bj))
    return total


def ami(a: Partition, b: Partition) -> float:
    """Adjusted mutual information with the arithmetic-mean upper bound.

    (MI - E[MI]) / (mean(H(a), H(b)) - E[MI]) in natural logarithms, where
    E[MI] is the exact expectation under the permutation model.  Identical
    partitions score 1; a zero adjusted denominator otherwise scores 0.
    """
    if a.n == b.n and np.array_equal(a.labels, b.labels):
        return 1.0
    table = _contingency(a, b)
    n = a.n
    row_sums = table.sum(axis=1)
    col_sums = table.sum(axis=0)
    mi = _mutual_information(table, n)
    emi = _expected_mutual_information(row_sums, col_sums, n)
    denom = 0.5 * (_entropy(row_sums, n) + _entropy(col_sums, n)) - emi
    if abs(denom) < 1e-15:
        return 0.0
    return (mi - emi) / denom


def best_match(P: Partition, labels: LabelSet) -> tuple:
    """Best agreement against any of the ground-truth labellings.

    Each score is maximised independently, so the two maxima may come from
    different labellings.  Returns (None, None) when the set is empty.
    """
    if len(labels) == 0:
        return None, None
    references = [Partition(lab) for lab in labels.labellings]
    return (max(ari(P, ref) for ref in references),
            max(ami(P, ref) for ref in references))

"""Dissimilarity measures, pairwise matrix assembly, and PBM scaling transforms."""
from __future__ import annotations

import csv
import struct
from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy.spatial.distance import pdist, squareform

from .dataset import TIME_SERIES, DataMatrix

VECTOR_KINDS = ("euclidean", "manhattan", "chebyshev", "canberra", "braycurtis", "cosine")
ELASTIC_KINDS = ("dtw", "msm", "twed", "sbd")
MEASURE_KINDS = VECTOR_KINDS + ELASTIC_KINDS


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric non-negative dissimilarities with zero diagonal.

    The embodiment of one similarity paradigm applied to one dataset; the
    triangle inequality is not assumed (elastic measures may violate it).
    """

    values: np.ndarray
    paradigm_id: str = ""

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise ValueError(f"distance matrix must be square, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("distance matrix entries must be finite")
        if values.min() < 0:
            raise ValueError("distance matrix entries must be non-negative")
        if np.any(np.diag(values) != 0.0):
            raise ValueError("distance matrix diagonal must be exactly zero")
        if np.abs(values - values.T).max() > 1e-9:
            raise ValueError("distance matrix must be symmetric within 1e-9")
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class MeasureSpec:
    """A dissimilarity measure plus exactly the parameters it requires."""

    kind: str
    window_frac: float | None = None
    msm_cost: float | None = None
    twed_nu: float | None = None
    twed_lambda: float | None = None

    def __post_init__(self):
        if self.kind not in MEASURE_KINDS:
            raise ValueError(f"unknown measure kind: {self.kind!r}")
        needed = {
            "dtw": ("window_frac",),
            "msm": ("msm_cost",),
            "twed": ("twed_nu", "twed_lambda"),
        }.get(self.kind, ())
        for name in ("window_frac", "msm_cost", "twed_nu", "twed_lambda"):
            value = getattr(self, name)
            if name in needed and value is None:
                raise ValueError(f"{self.kind} requires parameter {name}")
            if name not in needed and value is not None:
                raise ValueError(f"{self.kind} does not take parameter {name}")
        if self.kind == "dtw" and not 0.0 <= self.window_frac <= 1.0:
            raise ValueError("window_frac must lie in [0, 1]")
        if self.kind == "msm" and self.msm_cost <= 0:
            raise ValueError("msm_cost must be positive")
        if self.kind == "twed" and (self.twed_nu < 0 or self.twed_lambda < 0):
            raise ValueError("twed parameters must be non-negative")

    @property
    def canonical_id(self) -> str:
        if self.kind == "dtw":
            return f"dtw(window_frac={self.window_frac:g})"
        if self.kind == "msm":
            return f"msm(c={self.msm_cost:g})"
        if self.kind == "twed":
            return f"twed(nu={self.twed_nu:g},lambda={self.twed_lambda:g})"
        return self.kind


def _as_series(x) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64).ravel()
    if arr.size == 0:
        raise ValueError("empty series")
    return arr


def _check_pair(x, y):
    x, y = _as_series(x), _as_series(y)
    if x.shape[0] != y.shape[0]:
        raise ValueError(f"length mismatch: {x.shape[0]} vs {y.shape[0]}")
    return x, y


def _cosine(x, y):
    nx = np.sqrt(np.dot(x, x))
    ny = np.sqrt(np.dot(y, y))
    if nx == 0.0 or ny == 0.0:
        # cosine is undefined for zero vectors; by convention equal inputs
        # are at distance 0 and a zero vector is at distance 1 from any other
        return 0.0 if np.array_equal(x, y) else 1.0
    return max(0.0, 1.0 - np.dot(x, y) / (nx * ny))


def _canberra(x, y):
    num = np.abs(x - y)
    den = np.abs(x) + np.abs(y)
    mask = den > 0
    return float(np.sum(num[mask] / den[mask]))


def _braycurtis(x, y):
    num = float(np.sum(np.abs(x - y)))
    den = float(np.sum(np.abs(x + y)))
    if den == 0.0:
        return 0.0 if num == 0.0 else 1.0
    return num / den


def vector_distance(x, y, kind: str) -> float:
    """One of the six vector measures between equal-length vectors.

    cosine distance is 1 - cosine similarity (range [0, 2]); canberra terms
    with zero numerator and denominator contribute 0.
    """
    x, y = _check_pair(x, y)
    if kind == "euclidean":
        return float(np.sqrt(np.sum((x - y) ** 2)))
    if kind == "manhattan":
        return float(np.sum(np.abs(x - y)))
    if kind == "chebyshev":
        return float(np.max(np.abs(x - y)))
    if kind == "canberra":
        return _canberra(x, y)
    if kind == "braycurtis":
        return _braycurtis(x, y)
    if kind == "cosine":
        return float(_cosine(x, y))
    raise ValueError(f"unknown vector measure: {kind!r}")


@njit(cache=True)
def _dtw_kernel(a, b, width):
    m = a.shape[0]
    dp = np.full((m + 1, m + 1), np.inf)
    dp[0, 0] = 0.0
    for i in range(1, m + 1):
        jlo = max(1, i - width)
        jhi = min(m, i + width)
        for j in range(jlo, jhi + 1):
            cost = (a[i - 1] - b[j - 1]) ** 2
            best = dp[i - 1, j - 1]
            if dp[i - 1, j] < best:
                best = dp[i - 1, j]
            if dp[i, j - 1] < best:
                best = dp[i, j - 1]
            dp[i, j] = cost + best
    return dp[m, m]


def dtw(a, b, window_frac: float) -> float:
    """Band-constrained dynamic time warping with squared pointwise costs.

    The Sakoe-Chiba half-width is max(1, ceil(window_frac*m)) cells either
    side of the diagonal; window_frac=0 degenerates to the diagonal itself,
    i.e. the sum of squared per-index differences.  No final square root.
    """
    a, b = _check_pair(a, b)
    if not 0.0 <= window_frac <= 1.0:
        raise ValueError("window_frac must lie in [0, 1]")
    m = a.shape[0]
    width = 0 if window_frac == 0.0 else max(1, int(np.ceil(window_frac * m)))
    return float(_dtw_kernel(a, b, width))


@njit(cache=True)
def _msm_move_cost(new, prev, other, c):
    if (prev <= new <= other) or (prev >= new >= other):
        return c
    d1 = abs(new - prev)
    d2 = abs(new - other)
    return c + (d1 if d1 < d2 else d2)


@njit(cache=True)
def _msm_kernel(a, b, c):
    m = a.shape[0]
    n = b.shape[0]
    dp = np.empty((m, n))
    dp[0, 0] = abs(a[0] - b[0])
    for i in range(1, m):
        dp[i, 0] = dp[i - 1, 0] + _msm_move_cost(a[i], a[i - 1], b[0], c)
    for j in range(1, n):
        dp[0, j] = dp[0, j - 1] + _msm_move_cost(b[j], a[0], b[j - 1], c)
    for i in range(1, m):
        for j in range(1, n):
            move = dp[i - 1, j - 1] + abs(a[i] - b[j])
            split = dp[i - 1, j] + _msm_move_cost(a[i], a[i - 1], b[j], c)
            merge = dp[i, j - 1] + _msm_move_cost(b[j], a[i], b[j - 1], c)
            best = move
            if split < best:
                best = split
            if merge < best:
                best = merge
            dp[i, j] = best
    return dp[m - 1, n - 1]


def msm(a, b, c: float) -> float:
    """Move-split-merge edit distance.

    Moves cost |x - y|; splits and merges cost c when the new point lies
    between its neighbours, otherwise c plus the distance to the nearer one.
    """
    a, b = _check_pair(a, b)
    if c <= 0:
        raise ValueError("split/merge cost must be positive")
    return float(_msm_kernel(a, b, float(c)))


@njit(cache=True)
def _twed_kernel(a, b, nu, lam):
    m = a.shape[0]
    n = b.shape[0]
    dp = np.empty((m + 1, n + 1))
    dp[0, 0] = 0.0
    for i in range(1, m + 1):
        prev = a[i - 2] if i > 1 else 0.0
        dp[i, 0] = dp[i - 1, 0] + abs(a[i - 1] - prev) + nu + lam
    for j in range(1, n + 1):
        prev = b[j - 2] if j > 1 else 0.0
        dp[0, j] = dp[0, j - 1] + abs(b[j - 1] - prev) + nu + lam
    for i in range(1, m + 1):
        ai = a[i - 1]
        aprev = a[i - 2] if i > 1 else 0.0
        for j in range(1, n + 1):
            bj = b[j - 1]
            bprev = b[j - 2] if j > 1 else 0.0
            match = dp[i - 1, j - 1] + abs(ai - bj) + abs(aprev - bprev) + 2.0 * nu * abs(i - j)
            del_a = dp[i - 1, j] + abs(ai - aprev) + nu + lam
            del_b = dp[i, j - 1] + abs(bj - bprev) + nu + lam
            best = match
            if del_a < best:
                best = del_a
            if del_b < best:
                best = del_b
            dp[i, j] = best
    return dp[m, n]


def twed(a, b, nu: float, lam: float) -> float:
    """Time-warp edit distance with unit time stamps 1..m.

    Pointwise costs are absolute differences; series are padded with a
    virtual zero-valued element at time 0 and border cells accumulate
    deletion costs.
    """
    a, b = _check_pair(a, b)
    if nu < 0 or lam < 0:
        raise ValueError("nu and lambda must be non-negative")
    return float(_twed_kernel(a, b, float(nu), float(lam)))


def sbd(a, b) -> float:
    """Shape-based distance: 1 - max coefficient-normalised cross-correlation.

    All 2m-1 zero-padded shifts are enumerated directly; the result lies in
    [0, 2].  All-zero inputs have no defined shape and are rejected.
    """
    a, b = _check_pair(a, b)
    na = np.sqrt(np.dot(a, a))
    nb = np.sqrt(np.dot(b, b))
    if na == 0.0 or nb == 0.0:
        raise ValueError("sbd is undefined for all-zero series")
    cc = np.correlate(a, b, mode="full")
    value = 1.0 - float(cc.max()) / (na * nb)
    return min(max(value, 0.0), 2.0)


def measure_distance(x, y, spec: MeasureSpec) -> float:
    """Scalar dissimilarity under an arbitrary MeasureSpec."""
    if spec.kind in VECTOR_KINDS:
        return vector_distance(x, y, spec.kind)
    if spec.kind == "dtw":
        return dtw(x, y, spec.window_frac)
    if spec.kind == "msm":
        return msm(x, y, spec.msm_cost)
    if spec.kind == "twed":
        return twed(x, y, spec.twed_nu, spec.twed_lambda)
    return sbd(x, y)


def _pairwise_blocked(x: np.ndarray, row_fn) -> np.ndarray:
    """Assemble a full matrix from a function of (row block, all rows)."""
    n = x.shape[0]
    out = np.zeros((n, n))
    step = max(1, min(n, 8_000_000 // max(1, n * x.shape[1])))
    for lo in range(0, n, step):
        hi = min(n, lo + step)
        out[lo:hi] = row_fn(x[lo:hi], x)
    return out


def _pairwise_vector(x: np.ndarray, kind: str) -> np.ndarray:
    if kind in ("euclidean", "manhattan", "chebyshev"):
        metric = {"euclidean": "euclidean", "manhattan": "cityblock",
                  "chebyshev": "chebyshev"}[kind]
        return squareform(pdist(x, metric))
    if kind == "canberra":
        def rows(block, full):
            num = np.abs(block[:, None, :] - full[None, :, :])
            den = np.abs(block[:, None, :]) + np.abs(full[None, :, :])
            terms = np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)
            return terms.sum(axis=2)
        return _pairwise_blocked(x, rows)
    if kind == "braycurtis":
        def rows(block, full):
            num = np.abs(block[:, None, :] - full[None, :, :]).sum(axis=2)
            den = np.abs(block[:, None, :] + full[None, :, :]).sum(axis=2)
            return np.where(den > 0, num / np.where(den > 0, den, 1.0),
                            np.where(num > 0, 1.0, 0.0))
        return _pairwise_blocked(x, rows)
    # cosine
    norms = np.sqrt((x ** 2).sum(axis=1))
    zero = norms == 0.0
    unit = x / np.where(zero, 1.0, norms)[:, None]
    d = 1.0 - unit @ unit.T
    if zero.any():
        d[zero, :] = 1.0
        d[:, zero] = 1.0
        d[np.ix_(zero, zero)] = 0.0
    return np.clip(d, 0.0, 2.0)


def pairwise(data: DataMatrix, spec: MeasureSpec, paradigm_id: str | None = None) -> DistanceMatrix:
    """Pairwise dissimilarity matrix for one similarity paradigm.

    Only the upper triangle is computed; the lower is mirrored, so symmetry
    holds bit-exactly.  Elastic measures require time-series data.
    """
    if spec.kind in ELASTIC_KINDS and data.kind != TIME_SERIES:
        raise ValueError(f"{spec.kind} requires time_series data")
    x = data.values
    n = data.n
    if spec.kind in VECTOR_KINDS:
        full = _pairwise_vector(x, spec.kind)
        upper = np.triu(full, 1)
    else:
        upper = np.zeros((n, n))
        for i in range(n):
            for j in range(i + 1, n):
                upper[i, j] = measure_distance(x[i], x[j], spec)
    values = upper + upper.T
    np.fill_diagonal(values, 0.0)
    values[values < 0] = 0.0
    return DistanceMatrix(values, paradigm_id or spec.canonical_id)


def scale_max(D: DistanceMatrix) -> DistanceMatrix:
    """Divide all entries by the maximum pairwise distance."""
    peak = D.values.max()
    if peak <= 0:
        raise ValueError("scale_max needs a positive maximum entry")
    return DistanceMatrix(D.values / peak, D.paradigm_id + "|scale_max")


def scale_global(D: DistanceMatrix, grand_medoid: int) -> DistanceMatrix:
    """Divide all entries by the sum of distances to the grand prototype."""
    divisor = float(D.values[:, grand_medoid].sum())
    if divisor <= 0:
        raise ValueError("scale_global needs a positive deviation sum")
    return DistanceMatrix(D.values / divisor, D.paradigm_id + "|scale_global")


def write_matrix_binary(path, D: DistanceMatrix) -> None:
    """Dense binary layout: 8-byte little-endian n, then n*n row-major f64."""
    with open(path, "wb") as fh:
        fh.write(struct.pack("<Q", D.n))
        fh.write(np.ascontiguousarray(D.values, dtype="<f8").tobytes())


def read_matrix_binary(path, paradigm_id: str = "") -> DistanceMatrix:
    with open(path, "rb") as fh:
        header = fh.read(8)
        if len(header) != 8:
            raise ValueError(f"{path}: truncated header")
        n = struct.unpack("<Q", header)[0]
        payload = fh.read()
    values = np.frombuffer(payload, dtype="<f8")
    if values.size != n * n:
        raise ValueError(f"{path}: expected {n * n} values, found {values.size}")
    return DistanceMatrix(values.reshape(n, n).astype(np.float64), paradigm_id)


def write_matrix_csv(path, D: DistanceMatrix) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        for row in D.values:
            writer.writerow([repr(float(v)) for v in row])


def read_matrix_csv(path, paradigm_id: str = "") -> DistanceMatrix:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = [[float(tok) for tok in row] for row in csv.reader(fh) if row]
    return DistanceMatrix(np.array(rows, dtype=np.float64), paradigm_id)

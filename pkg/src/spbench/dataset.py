"""Dataset loading, synthetic generation, normalisation and label degradation."""
from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass

import numpy as np

FEATURE_VECTORS = "feature_vectors"
TIME_SERIES = "time_series"

LOAD_FORMATS = ("ucr_tsv", "csv_with_labels", "matrix_plus_labelfile")
NORM_PROCEDURES = ("z_norm", "min_max", "unit_norm_p")
NORM_AXES = ("per_feature", "per_object")
BALANCE_MODES = ("balanced", "small_cluster_10pct", "dominant_cluster")
DEGRADE_MODES = ("shuffle", "replace")


class ParseError(ValueError):
    """A file that cannot be parsed, with the offending location attached.

    ``reason`` is a stable token (empty_file, ragged_row, non_numeric,
    bad_label, missing_label_column, label_length_mismatch) so callers can
    distinguish failure modes; the message names the path, line and column.
    """

    def __init__(self, path, reason: str, line: int | None = None,
                 column: int | None = None, detail: str = ""):
        self.path = str(path)
        self.reason = reason
        self.line = line
        self.column = column
        loc = self.path
        if line is not None:
            loc += f", line {line}"
        if column is not None:
            loc += f", column {column}"
        msg = f"{loc}: {reason}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


@dataclass(frozen=True)
class DataMatrix:
    """n objects by d values; rows are feature vectors or equal-length series."""

    values: np.ndarray
    kind: str = FEATURE_VECTORS

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ValueError("values must be a 2-d array")
        n, d = values.shape
        if n < 2 or d < 1:
            raise ValueError(f"need n >= 2 objects and d >= 1 values, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("values must all be finite")
        if self.kind not in (FEATURE_VECTORS, TIME_SERIES):
            raise ValueError(f"unknown data kind: {self.kind!r}")
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class LabelSet:
    """Zero or more ground-truth labellings of the same n objects.

    Each labelling uses contiguous labels 0..k*-1 with every label occupied.
    """

    labellings: tuple

    def __post_init__(self):
        cleaned = []
        for idx, lab in enumerate(self.labellings):
            arr = np.asarray(lab, dtype=np.int64)
            if arr.ndim != 1:
                raise ValueError(f"labelling {idx} must be a 1-d integer vector")
            _check_contiguous(arr, what=f"labelling {idx}")
            cleaned.append(arr)
        if cleaned and any(a.shape[0] != cleaned[0].shape[0] for a in cleaned):
            raise ValueError("labellings must all have the same length")
        object.__setattr__(self, "labellings", tuple(cleaned))

    @property
    def cluster_counts(self) -> tuple:
        return tuple(int(lab.max()) + 1 for lab in self.labellings)

    def __len__(self) -> int:
        return len(self.labellings)


@dataclass(frozen=True)
class VendraminConfig:
    """Synthetic battery entry: well-separated truncated Gaussian clusters."""

    n_objects: int
    dims: int
    k_star: int
    balance: str
    seed: int

    def __post_init__(self):
        if self.n_objects < 2 or self.dims < 1:
            raise ValueError("need n_objects >= 2 and dims >= 1")
        if not 1 <= self.k_star <= self.n_objects:
            raise ValueError(f"k_star {self.k_star} out of range for n={self.n_objects}")
        if self.balance not in BALANCE_MODES:
            raise ValueError(f"unknown balance mode: {self.balance!r}")
        if self.balance != "balanced" and self.k_star < 2:
            raise ValueError("unbalanced modes need k_star >= 2")


def _check_contiguous(labels: np.ndarray, what: str = "labels") -> None:
    uniq = np.unique(labels)
    k = uniq.shape[0]
    if uniq[0] != 0 or uniq[-1] != k - 1:
        raise ValueError(f"{what} must use contiguous labels 0..k-1, got {uniq.tolist()}")


def _remap_contiguous(raw) -> np.ndarray:
    """Map arbitrary label values to 0-based contiguous ints in sorted-value order."""
    raw = np.asarray(raw)
    _, remapped = np.unique(raw, return_inverse=True)
    return remapped.astype(np.int64)


def _parse_number(token: str, path, line: int, column: int) -> float:
    try:
        return float(token)
    except ValueError:
        raise ParseError(path, "non_numeric", line, column, f"cell {token!r}") from None


def _parse_label(token: str, path, line: int, column: int):
    try:
        value = float(token)
    except ValueError:
        raise ParseError(path, "bad_label", line, column, f"label {token!r}") from None
    if value != int(value):
        raise ParseError(path, "bad_label", line, column, f"label {token!r} is not an integer")
    return int(value)


def _read_nonempty_lines(path):
    with open(path, "r", encoding="utf-8") as fh:
        lines = [(i + 1, ln.rstrip("\n").rstrip("\r")) for i, ln in enumerate(fh)]
    lines = [(no, ln) for no, ln in lines if ln.strip() != ""]
    if not lines:
        raise ParseError(path, "empty_file")
    return lines


def _load_ucr_tsv(path):
    rows, labels = [], []
    width = None
    for lineno, line in _read_nonempty_lines(path):
        fields = line.split("\t")
        if len(fields) < 2:
            raise ParseError(path, "ragged_row", lineno, detail="need a label plus at least one value")
        if width is None:
            width = len(fields)
        elif len(fields) != width:
            raise ParseError(path, "ragged_row", lineno,
                             detail=f"expected {width} fields, got {len(fields)}")
        labels.append(_parse_label(fields[0], path, lineno, 1))
        rows.append([_parse_number(tok, path, lineno, col + 2)
                     for col, tok in enumerate(fields[1:])])
    data = DataMatrix(np.array(rows, dtype=np.float64), kind=TIME_SERIES)
    return data, LabelSet((_remap_contiguous(labels),))


def _load_csv_with_labels(path):
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = list(csv.reader(fh))
    reader = [(i + 1, row) for i, row in enumerate(reader) if any(tok.strip() for tok in row)]
    if not reader:
        raise ParseError(path, "empty_file")
    header_no, header = reader[0]
    if not header or header[-1].strip().lower() != "label":
        raise ParseError(path, "missing_label_column", header_no,
                         detail="final header column must be named 'label'")
    width = len(header)
    rows, labels = [], []
    for lineno, row in reader[1:]:
        if len(row) != width:
            raise ParseError(path, "ragged_row", lineno,
                             detail=f"expected {width} fields, got {len(row)}")
        rows.append([_parse_number(tok, path, lineno, col + 1)
                     for col, tok in enumerate(row[:-1])])
        labels.append(_parse_label(row[-1], path, lineno, width))
    if not rows:
        raise ParseError(path, "empty_file", detail="header only")
    data = DataMatrix(np.array(rows, dtype=np.float64), kind=FEATURE_VECTORS)
    return data, LabelSet((_remap_contiguous(labels),))


def _load_matrix_plus_labelfile(path, label_paths):
    rows = []
    width = None
    for lineno, line in _read_nonempty_lines(path):
        fields = line.split()
        if width is None:
            width = len(fields)
        elif len(fields) != width:
            raise ParseError(path, "ragged_row", lineno,
                             detail=f"expected {width} fields, got {len(fields)}")
        rows.append([_parse_number(tok, path, lineno, col + 1)
                     for col, tok in enumerate(fields)])
    data = DataMatrix(np.array(rows, dtype=np.float64), kind=FEATURE_VECTORS)

    if label_paths is None:
        sibling = str(path) + ".labels"
        label_paths = [sibling] if os.path.exists(sibling) else []
    labellings = []
    for lpath in label_paths:
        labels = [_parse_label(line.strip(), lpath, lineno, 1)
                  for lineno, line in _read_nonempty_lines(lpath)]
        if len(labels) != data.n:
            raise ParseError(lpath, "label_length_mismatch",
                             detail=f"{len(labels)} labels for {data.n} objects")
        labellings.append(_remap_contiguous(labels))
    return data, LabelSet(tuple(labellings))


def load_matrix(path, format: str, label_paths=None):
    """Load a dataset file and its ground-truth labelling(s).

    Formats: ``ucr_tsv`` (tab-separated, first field an integer class label,
    one series per line), ``csv_with_labels`` (header row, final column named
    "label"), ``matrix_plus_labelfile`` (whitespace-delimited matrix; label
    files given via ``label_paths`` or found at ``<path>.labels``).  Labels are
    remapped to contiguous 0-based integers; row order is preserved.  Parse
    failures raise :class:`ParseError` naming the line and column.
    """
    if format not in LOAD_FORMATS:
        raise ValueError(f"unknown format: {format!r}")
    if format == "ucr_tsv":
        return _load_ucr_tsv(path)
    if format == "csv_with_labels":
        return _load_csv_with_labels(path)
    return _load_matrix_plus_labelfile(path, label_paths)


def normalise(data: DataMatrix, procedure: str, axis: str | None = None,
              p: float = 2.0) -> DataMatrix:
    """Normalise per feature (columns) or per object (rows).

    z_norm uses the population standard deviation; degenerate constant slices
    map to zeros under every procedure.  The per_feature axis is only valid
    for feature-vector data; time series normalise per object.
    """
    if procedure not in NORM_PROCEDURES:
        raise ValueError(f"unknown procedure: {procedure!r}")
    if axis is None:
        axis = "per_feature" if data.kind == FEATURE_VECTORS else "per_object"
    if axis not in NORM_AXES:
        raise ValueError(f"unknown axis: {axis!r}")
    if axis == "per_feature" and data.kind != FEATURE_VECTORS:
        raise ValueError("per_feature normalisation requires feature_vectors data")
    if procedure == "unit_norm_p" and p <= 0:
        raise ValueError("p must be positive")

    ax = 0 if axis == "per_feature" else 1
    x = data.values
    if procedure == "z_norm":
        mean = x.mean(axis=ax, keepdims=True)
        sd = x.std(axis=ax, keepdims=True)
        out = np.where(sd > 0, (x - mean) / np.where(sd > 0, sd, 1.0), 0.0)
    elif procedure == "min_max":
        lo = x.min(axis=ax, keepdims=True)
        span = x.max(axis=ax, keepdims=True) - lo
        out = np.where(span > 0, (x - lo) / np.where(span > 0, span, 1.0), 0.0)
    else:
        norm = np.sum(np.abs(x) ** p, axis=ax, keepdims=True) ** (1.0 / p)
        out = np.where(norm > 0, x / np.where(norm > 0, norm, 1.0), 0.0)
    return DataMatrix(out, kind=data.kind)


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def _cluster_sizes(n: int, k: int, balance: str):
    """Cluster sizes for the requested balance; always sum to n, all >= 1."""
    def spread(total, parts):
        base, rem = divmod(total, parts)
        return [base + 1 if i < rem else base for i in range(parts)]

    if balance == "balanced" or k == 1:
        sizes = spread(n, k)
    else:
        if balance == "small_cluster_10pct":
            special = _round_half_up(0.1 * n)
        else:
            share = 0.6 if k <= 6 else 0.2
            special = _round_half_up(share * n)
        special = min(max(special, 1), n - (k - 1))
        sizes = [special] + spread(n - special, k - 1)
    if min(sizes) < 1:
        raise ValueError(f"k={k} too large for n={n} under balance {balance!r}")
    return sizes


def _place_means(k: int, dims: int, min_sep: float, rng) -> np.ndarray:
    side = min_sep * (math.ceil(k ** (1.0 / dims)) + 1)
    while True:
        means = []
        failures = 0
        while len(means) < k and failures < 2000:
            cand = rng.uniform(0.0, side, size=dims)
            if all(np.linalg.norm(cand - m) >= min_sep for m in means):
                means.append(cand)
            else:
                failures += 1
        if len(means) == k:
            return np.array(means)
        side *= 1.5


def _truncated_normal(rng, shape, radius: float) -> np.ndarray:
    """Standard normal draws with each coordinate rejected beyond +/- radius."""
    out = rng.standard_normal(shape)
    bad = np.abs(out) > radius
    while bad.any():
        out[bad] = rng.standard_normal(int(bad.sum()))
        bad = np.abs(out) > radius
    return out


def generate_vendramin(config: VendraminConfig):
    """Generate well-separated compact Gaussian clusters, deterministically.

    Cluster means are placed uniformly in a hypercube with pairwise separation
    at least 6 (six standard deviations); samples use unit-variance diagonal
    covariance truncated per coordinate at 1.5 standard deviations.
    """
    rng = np.random.default_rng(config.seed)
    sizes = _cluster_sizes(config.n_objects, config.k_star, config.balance)
    means = _place_means(config.k_star, config.dims, 6.0, rng)
    blocks, labels = [], []
    for j, size in enumerate(sizes):
        noise = _truncated_normal(rng, (size, config.dims), 1.5)
        blocks.append(means[j] + noise)
        labels.extend([j] * size)
    data = DataMatrix(np.vstack(blocks), kind=FEATURE_VECTORS)
    return data, LabelSet((np.array(labels, dtype=np.int64),))


def degrade_labels(labels, fraction: float, mode: str, rng) -> np.ndarray:
    """Tamper with a labelling by shuffling or replacing a fraction of it.

    Selects exactly round-half-up(fraction*n) positions uniformly without
    replacement.  shuffle permutes the selected values among themselves (the
    label multiset, and therefore k*, is unchanged); replace draws uniform
    labels from 0..k*-1.
    """
    if not 0.0 <= fraction <= 1.0:
        raise ValueError("fraction must lie in [0, 1]")
    if mode not in DEGRADE_MODES:
        raise ValueError(f"unknown mode: {mode!r}")
    labels = np.asarray(labels, dtype=np.int64)
    _check_contiguous(labels)
    n = labels.shape[0]
    count = _round_half_up(fraction * n)
    out = labels.copy()
    if count == 0:
        return out
    positions = rng.choice(n, size=count, replace=False)
    if mode == "shuffle":
        out[positions] = out[positions][rng.permutation(count)]
    else:
        k_star = int(labels.max()) + 1
        out[positions] = rng.integers(0, k_star, size=count)
    return out

"""Evaluation schemes over paradigm-by-paradigm value tables.

A value table scores the partitions produced under each clustering paradigm
(rows) with an index computed under each evaluation paradigm (columns).
Three schemes reduce a row to one score: fixed (one designated column),
matching (the diagonal), and mean (row average over defined cells).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distances import DistanceMatrix
from .partitions import Partition
from .rvi import RVI_DIRECTIONS, PROTOTYPE_RVIS, pair_cache, prototypes, rvi_value

SCHEME_KINDS = ("fixed", "matching", "mean")
UNDEFINED = None


@dataclass(frozen=True)
class RviValueTable:
    """One index evaluated for every (clustering paradigm, evaluation paradigm)."""

    rvi: str
    clustering_ids: tuple
    eval_ids: tuple
    cells: tuple  # row-major tuple of tuples, entries float or None

    def __post_init__(self):
        if self.rvi not in RVI_DIRECTIONS:
            raise ValueError(f"unknown index: {self.rvi!r}")
        if len(self.cells) != len(self.clustering_ids):
            raise ValueError("one row per clustering paradigm required")
        for row in self.cells:
            if len(row) != len(self.eval_ids):
                raise ValueError("one cell per evaluation paradigm required")

    @property
    def direction(self) -> str:
        return RVI_DIRECTIONS[self.rvi]

    def value(self, r: int, c: int):
        return self.cells[r][c]

    def fixed_scores(self, c: int) -> tuple:
        """Scheme: score every row's partition under evaluation paradigm c."""
        return tuple(row[c] for row in self.cells)

    def matching_scores(self) -> tuple:
        """Scheme: score each row's partition under its own paradigm."""
        if self.clustering_ids != self.eval_ids:
            raise ValueError("matching scheme needs identical row and column paradigms")
        return tuple(self.cells[r][r] for r in range(len(self.cells)))

    def mean_scores(self) -> tuple:
        """Scheme: average each row over its defined cells.

        Returns (scores, partial_flags); a row with no defined cell scores
        None, a row with some undefined cells is flagged partial.
        """
        scores, partial = [], []
        for row in self.cells:
            defined = [v for v in row if v is not None]
            scores.append(sum(defined) / len(defined) if defined else None)
            partial.append(len(defined) != len(row))
        return tuple(scores), tuple(partial)


def build_table(partitions, matrices, rvi: str, tie_mode: str = "lowest_index",
                rng: np.random.Generator | None = None) -> RviValueTable:
    """Evaluate one index for all clustering-by-evaluation paradigm pairs.

    ``partitions`` maps paradigm id to the Partition produced under it;
    ``matrices`` maps paradigm id to the DistanceMatrix embodying it.  Rows
    and columns both follow the order of ``matrices``.
    """
    eval_ids = tuple(matrices)
    clustering_ids = tuple(partitions)
    rows = []
    for pid in clustering_ids:
        part = partitions[pid]
        if not isinstance(part, Partition):
            raise TypeError(f"partition for {pid!r} must be a Partition")
        row = []
        for eid in eval_ids:
            D = matrices[eid]
            if not isinstance(D, DistanceMatrix):
                raise TypeError(f"matrix for {eid!r} must be a DistanceMatrix")
            proto = prototypes(D, part, tie_mode, rng) if rvi in PROTOTYPE_RVIS else None
            cache = pair_cache(D) if rvi in ("c_index", "aucc") else None
            row.append(rvi_value(rvi, D, part, proto, cache))
        rows.append(tuple(row))
    return RviValueTable(rvi, clustering_ids, eval_ids, tuple(rows))


def _optimum_positions(values, direction: str):
    """Indices attaining the optimum among defined values (exact equality)."""
    defined = [(i, v) for i, v in enumerate(values) if v is not None]
    if not defined:
        return []
    pick = max if direction == "max" else min
    best = pick(v for _, v in defined)
    return [i for i, v in defined if v == best]


def owm_flags(table: RviValueTable) -> tuple:
    """Per row: does the own-paradigm value attain the row optimum?

    1 when the diagonal cell ties or beats every defined cell in its row,
    0 when some other paradigm's evaluation is strictly better, None when
    the diagonal cell itself is undefined.
    """
    if table.clustering_ids != table.eval_ids:
        raise ValueError("own-paradigm flags need identical row and column paradigms")
    flags = []
    for r, row in enumerate(table.cells):
        own = row[r]
        if own is None:
            flags.append(None)
            continue
        flags.append(1 if r in _optimum_positions(row, table.direction) else 0)
    return tuple(flags)


def co_flags(rvi_values, evi_values, direction: str):
    """Did selecting by the index succeed in external terms?

    1 when some candidate optimal under the index (among defined values,
    exact-equality ties kept) is also optimal under the external score;
    0 otherwise; None when no candidate has a defined index value.
    """
    if len(rvi_values) != len(evi_values):
        raise ValueError("candidate lists must have equal length")
    if direction not in ("max", "min"):
        raise ValueError(f"direction must be 'max' or 'min', got {direction!r}")
    if any(v is None for v in evi_values):
        raise ValueError("external scores must all be defined")
    chosen = _optimum_positions(rvi_values, direction)
    if not chosen:
        return None
    winners = _optimum_positions(evi_values, "max")
    return 1 if set(chosen) & set(winners) else 0


def pearson(rvi_values, evi_values, direction: str):
    """Correlation between index and external score over defined pairs.

    Values from a minimised index are negated first, so positive correlation
    always means the index orders candidates the way the external score
    does.  Undefined (None) when fewer than two defined pairs remain or
    either remaining vector is constant.
    """
    if len(rvi_values) != len(evi_values):
        raise ValueError("candidate lists must have equal length")
    if direction not in ("max", "min"):
        raise ValueError(f"direction must be 'max' or 'min', got {direction!r}")
    pairs = [(r, e) for r, e in zip(rvi_values, evi_values)
             if r is not None and e is not None]
    if len(pairs) < 2:
        return None
    x = np.array([r for r, _ in pairs], dtype=np.float64)
    y = np.array([e for _, e in pairs], dtype=np.float64)
    if direction == "min":
        x = -x
    if np.all(x == x[0]) or np.all(y == y[0]):
        return None
    return float(np.corrcoef(x, y)[0, 1])

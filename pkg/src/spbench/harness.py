"""Benchmark harness: config, battery runs, records, and downstream statistics.

A run crosses synthetic datasets with similarity paradigms, clustering
algorithms and candidate k values, producing one record per combination.
Records carry the external scores, every index under every evaluation
paradigm, the mean/matching scheme reductions, and own-paradigm-optimal
flags; aggregation helpers then compute the bias, success-rate, and
correlation summaries.
"""
from __future__ import annotations

import csv
import hashlib
import math
import os
import re
from dataclasses import dataclass, replace
from itertools import product

import numpy as np
from scipy.stats import norm, rankdata

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .dataset import (BALANCE_MODES, NORM_AXES, NORM_PROCEDURES, LabelSet,
                      VendraminConfig, degrade_labels, generate_vendramin,
                      normalise)
from .distances import (DistanceMatrix, MeasureSpec, pairwise, scale_global,
                        scale_max)
from .evi import best_match
from .partitions import (Partition, agglomerative_merges, cut_merges,
                         grand_medoid, kmedoids_pam, medoids,
                         sample_partition_fixed_k, sample_partition_uniform)
from .rvi import (PROTOTYPE_RVIS, RVI_DIRECTIONS, RVI_NAMES, Prototypes,
                  pair_cache, rvi_value)
from .schemes import co_flags, pearson

ALGORITHMS = ("single", "complete", "average", "weighted", "ward", "pam")
K_RULES = ("fixed_range", "window21", "window11")
TASKS = ("k_selection", "sp_selection")
NULL_MODES = ("uniform", "fixed_k")
_NORMS = NORM_PROCEDURES + ("none",)
_NORM_ABBREV = {"z_norm": "zn", "min_max": "mm", "unit_norm_p": "un", "none": "raw"}
_BALANCE_ABBREV = {"balanced": "bal", "small_cluster_10pct": "small",
                   "dominant_cluster": "dom"}
_ID_RE = re.compile(r"^[A-Za-z][A-Za-z0-9_]*$")


@dataclass(frozen=True)
class ParadigmSpec:
    """One similarity paradigm: normalisation plus dissimilarity measure."""

    id: str
    norm: str
    measure: MeasureSpec
    axis: str | None = None
    p: float = 2.0

    def __post_init__(self):
        if not _ID_RE.match(self.id):
            raise ValueError(f"paradigm id {self.id!r} must be a safe identifier")
        if self.norm not in _NORMS:
            raise ValueError(f"unknown normalisation: {self.norm!r}")
        if self.axis is not None and self.axis not in NORM_AXES:
            raise ValueError(f"unknown axis: {self.axis!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    seed: int
    n_datasets: int
    n_objects: int
    dims: tuple
    k_star: tuple
    balance: tuple
    paradigms: tuple
    algorithms: tuple
    k_rule: str
    k_min: int | None
    k_max: int | None
    rvis: tuple
    pam_n_init: int
    pam_max_iter: int
    medoid_tie_mode: str
    scaling_study: bool

    def __post_init__(self):
        if self.n_datasets < 1 or self.n_objects < 2:
            raise ValueError("need at least one dataset of at least two objects")
        if not self.dims or not self.k_star or not self.balance:
            raise ValueError("dims, k_star and balance must be non-empty")
        for b in self.balance:
            if b not in BALANCE_MODES:
                raise ValueError(f"unknown balance mode: {b!r}")
        ids = [p.id for p in self.paradigms]
        if not ids or len(set(ids)) != len(ids):
            raise ValueError("paradigm ids must be non-empty and unique")
        for algo in self.algorithms:
            if algo not in ALGORITHMS:
                raise ValueError(f"unknown algorithm: {algo!r}")
        if not self.algorithms:
            raise ValueError("at least one algorithm required")
        if self.k_rule not in K_RULES:
            raise ValueError(f"unknown k rule: {self.k_rule!r}")
        if self.k_rule == "fixed_range":
            if self.k_min is None or self.k_max is None:
                raise ValueError("fixed_range needs k_min and k_max")
            k_window((2,), "fixed_range", (self.k_min, self.k_max))
        elif self.k_min is not None or self.k_max is not None:
            raise ValueError(f"{self.k_rule} does not take k_min/k_max")
        for r in self.rvis:
            if r not in RVI_NAMES:
                raise ValueError(f"unknown index: {r!r}")
        if not self.rvis:
            raise ValueError("at least one index required")
        if self.pam_n_init < 1 or self.pam_max_iter < 1:
            raise ValueError("pam_n_init and pam_max_iter must be positive")
        if self.medoid_tie_mode not in ("lowest_index", "random"):
            raise ValueError(f"unknown medoid tie mode: {self.medoid_tie_mode!r}")

    @property
    def paradigm_ids(self) -> tuple:
        return tuple(p.id for p in self.paradigms)


def k_window(k_star_values, battery_rule: str, fixed_range=None) -> tuple:
    """Inclusive candidate-k range for a dataset.

    window21/window11 centre a 21- or 11-wide window on the midpoint of the
    ground-truth cluster counts, clamped to start no lower than 2 without
    shrinking.  fixed_range passes the supplied (lo, hi) through.
    """
    if battery_rule not in K_RULES:
        raise ValueError(f"unknown k rule: {battery_rule!r}")
    if battery_rule == "fixed_range":
        if fixed_range is None:
            raise ValueError("fixed_range rule needs an explicit (lo, hi)")
        lo, hi = int(fixed_range[0]), int(fixed_range[1])
        if lo < 2 or hi < lo:
            raise ValueError(f"need 2 <= lo <= hi, got ({lo}, {hi})")
        return lo, hi
    ks = [int(k) for k in k_star_values]
    if not ks or min(ks) < 1:
        raise ValueError("k_star_values must be positive and non-empty")
    mid = (min(ks) + max(ks) + 1) // 2
    half, floor_hi = (10, 22) if battery_rule == "window21" else (5, 12)
    return max(2, mid - half), max(floor_hi, mid + half)


def _derive_words(*parts) -> list:
    digest = hashlib.sha256("/".join(str(p) for p in parts).encode("utf-8")).digest()
    return [int.from_bytes(digest[i:i + 4], "little") for i in range(0, 16, 4)]


def derive_rng(seed: int, *parts) -> np.random.Generator:
    """Deterministic per-cell generator, independent of execution order."""
    return np.random.default_rng(np.random.SeedSequence([int(seed)] + _derive_words(*parts)))


def derive_seed(seed: int, *parts) -> int:
    return int.from_bytes(hashlib.sha256(
        "/".join([str(seed)] + [str(p) for p in parts]).encode("utf-8")).digest()[:8], "little")


def _paradigm_from_toml(entry: dict, index: int) -> ParadigmSpec:
    known = {"id", "norm", "axis", "p", "measure", "window_frac", "msm_cost",
             "twed_nu", "twed_lambda"}
    unknown = set(entry) - known
    if unknown:
        raise ValueError(f"paradigm {index}: unknown keys {sorted(unknown)}")
    if "measure" not in entry or "norm" not in entry:
        raise ValueError(f"paradigm {index}: 'norm' and 'measure' are required")
    params = {k: entry[k] for k in ("window_frac", "msm_cost", "twed_nu", "twed_lambda")
              if k in entry}
    measure = MeasureSpec(entry["measure"], **params)
    pid = entry.get("id") or f"{_NORM_ABBREV.get(entry['norm'], 'x')}_{measure.kind}"
    return ParadigmSpec(id=pid, norm=entry["norm"], measure=measure,
                        axis=entry.get("axis"), p=float(entry.get("p", 2.0)))


def load_config(path) -> ExperimentConfig:
    """Parse a TOML experiment file (see configs/mini.toml for the schema)."""
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    exp = raw.get("experiment", {})
    data = raw.get("data", {})
    clus = raw.get("clustering", {})
    ev = raw.get("evaluation", {})
    paradigms = tuple(_paradigm_from_toml(entry, i)
                      for i, entry in enumerate(raw.get("paradigm", [])))
    return ExperimentConfig(
        name=str(exp.get("name", "experiment")),
        seed=int(exp.get("seed", 0)),
        n_datasets=int(data.get("n_datasets", 1)),
        n_objects=int(data.get("n_objects", 100)),
        dims=tuple(int(d) for d in data.get("dims", [2])),
        k_star=tuple(int(k) for k in data.get("k_star", [2])),
        balance=tuple(data.get("balance", ["balanced"])),
        paradigms=paradigms,
        algorithms=tuple(clus.get("algorithms", list(ALGORITHMS))),
        k_rule=str(clus.get("k_rule", "fixed_range")),
        k_min=int(clus["k_min"]) if "k_min" in clus else None,
        k_max=int(clus["k_max"]) if "k_max" in clus else None,
        rvis=tuple(ev.get("rvis", list(RVI_NAMES))),
        pam_n_init=int(clus.get("pam_n_init", 30)),
        pam_max_iter=int(clus.get("pam_max_iter", 100)),
        medoid_tie_mode=str(ev.get("medoid_tie_mode", "random")),
        scaling_study=bool(ev.get("scaling_study", False)),
    )


def dataset_specs(config: ExperimentConfig) -> list:
    """The battery's dataset list: shape combinations cycled in order."""
    combos = list(product(config.dims, config.k_star, config.balance))
    out = []
    for i in range(config.n_datasets):
        dims, k_star, balance = combos[i % len(combos)]
        dataset_id = f"ds{i:02d}_p{dims}k{k_star}{_BALANCE_ABBREV[balance]}"
        out.append((dataset_id, VendraminConfig(
            n_objects=config.n_objects, dims=dims, k_star=k_star,
            balance=balance, seed=derive_seed(config.seed, "dataset", i))))
    return out


def record_columns(config: ExperimentConfig) -> list:
    cols = ["dataset", "paradigm", "algorithm", "k", "ari", "ami"]
    for rvi in config.rvis:
        cols.extend(f"{rvi}_{pid}" for pid in config.paradigm_ids)
        cols.extend([f"{rvi}_mean", f"{rvi}_match", f"owm_{rvi}"])
    cols.append("excluded_reason")
    return cols


SCALING_COLUMNS = ["dataset", "paradigm", "algorithm", "k", "pbm_match",
                   "pbm_match_scale_max", "pbm_match_scale_global",
                   "pbm_ratio_unscaled"]


def _pbm_ratio(D: DistanceMatrix, P: Partition, proto: Prototypes):
    """Largest medoid gap over k times within-cluster deviation, unscaled.

    The prototype-deviation ratio that global scaling reduces the full index
    to; computed directly from the given matrix."""
    e_k = 0.0
    for c in range(P.k):
        e_k += float(D.values[P.members(c), proto.per_cluster[c]].sum())
    if e_k == 0.0:
        return None
    gaps = D.values[np.ix_(proto.per_cluster, proto.per_cluster)]
    return float(gaps.max()) / (P.k * e_k)


def _optimum_attained(values, own_index: int, direction: str):
    own = values[own_index]
    if own is None:
        return None
    defined = [v for v in values if v is not None]
    best = max(defined) if direction == "max" else min(defined)
    return 1 if own == best else 0


def _dataset_records(config: ExperimentConfig, dataset_id: str,
                     vendramin: VendraminConfig) -> tuple:
    data, truth = generate_vendramin(vendramin)
    pids = config.paradigm_ids
    matrices, caches, grands = {}, {}, {}
    for spec in config.paradigms:
        arr = data if spec.norm == "none" else normalise(data, spec.norm, spec.axis, spec.p)
        D = pairwise(arr, spec.measure, spec.id)
        matrices[spec.id] = D
        caches[spec.id] = pair_cache(D)
        grands[spec.id] = grand_medoid(
            D, config.medoid_tie_mode,
            derive_rng(config.seed, dataset_id, spec.id, "grand"))
    k_lo, k_hi = k_window(truth.cluster_counts, config.k_rule,
                          (config.k_min, config.k_max))
    k_hi = min(k_hi, config.n_objects)

    scaled = {}
    if config.scaling_study and "pbm" in config.rvis:
        for pid in pids:
            scaled[pid] = (scale_max(matrices[pid]),
                           scale_global(matrices[pid], grands[pid]))

    records, scaling_rows = [], []
    needs_proto = any(r in PROTOTYPE_RVIS for r in config.rvis)
    for pid in pids:
        D_own = matrices[pid]
        for algo in config.algorithms:
            if algo == "pam":
                parts = {k: kmedoids_pam(D_own, k, config.pam_n_init, config.pam_max_iter,
                                         derive_rng(config.seed, dataset_id, pid, "pam", k))
                         for k in range(k_lo, k_hi + 1)}
            else:
                merges = agglomerative_merges(D_own, algo)
                parts = {k: cut_merges(merges, D_own.n, k)
                         for k in range(k_lo, k_hi + 1)}
            for k in range(k_lo, k_hi + 1):
                P = parts[k]
                rec = {"dataset": dataset_id, "paradigm": pid,
                       "algorithm": algo, "k": k, "excluded_reason": ""}
                try:
                    rec["ari"], rec["ami"] = best_match(P, truth)
                    protos = {}
                    if needs_proto:
                        for eid in pids:
                            rng = derive_rng(config.seed, dataset_id, pid, algo,
                                             k, eid, "proto")
                            protos[eid] = Prototypes(
                                medoids(matrices[eid], P, config.medoid_tie_mode, rng),
                                grands[eid])
                    for rvi in config.rvis:
                        row = [rvi_value(rvi, matrices[eid], P, protos.get(eid),
                                         caches[eid]) for eid in pids]
                        for eid, v in zip(pids, row):
                            rec[f"{rvi}_{eid}"] = v
                        defined = [v for v in row if v is not None]
                        rec[f"{rvi}_mean"] = sum(defined) / len(defined) if defined else None
                        own_index = pids.index(pid)
                        rec[f"{rvi}_match"] = row[own_index]
                        rec[f"owm_{rvi}"] = _optimum_attained(row, own_index,
                                                              RVI_DIRECTIONS[rvi])
                    if pid in scaled:
                        d_max, d_global = scaled[pid]
                        proto = protos[pid]
                        scaling_rows.append({
                            "dataset": dataset_id, "paradigm": pid,
                            "algorithm": algo, "k": k,
                            "pbm_match": rvi_value("pbm", D_own, P, proto),
                            "pbm_match_scale_max": rvi_value("pbm", d_max, P, proto),
                            "pbm_match_scale_global": rvi_value("pbm", d_global, P, proto),
                            "pbm_ratio_unscaled": _pbm_ratio(D_own, P, proto),
                        })
                except ValueError as exc:
                    rec = {"dataset": dataset_id, "paradigm": pid,
                           "algorithm": algo, "k": k,
                           "excluded_reason": str(exc) or "computation_failed"}
                records.append(rec)
    return records, scaling_rows


def _worker(payload):
    return _dataset_records(*payload)


def run_experiment(config: ExperimentConfig, out, threads: int = 1) -> dict:
    """Run the full battery and write records.csv (and the scaling study).

    Every random draw comes from a generator derived from the config seed
    and the cell's identifiers, and records are sorted before writing, so
    the output bytes do not depend on the thread count.  Returns summary
    counts: datasets, records, excluded.
    """
    os.makedirs(out, exist_ok=True)
    jobs = [(config, dataset_id, vcfg) for dataset_id, vcfg in dataset_specs(config)]
    if threads > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_worker, jobs))
    else:
        results = [_worker(job) for job in jobs]
    records = [rec for recs, _ in results for rec in recs]
    scaling_rows = [row for _, rows in results for row in rows]
    records.sort(key=lambda r: (r["dataset"], r["paradigm"], r["algorithm"], r["k"]))
    scaling_rows.sort(key=lambda r: (r["dataset"], r["paradigm"], r["algorithm"], r["k"]))
    write_records(os.path.join(out, "records.csv"), records, record_columns(config))
    if config.scaling_study and "pbm" in config.rvis:
        write_records(os.path.join(out, "pbm_scaling.csv"), scaling_rows,
                      SCALING_COLUMNS)
    return {"datasets": len(jobs), "records": len(records),
            "excluded": sum(1 for r in records if r.get("excluded_reason"))}


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def write_records(path, records, columns) -> None:
    """Undefined values become empty cells; floats keep full repr precision."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for rec in records:
            writer.writerow([_format_cell(rec.get(col)) for col in columns])


def read_records(path) -> list:
    """Inverse of write_records: typed dicts with None for empty cells."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ValueError(f"{path}: empty records file")
        out = []
        for row in reader:
            rec = {}
            for col, cell in row.items():
                if col in ("dataset", "paradigm", "algorithm", "excluded_reason"):
                    rec[col] = cell
                elif cell == "" or cell is None:
                    rec[col] = None
                elif col == "k" or col.startswith("owm_"):
                    rec[col] = int(cell)
                else:
                    rec[col] = float(cell)
            out.append(rec)
    return out


def _included(records) -> list:
    return [r for r in records if not r.get("excluded_reason")]


def _paradigms_in(records) -> list:
    return sorted({r["paradigm"] for r in records})


def _rvis_in(records) -> list:
    return [r for r in RVI_NAMES if any(f"owm_{r}" in rec for rec in records[:1])]


def aggregate_bias(records) -> list:
    """Mean own-paradigm-optimal rate per (dataset, paradigm, index).

    null_rate is the rate a direction-free index would attain by picking a
    single paradigm at random: one over the number of paradigms.
    """
    records = _included(records)
    if not records:
        return []
    paradigms = _paradigms_in(records)
    rvis = _rvis_in(records)
    null_rate = 1.0 / len(paradigms)
    groups = {}
    for rec in records:
        groups.setdefault((rec["dataset"], rec["paradigm"]), []).append(rec)
    out = []
    for (dataset, paradigm) in sorted(groups):
        for rvi in rvis:
            flags = [rec[f"owm_{rvi}"] for rec in groups[(dataset, paradigm)]
                     if rec.get(f"owm_{rvi}") is not None]
            out.append({"dataset": dataset, "paradigm": paradigm, "rvi": rvi,
                        "owm_rate": sum(flags) / len(flags) if flags else None,
                        "n": len(flags), "null_rate": null_rate})
    return out


def _scheme_columns(rvi: str, paradigms) -> list:
    cols = [(f"fixed_{pid}", f"{rvi}_{pid}") for pid in paradigms]
    cols.append(("mean", f"{rvi}_mean"))
    cols.append(("matching", f"{rvi}_match"))
    return cols


def _task_slices(records, task: str):
    """Candidate sets: vary k within (dataset, paradigm, algorithm) for the
    k-selection task; vary paradigm within (dataset, algorithm, k) for the
    paradigm-selection task."""
    if task not in TASKS:
        raise ValueError(f"unknown task: {task!r}")
    groups = {}
    for rec in records:
        if task == "k_selection":
            key = (rec["dataset"], rec["paradigm"], rec["algorithm"])
            axis = rec["k"]
        else:
            key = (rec["dataset"], rec["algorithm"], rec["k"])
            axis = rec["paradigm"]
        groups.setdefault(key, []).append((axis, rec))
    for key in sorted(groups):
        yield key, [rec for _, rec in sorted(groups[key], key=lambda t: t[0])]


def success_rates(records, task: str) -> list:
    """Fraction of candidate sets where the index's pick matches the best
    external score, per (index, scheme)."""
    records = _included(records)
    paradigms = _paradigms_in(records)
    rvis = _rvis_in(records)
    tallies = {}
    for _, recs in _task_slices(records, task):
        if len(recs) < 2:
            continue
        aris = [rec["ari"] for rec in recs]
        if any(a is None for a in aris):
            continue
        for rvi in rvis:
            for scheme, col in _scheme_columns(rvi, paradigms):
                flag = co_flags([rec.get(col) for rec in recs], aris,
                                RVI_DIRECTIONS[rvi])
                total, hits, defined = tallies.setdefault((rvi, scheme), [0, 0, 0])
                tallies[(rvi, scheme)] = [total + 1, hits + (flag or 0),
                                          defined + (flag is not None)]
    out = []
    for rvi in rvis:
        for scheme, _ in _scheme_columns(rvi, paradigms):
            total, hits, defined = tallies.get((rvi, scheme), [0, 0, 0])
            out.append({"task": task, "rvi": rvi, "scheme": scheme,
                        "success_rate": hits / defined if defined else None,
                        "n_defined": defined, "n_slices": total})
    return out


def median_correlations(records, task: str) -> list:
    """Median over datasets of the median per-slice index-to-ARI correlation.

    Undefined correlations (too few defined pairs, constant vectors) are
    dropped before either median; minimised indices are sign-flipped so
    positive always means agreement.
    """
    records = _included(records)
    paradigms = _paradigms_in(records)
    rvis = _rvis_in(records)
    per_dataset = {}
    for key, recs in _task_slices(records, task):
        if len(recs) < 2:
            continue
        dataset = key[0]
        aris = [rec["ari"] for rec in recs]
        if any(a is None for a in aris):
            continue
        for rvi in rvis:
            for scheme, col in _scheme_columns(rvi, paradigms):
                r = pearson([rec.get(col) for rec in recs], aris,
                            RVI_DIRECTIONS[rvi])
                if r is not None:
                    per_dataset.setdefault((rvi, scheme), {}).setdefault(
                        dataset, []).append(r)
    out = []
    for rvi in rvis:
        for scheme, _ in _scheme_columns(rvi, paradigms):
            by_ds = per_dataset.get((rvi, scheme), {})
            medians = [float(np.median(v)) for _, v in sorted(by_ds.items())]
            out.append({"task": task, "rvi": rvi, "scheme": scheme,
                        "median_corr": float(np.median(medians)) if medians else None,
                        "n_datasets": len(medians)})
    return out


def threshold_datasets(records, evi_min: float) -> list:
    """Datasets on which some run strictly beats the external threshold."""
    best = {}
    for rec in _included(records):
        if rec.get("ari") is None:
            continue
        ds = rec["dataset"]
        if ds not in best or rec["ari"] > best[ds]:
            best[ds] = rec["ari"]
    return sorted(ds for ds, ari in best.items() if ari > evi_min)


def wilcoxon_signed_rank(sample, mu0: float = 0.0, alternative: str = "greater") -> float:
    """One-sample Wilcoxon signed-rank p-value against location mu0.

    Differences of exactly zero are dropped; tied magnitudes get average
    ranks.  Up to 20 non-zero differences the null distribution of the
    positive-rank sum is enumerated exactly (ties included); beyond that a
    normal approximation with tie correction and 0.5 continuity correction
    is used.
    """
    if alternative not in ("greater", "less", "two_sided"):
        raise ValueError(f"unknown alternative: {alternative!r}")
    diffs = np.asarray(sample, dtype=np.float64) - mu0
    if diffs.size and not np.all(np.isfinite(diffs)):
        raise ValueError("sample must be finite")
    diffs = diffs[diffs != 0.0]
    m = diffs.size
    if m == 0:
        raise ValueError("all differences are zero")
    ranks = rankdata(np.abs(diffs), method="average")
    double_ranks = np.rint(ranks * 2.0).astype(np.int64)
    w_plus_double = int(double_ranks[diffs > 0].sum())
    if m <= 20:
        total = int(double_ranks.sum())
        counts = np.zeros(total + 1)
        counts[0] = 1.0
        for r in double_ranks:
            shifted = np.zeros_like(counts)
            shifted[r:] = counts[: counts.size - r]
            counts = counts + shifted
        denom = 2.0 ** m
        p_greater = float(counts[w_plus_double:].sum()) / denom
        p_less = float(counts[: w_plus_double + 1].sum()) / denom
    else:
        mean = m * (m + 1) / 4.0
        _, tie_counts = np.unique(double_ranks, return_counts=True)
        tie_term = float(((tie_counts ** 3 - tie_counts).sum())) / 48.0
        var = m * (m + 1) * (2 * m + 1) / 24.0 - tie_term
        sd = math.sqrt(var)
        w = w_plus_double / 2.0
        p_greater = float(norm.sf((w - mean - 0.5) / sd))
        p_less = float(norm.cdf((w - mean + 0.5) / sd))
    if alternative == "greater":
        return min(1.0, p_greater)
    if alternative == "less":
        return min(1.0, p_less)
    return min(1.0, 2.0 * min(p_greater, p_less))


@dataclass(frozen=True)
class NullDistribution:
    """Index values over random partitions of a fixed dataset."""

    rvi: str
    mode: str
    k: int | None
    values: np.ndarray
    n_undefined: int

    def mean(self):
        return float(self.values.mean()) if self.values.size else None

    def histogram_rows(self, bins: int = 30) -> list:
        rows = []
        if self.values.size:
            counts, edges = np.histogram(self.values, bins=bins)
            rows = [{"label": "bin", "lo": float(edges[i]), "hi": float(edges[i + 1]),
                     "count": int(c)} for i, c in enumerate(counts)]
        rows.append({"label": "undefined", "lo": None, "hi": None,
                     "count": self.n_undefined})
        return rows


def sample_null_distribution(D: DistanceMatrix, rvi: str, n_samples: int,
                             mode: str = "uniform", k: int | None = None,
                             rng: np.random.Generator | None = None) -> NullDistribution:
    """Null reference: the index on random partitions of the given matrix.

    uniform draws from all partitions of n objects; fixed_k draws uniformly
    from partitions into exactly k clusters.  Undefined index values are
    counted separately rather than dropped silently.
    """
    if rvi not in RVI_NAMES:
        raise ValueError(f"unknown index: {rvi!r}")
    if mode not in NULL_MODES:
        raise ValueError(f"unknown mode: {mode!r}")
    if mode == "fixed_k" and (k is None or not 1 <= k <= D.n):
        raise ValueError("fixed_k mode needs 1 <= k <= n")
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    if rng is None:
        rng = np.random.default_rng()
    cache = pair_cache(D) if rvi in ("c_index", "aucc") else None
    needs_proto = rvi in PROTOTYPE_RVIS
    grand = grand_medoid(D, "random", rng) if needs_proto else None
    values = []
    n_undefined = 0
    for _ in range(n_samples):
        if mode == "uniform":
            P = sample_partition_uniform(D.n, rng)
        else:
            P = sample_partition_fixed_k(D.n, k, rng)
        proto = Prototypes(medoids(D, P, "random", rng), grand) if needs_proto else None
        v = rvi_value(rvi, D, P, proto, cache)
        if v is None:
            n_undefined += 1
        else:
            values.append(v)
    return NullDistribution(rvi, mode, k if mode == "fixed_k" else None,
                            np.array(values, dtype=np.float64), n_undefined)


def write_null_csv(path, null: NullDistribution, bins: int = 30) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label", "lo", "hi", "count"])
        for row in null.histogram_rows(bins):
            writer.writerow([row["label"], _format_cell(row["lo"]),
                             _format_cell(row["hi"]), row["count"]])


DEGRADATION_COLUMNS = ["fraction", "mode", "repeat", "ari", "ami"]


def degradation_curve(labels, fractions, mode: str, n_repeats: int, seed: int) -> list:
    """External scores between a labelling and tampered copies of itself."""
    labels = np.asarray(labels, dtype=np.int64)
    truth = LabelSet((labels,))
    rows = []
    for fraction in fractions:
        for rep in range(n_repeats):
            rng = derive_rng(seed, "degrade", mode, repr(float(fraction)), rep)
            degraded = degrade_labels(labels, float(fraction), mode, rng)
            a, mi = best_match(Partition(degraded), truth)
            rows.append({"fraction": float(fraction), "mode": mode,
                         "repeat": rep, "ari": a, "ami": mi})
    return rows


def write_degradation_csv(path, rows) -> None:
    write_records(path, rows, DEGRADATION_COLUMNS)

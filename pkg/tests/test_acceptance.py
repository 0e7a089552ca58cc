"""Acceptance suite: one test per shipping criterion, run in order.

Each test owns a runtime budget asserted at the end (battery-backed tests
charge the shared fixture's wall time).  Criteria C07/C10/C11 consume the
session-scoped mini battery from conftest; C12 is the only test that needs
the optional figures package and is skipped cleanly when it is absent.
"""

from __future__ import annotations

import csv
import time
from contextlib import contextmanager

import numpy as np
import pytest
from scipy.stats import chisquare, ks_2samp

from helpers import (agglomerative_reference, ami_bruteforce, ari_bruteforce,
                     aucc_bruteforce, enumerate_set_partitions,
                     pam_exhaustive_cost, random_distance_matrix,
                     random_partition)
from spbench.dataset import VendraminConfig, generate_vendramin, normalise
from spbench.distances import (DistanceMatrix, MeasureSpec, pairwise,
                               scale_global)
from spbench.evi import ami, ari
from spbench.harness import (aggregate_bias, degradation_curve,
                             median_correlations, read_records,
                             sample_null_distribution, success_rates,
                             wilcoxon_signed_rank, write_degradation_csv,
                             write_null_csv, write_records)
from spbench.partitions import (LINKAGES, Partition, agglomerative,
                                agglomerative_merges, cut_merges,
                                kmedoids_pam, sample_partition_uniform)
from spbench.rvi import prototypes, rvi_value
from spbench.schemes import RviValueTable, co_flags, owm_flags, pearson


@contextmanager
def budget(label: str, seconds: float, preloaded: float = 0.0):
    """Assert the block (plus any pre-charged fixture time) meets its budget."""
    start = time.perf_counter()
    yield
    elapsed = preloaded + time.perf_counter() - start
    assert elapsed < seconds, f"{label}: {elapsed:.1f}s exceeds {seconds:.0f}s"
    print(f"ACCEPTANCE {label}: PASS ({elapsed:.1f}s < {seconds:.0f}s)")


def close(got, want, tol=1e-9):
    return got is not None and abs(got - want) <= tol * max(1.0, abs(want))


# ---------------------------------------------------------------------------
# C01: frozen cross-evaluation grid round-trip

# Four paradigms' partitions scored by one index under each paradigm
# (rows: clustering paradigm, columns: evaluation paradigm), plus the
# external scores of the four partitions.
GRID_IDS = ("ed", "dtw", "sbd", "msm")
GRID_CELLS = (
    (0.75, 0.53, 0.68, 0.48),
    (0.64, 0.61, 0.69, 0.47),
    (0.76, 0.62, 0.71, 0.51),
    (0.69, 0.65, 0.70, 0.53),
)
GRID_ARI = (0.82, 0.74, 0.85, 0.79)


def test_c01_grid_roundtrip():
    with budget("C01 grid round-trip", 1.0):
        grid = RviValueTable("swc", GRID_IDS, GRID_IDS, GRID_CELLS)
        means, partial = grid.mean_scores()
        assert partial == (False, False, False, False)
        for got, printed in zip(means, (0.61, 0.60, 0.65, 0.64)):
            assert abs(got - printed) <= 0.005  # printed at 2 decimals
        assert grid.matching_scores() == (0.75, 0.61, 0.71, 0.53)
        assert owm_flags(grid) == (1, 0, 0, 0)
        schemes = [grid.fixed_scores(c) for c in range(4)] + [means,
                                                              grid.matching_scores()]
        flags = tuple(co_flags(s, GRID_ARI, "max") for s in schemes)
        assert flags == (1, 0, 1, 0, 1, 0)


# ---------------------------------------------------------------------------
# C02: worked index values on a 5-point line

def line_matrix(points):
    pts = np.asarray(points, dtype=np.float64)
    return DistanceMatrix(np.abs(pts[:, None] - pts[None, :]))


def test_c02_worked_line_values():
    with budget("C02 worked line values", 1.0):
        D5 = line_matrix([0.0, 1.0, 2.0, 10.0, 11.0])
        P5 = Partition(np.array([0, 0, 0, 1, 1]))
        proto5 = prototypes(D5, P5)  # lowest-index ties
        assert close(rvi_value("chi", D5, P5, proto5), 17.0)
        assert close(rvi_value("dbi", D5, P5, proto5), 7.0 / 54.0)
        assert close(rvi_value("pbm", D5, P5, proto5), 30.0)
        assert close(rvi_value("dunn", D5, P5), 4.0)

        D4 = line_matrix([0.0, 1.0, 10.0, 11.0])
        P4 = Partition(np.array([0, 0, 1, 1]))
        assert close(rvi_value("dunn", D4, P4), 9.0)
        swc = rvi_value("swc", D4, P4)
        assert close(swc, 359.0 / 399.0)  # quoted as 0.899750 (5 decimals)
        assert round(swc, 5) == 0.89975
        assert close(rvi_value("c_index", D4, P4), 0.0)
        assert close(rvi_value("aucc", D4, P4), 1.0)


# ---------------------------------------------------------------------------
# C03: scale invariance of six indices; linear scaling of the seventh

def test_c03_scale_invariance():
    with budget("C03 scale invariance", 10.0):
        rng = np.random.default_rng(30303)
        names = ("swc", "dunn", "c_index", "aucc", "chi", "dbi", "pbm")
        for trial in range(200):
            n = int(rng.integers(4, 41))
            D = random_distance_matrix(rng, n)
            P = random_partition(rng, n)
            base = {name: rvi_value(name, D, P, prototypes(D, P))
                    for name in names}
            for c in (0.1, 3.0, 1000.0):
                Dc = DistanceMatrix(D.values * c, D.paradigm_id)
                protoc = prototypes(Dc, P)
                for name in names:
                    got = rvi_value(name, Dc, P, protoc)
                    want = base[name]
                    if name == "pbm" and want is not None:
                        want = want * c
                    if want is None:
                        assert got is None, (trial, name, c)
                    else:
                        assert close(got, want), (trial, name, c, got, want)


# ---------------------------------------------------------------------------
# C04: pair-counting index is centred on one half under a fixed-k null

def test_c04_aucc_null_expectation():
    with budget("C04 aucc null expectation", 30.0):
        rng = np.random.default_rng(20260814)
        D = random_distance_matrix(rng, 60)
        null = sample_null_distribution(D, "aucc", 2000, "fixed_k", k=3,
                                        rng=np.random.default_rng(4040))
        assert null.n_undefined == 0
        assert 0.48 <= null.mean() <= 0.52


# ---------------------------------------------------------------------------
# C05: every optimised routine agrees with its brute-force twin

def partition_cost(D, P):
    total = 0.0
    for j in range(P.k):
        idx = P.members(j)
        total += float(D.values[np.ix_(idx, idx)].sum(axis=0).min())
    return total


def test_c05_oracle_equivalence():
    with budget("C05 oracle equivalence", 60.0):
        rng = np.random.default_rng(50505)

        # pair-counting area vs the quadruple pair loop, up to n = 30
        for n in (8, 14, 21, 30):
            for _ in range(2):
                D = random_distance_matrix(rng, n)
                P = random_partition(rng, n)
                got = rvi_value("aucc", D, P)
                want = aucc_bruteforce(D, P)
                assert (got is None) == (want is None)
                if want is not None:
                    assert close(got, want)

        # external scores vs direct contingency / expected-information sums
        for _ in range(25):
            n = int(rng.integers(3, 13))
            a = random_partition(rng, n)
            b = random_partition(rng, n)
            assert close(ari(a, b), ari_bruteforce(a, b))
            assert close(ami(a, b), ami_bruteforce(a, b))

        # merge sequence vs the textbook O(n^3) reference, all linkages
        for _ in range(6):
            n = int(rng.integers(5, 9))
            D = random_distance_matrix(rng, n)
            for linkage in LINKAGES:
                expected = agglomerative_reference(D, linkage)
                merges = agglomerative_merges(D, linkage)
                for k in range(1, n + 1):
                    assert cut_merges(merges, n, k) == expected[k], (linkage, k)

        # restarted medoid search vs exhaustive medoid enumeration
        for trial in range(8):
            n = int(rng.integers(6, 11))
            k = int(rng.integers(2, 4))
            D = random_distance_matrix(rng, n)
            P = kmedoids_pam(D, k, n_init=20, rng=np.random.default_rng(trial))
            assert close(partition_cost(D, P), pam_exhaustive_cost(D, k))


# ---------------------------------------------------------------------------
# C06: the uniform partition sampler really is uniform

def test_c06_sampler_uniformity():
    with budget("C06 sampler uniformity", 10.0):
        rng = np.random.default_rng(60606)
        for n in (3, 4):
            outcomes = {labels: 0 for labels in enumerate_set_partitions(n)}
            assert len(outcomes) == {3: 5, 4: 15}[n]
            for _ in range(50_000):
                drawn = sample_partition_uniform(n, rng)
                outcomes[tuple(int(v) for v in drawn.labels)] += 1
            result = chisquare(list(outcomes.values()))
            assert result.pvalue > 0.01, (n, result.pvalue)


# ---------------------------------------------------------------------------
# C07: the mini battery reproduces the directional findings

def test_c07_battery_directional_findings(mini_battery):
    with budget("C07 battery directional findings", 900.0,
                preloaded=mini_battery.elapsed_single):
        records = mini_battery.records
        n_paradigms = len(mini_battery.config.paradigm_ids)

        # (a) own-paradigm-optimal rates sit above the no-bias level 1/6
        bias = aggregate_bias(records)
        for rvi in ("swc", "aucc", "dbi"):
            sample = [row["owm_rate"] for row in bias
                      if row["rvi"] == rvi and row["owm_rate"] is not None]
            assert len(sample) == 20 * n_paradigms
            assert np.mean(sample) > 1.0 / n_paradigms
            p = wilcoxon_signed_rank(sample, 1.0 / n_paradigms, "greater")
            assert p < 0.01, (rvi, p)

        # (b) the ratio index picks k far better than it picks a paradigm
        def rate(rows, rvi, scheme):
            hits = [r for r in rows if r["rvi"] == rvi and r["scheme"] == scheme]
            assert len(hits) == 1
            return hits[0]["success_rate"]

        k_rate = rate(success_rates(records, "k_selection"), "chi",
                      "fixed_zn_euclidean")
        sp_rate = rate(success_rates(records, "sp_selection"), "chi",
                       "fixed_zn_euclidean")
        print(f"chi success: k-selection {k_rate:.3f}, "
              f"sp-selection {sp_rate:.3f}")
        assert k_rate - sp_rate >= 0.2

        # (c) and its fixed-Euclidean scores track the external score
        corr_rows = [r for r in median_correlations(records, "k_selection")
                     if r["rvi"] == "chi" and r["scheme"] == "fixed_zn_euclidean"]
        assert len(corr_rows) == 1
        print(f"chi k-selection median correlation {corr_rows[0]['median_corr']:.3f}")
        assert corr_rows[0]["median_corr"] >= 0.6


# ---------------------------------------------------------------------------
# C08: null distributions are paradigm-specific

def test_c08_null_distribution_distinctness():
    with budget("C08 null distinctness", 120.0):
        data, _ = generate_vendramin(
            VendraminConfig(n_objects=60, dims=2, k_star=4,
                            balance="balanced", seed=808))
        euclid = pairwise(normalise(data, "z_norm"), MeasureSpec("euclidean"))
        canberra = pairwise(data, MeasureSpec("canberra"))
        nulls = [sample_null_distribution(D, "swc", 10_000, "uniform",
                                          rng=np.random.default_rng(9 + i))
                 for i, D in enumerate((euclid, canberra))]
        assert all(null.n_undefined == 0 for null in nulls)
        stat = ks_2samp(nulls[0].values, nulls[1].values).statistic
        print(f"swc null KS statistic {stat:.3f}")
        assert stat > 0.05


# ---------------------------------------------------------------------------
# C09: tampering with labels degrades the external score monotonically

def test_c09_degradation_curve():
    with budget("C09 degradation curve", 60.0):
        labels = np.repeat(np.arange(4), 50)
        fractions = (0.0, 0.25, 0.5, 0.75, 1.0)
        rows = degradation_curve(labels, fractions, "replace",
                                 n_repeats=200, seed=90909)
        by_fraction = {f: [r["ari"] for r in rows if r["fraction"] == f]
                       for f in fractions}
        assert all(v == 1.0 for v in by_fraction[0.0])
        means = [float(np.mean(by_fraction[f])) for f in fractions]
        assert abs(means[-1]) <= 0.02
        slack = 0.015  # Monte-Carlo noise allowance at 200 repeats
        for earlier, later in zip(means, means[1:]):
            assert later <= earlier + slack, means


# ---------------------------------------------------------------------------
# C10: global scaling reduces the prototype-deviation index to a pure ratio

def two_level_median(records, column_of,
                     slice_keys=("dataset", "paradigm", "algorithm")):
    """Per-slice correlation -> per-dataset median -> overall median."""
    slices = {}
    for rec in records:
        key = tuple(rec[field] for field in slice_keys)
        slices.setdefault(key, []).append(rec)
    per_dataset = {}
    for key, recs in slices.items():
        corr = pearson([column_of(r) for r in recs],
                       [r["ari"] for r in recs], "max")
        if corr is not None:
            per_dataset.setdefault(key[0], []).append(corr)
    medians = [float(np.median(v)) for v in per_dataset.values()]
    return float(np.median(medians)) if medians else None


def test_c10_pbm_scaling_experiment(mini_battery):
    with budget("C10 pbm scaling experiment", 300.0,
                preloaded=mini_battery.elapsed_single):
        scaling = read_records(mini_battery.dir_single / "pbm_scaling.csv")
        assert len(scaling) == mini_battery.counts["records"]

        # the pinned identity: globally scaled value == unscaled ratio
        for row in scaling:
            got, want = row["pbm_match_scale_global"], row["pbm_ratio_unscaled"]
            assert (got is None) == (want is None)
            if want is not None:
                assert close(got, want), row

        # independent dual route on fresh random instances
        rng = np.random.default_rng(101010)
        for _ in range(20):
            D = random_distance_matrix(rng, int(rng.integers(6, 25)))
            P = random_partition(rng, D.n)
            proto = prototypes(D, P)
            gaps = D.values[np.ix_(proto.per_cluster, proto.per_cluster)]
            within = sum(float(D.values[P.members(c), proto.per_cluster[c]].sum())
                         for c in range(P.k))
            scaled = rvi_value("pbm", scale_global(D, proto.grand), P, proto)
            assert close(scaled, float(gaps.max()) / (P.k * within))

        # report the matching-scheme medians under all three treatments
        ari_of = {(r["dataset"], r["paradigm"], r["algorithm"], r["k"]): r["ari"]
                  for r in mini_battery.records}
        joined = [dict(row, ari=ari_of[(row["dataset"], row["paradigm"],
                                        row["algorithm"], row["k"])])
                  for row in scaling]
        # per-matrix scaling is constant within a varying-k slice, so only
        # the varying-paradigm slices can separate the three treatments
        tasks = {"k": ("dataset", "paradigm", "algorithm"),
                 "sp": ("dataset", "algorithm", "k")}
        for column in ("pbm_match", "pbm_match_scale_max",
                       "pbm_match_scale_global"):
            for task, keys in tasks.items():
                median = two_level_median(joined, lambda r, c=column: r[c],
                                          slice_keys=keys)
                assert median is not None, (column, task)
                print(f"matching pbm median correlation "
                      f"[{column}, {task}-slices]: {median:.3f}")


# ---------------------------------------------------------------------------
# C11: identical seeds give byte-identical outputs at any thread count

def test_c11_determinism_across_threads(mini_battery):
    with budget("C11 determinism", 1800.0,
                preloaded=mini_battery.elapsed_single
                + mini_battery.elapsed_threaded):
        for name in ("records.csv", "pbm_scaling.csv"):
            single = (mini_battery.dir_single / name).read_bytes()
            threaded = (mini_battery.dir_threaded / name).read_bytes()
            assert single == threaded, name
        assert mini_battery.counts["excluded"] == 0


# ---------------------------------------------------------------------------
# C12: figure rendering smoke test (optional secondary package)

def test_c12_figure_smoke(mini_battery, tmp_path):
    figures = pytest.importorskip("spbench_figures")

    csv_dir = tmp_path / "csv"
    out_dir = tmp_path / "img"
    csv_dir.mkdir()
    out_dir.mkdir()

    records = mini_battery.records
    write_records(csv_dir / "bias.csv", aggregate_bias(records),
                  ["dataset", "paradigm", "rvi", "owm_rate", "n", "null_rate"])
    success = [row for task in ("k_selection", "sp_selection")
               for row in success_rates(records, task)]
    write_records(csv_dir / "success_rates.csv", success,
                  ["task", "rvi", "scheme", "success_rate", "n_defined",
                   "n_slices"])
    corr = [row for task in ("k_selection", "sp_selection")
            for row in median_correlations(records, task)]
    write_records(csv_dir / "median_correlations.csv", corr,
                  ["task", "rvi", "scheme", "median_corr", "n_datasets"])

    rng = np.random.default_rng(121212)
    null = sample_null_distribution(random_distance_matrix(rng, 20), "swc",
                                    300, "uniform", rng=rng)
    write_null_csv(csv_dir / "null_hist_swc.csv", null, bins=12)
    write_degradation_csv(
        csv_dir / "degradation.csv",
        degradation_curve(np.repeat(np.arange(3), 20), (0.0, 0.5, 1.0),
                          "replace", n_repeats=10, seed=33))

    inputs = {
        "bias_boxen": "bias.csv",
        "success_bars": "success_rates.csv",
        "null_hist": "null_hist_swc.csv",
        "degradation_curve": "degradation.csv",
        "correlation_table": "median_correlations.csv",
    }
    for kind, name in inputs.items():
        out = out_dir / f"{kind}.png"
        figures.render(figures.FigureSpec(kind=kind, csv_path=csv_dir / name,
                                          out_path=out))
        assert out.is_file() and out.stat().st_size > 0, kind

    # a schema break must be reported by column name
    with open(csv_dir / "success_rates.csv", newline="") as fh:
        table = list(csv.reader(fh))
    dropped = table[0].index("success_rate")
    broken = csv_dir / "broken.csv"
    with open(broken, "w", newline="") as fh:
        csv.writer(fh).writerows([row[:dropped] + row[dropped + 1:]
                                  for row in table])
    with pytest.raises(ValueError, match="success_rate"):
        figures.render(figures.FigureSpec(kind="success_bars", csv_path=broken,
                                          out_path=out_dir / "broken.png"))
    print("ACCEPTANCE C12 figure smoke: PASS")

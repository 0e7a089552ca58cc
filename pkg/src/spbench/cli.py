"""Command line front end.

Exit codes: 0 success, 2 usage errors (bad flags or values rejected by the
argument parser), 3 input/output failures (missing or unparseable files),
4 computation failures (domain errors on valid files).
"""
from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

import numpy as np

from . import __version__
from .dataset import (DEGRADE_MODES, LOAD_FORMATS, NORM_AXES, NORM_PROCEDURES,
                      ParseError, load_matrix, normalise)
from .distances import (MEASURE_KINDS, MeasureSpec, pairwise,
                        read_matrix_binary, read_matrix_csv,
                        write_matrix_binary, write_matrix_csv)
from .harness import (ALGORITHMS, NULL_MODES, TASKS, aggregate_bias,
                      degradation_curve, load_config, median_correlations,
                      read_records, run_experiment, sample_null_distribution,
                      success_rates, threshold_datasets, write_degradation_csv,
                      write_null_csv, write_records)
from .partitions import MEDOID_TIE_MODES, Partition, agglomerative, kmedoids_pam
from .rvi import PROTOTYPE_RVIS, RVI_NAMES, pair_cache, prototypes, rvi_value

EXIT_OK = 0
EXIT_IO = 3
EXIT_COMPUTE = 4


def _echo(message: str) -> None:
    print(f"spbench: {message}", file=sys.stderr)


def _read_matrix(path):
    try:
        if str(path).endswith(".bin"):
            return read_matrix_binary(path)
        return read_matrix_csv(path)
    except ValueError as exc:
        raise ParseError(path, "bad_matrix", detail=str(exc)) from exc


def _write_matrix(path, D) -> None:
    if str(path).endswith(".bin"):
        write_matrix_binary(path, D)
    else:
        write_matrix_csv(path, D)


def _read_labels(path) -> np.ndarray:
    labels = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            tok = line.strip()
            if not tok:
                continue
            try:
                labels.append(int(tok))
            except ValueError:
                raise ParseError(path, "bad_label", lineno, 1,
                                 f"label {tok!r}") from None
    if not labels:
        raise ParseError(path, "empty_file")
    return np.array(labels, dtype=np.int64)


def _write_labels(path, labels) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for value in labels:
            fh.write(f"{int(value)}\n")


def _measure_from_args(args) -> MeasureSpec:
    params = {}
    for flag, key in (("window_frac", "window_frac"), ("msm_cost", "msm_cost"),
                      ("twed_nu", "twed_nu"), ("twed_lambda", "twed_lambda")):
        value = getattr(args, flag)
        if value is not None:
            params[key] = value
    return MeasureSpec(args.measure, **params)


def _cmd_distances(args) -> int:
    data, _labels = load_matrix(args.data, args.format)
    if args.norm != "none":
        data = normalise(data, args.norm, args.axis, args.p)
    spec = _measure_from_args(args)
    _echo(f"distances: data={args.data} format={args.format} n={data.n} d={data.d} "
          f"norm={args.norm} measure={spec.canonical_id} out={args.out}")
    D = pairwise(data, spec, args.paradigm_id)
    _write_matrix(args.out, D)
    return EXIT_OK


def _cmd_cluster(args) -> int:
    D = _read_matrix(args.matrix)
    _echo(f"cluster: matrix={args.matrix} n={D.n} algorithm={args.algorithm} "
          f"k={args.k} seed={args.seed} out={args.out}")
    if args.algorithm == "pam":
        rng = np.random.default_rng(args.seed)
        part = kmedoids_pam(D, args.k, args.pam_n_init, args.pam_max_iter, rng)
    else:
        part = agglomerative(D, args.algorithm, args.k)
    _write_labels(args.out, part.labels)
    return EXIT_OK


def _cmd_evaluate(args) -> int:
    if (args.matrix is None) == (args.data is None):
        args.parser.error("evaluate needs exactly one of --matrix or --data")
    if args.matrix is not None:
        D = _read_matrix(args.matrix)
        source = args.matrix
    else:
        if args.measure is None:
            args.parser.error("--data requires --measure")
        data, _labels = load_matrix(args.data, args.format)
        if args.norm != "none":
            data = normalise(data, args.norm, args.axis, args.p)
        D = pairwise(data, _measure_from_args(args))
        source = args.data
    part = Partition(_read_labels(args.labels))
    if part.n != D.n:
        raise ValueError(f"{args.labels} has {part.n} labels for {D.n} objects")
    names = args.rvi or list(RVI_NAMES)
    _echo(f"evaluate: source={source} labels={args.labels} n={D.n} "
          f"k={part.k} rvis={','.join(names)} tie_mode={args.tie_mode} seed={args.seed}")
    cache = pair_cache(D)
    rng = np.random.default_rng(args.seed)
    proto = None
    if any(name in PROTOTYPE_RVIS for name in names):
        proto = prototypes(D, part, args.tie_mode,
                           rng if args.tie_mode == "random" else None)
    lines = []
    for name in names:
        value = rvi_value(name, D, part, proto, cache)
        lines.append((name, "" if value is None else repr(float(value))))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write("rvi,value\n")
            for name, text in lines:
                fh.write(f"{name},{text}\n")
    else:
        for name, text in lines:
            print(f"{name},{text if text else 'undefined'}")
    return EXIT_OK


def _cmd_run(args) -> int:
    config = load_config(args.config)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    threads = args.threads if args.threads is not None else (os.cpu_count() or 1)
    _echo(f"run: name={config.name} seed={config.seed} datasets={config.n_datasets} "
          f"n_objects={config.n_objects} paradigms={','.join(config.paradigm_ids)}")
    _echo(f"run: algorithms={','.join(config.algorithms)} k_rule={config.k_rule} "
          f"k_min={config.k_min} k_max={config.k_max} rvis={','.join(config.rvis)}")
    _echo(f"run: medoid_tie_mode={config.medoid_tie_mode} "
          f"scaling_study={config.scaling_study} threads={threads} out={args.out}")
    counts = run_experiment(config, args.out, threads)
    print(f"datasets={counts['datasets']} records={counts['records']} "
          f"excluded={counts['excluded']} out={os.path.join(args.out, 'records.csv')}")
    return EXIT_OK


def _cmd_null_dist(args) -> int:
    D = _read_matrix(args.matrix)
    out = args.out or f"null_hist_{args.rvi}_{D.paradigm_id or 'matrix'}.csv"
    _echo(f"null-dist: matrix={args.matrix} n={D.n} rvi={args.rvi} mode={args.mode} "
          f"k={args.k} n_samples={args.n_samples} seed={args.seed} out={out}")
    rng = np.random.default_rng(args.seed)
    null = sample_null_distribution(D, args.rvi, args.n_samples, args.mode,
                                    args.k, rng)
    write_null_csv(out, null, args.bins)
    mean = null.mean()
    _echo(f"null-dist: defined={null.values.size} undefined={null.n_undefined} "
          f"mean={'undefined' if mean is None else repr(mean)}")
    return EXIT_OK


def _cmd_degrade_labels(args) -> int:
    labels = _read_labels(args.labels)
    fractions = [float(tok) for tok in args.fractions.split(",") if tok.strip()]
    if not fractions:
        raise ValueError("no fractions given")
    _echo(f"degrade-labels: labels={args.labels} n={labels.size} mode={args.mode} "
          f"fractions={args.fractions} repeats={args.repeats} seed={args.seed}")
    rows = degradation_curve(labels, fractions, args.mode, args.repeats, args.seed)
    write_degradation_csv(args.out, rows)
    return EXIT_OK


def _cmd_report(args) -> int:
    records = read_records(args.records)
    os.makedirs(args.out, exist_ok=True)
    _echo(f"report: records={args.records} rows={len(records)} "
          f"evi_min={args.evi_min} seed={args.seed} out={args.out}")
    write_records(os.path.join(args.out, "bias.csv"), aggregate_bias(records),
                  ["dataset", "paradigm", "rvi", "owm_rate", "n", "null_rate"])
    success = [row for task in TASKS for row in success_rates(records, task)]
    write_records(os.path.join(args.out, "success_rates.csv"), success,
                  ["task", "rvi", "scheme", "success_rate", "n_defined", "n_slices"])
    corr = [row for task in TASKS for row in median_correlations(records, task)]
    write_records(os.path.join(args.out, "median_correlations.csv"), corr,
                  ["task", "rvi", "scheme", "median_corr", "n_datasets"])
    passing = threshold_datasets(records, args.evi_min)
    write_records(os.path.join(args.out, "thresholded_datasets.csv"),
                  [{"dataset": ds} for ds in passing], ["dataset"])
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spbench",
        description="Similarity-paradigm clustering validation benchmark")
    parser.add_argument("--version", action="version",
                        version=f"spbench {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("distances", help="compute a pairwise distance matrix")
    p.add_argument("--data", required=True)
    p.add_argument("--format", required=True, choices=LOAD_FORMATS)
    p.add_argument("--norm", default="none", choices=NORM_PROCEDURES + ("none",))
    p.add_argument("--axis", default=None, choices=NORM_AXES)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--measure", required=True, choices=MEASURE_KINDS)
    p.add_argument("--window-frac", dest="window_frac", type=float, default=None)
    p.add_argument("--msm-cost", dest="msm_cost", type=float, default=None)
    p.add_argument("--twed-nu", dest="twed_nu", type=float, default=None)
    p.add_argument("--twed-lambda", dest="twed_lambda", type=float, default=None)
    p.add_argument("--paradigm-id", dest="paradigm_id", default=None)
    p.add_argument("--seed", type=int, default=0, help="accepted everywhere; inert here")
    p.add_argument("--out", required=True,
                   help=".bin for the dense binary layout, anything else CSV")
    p.set_defaults(func=_cmd_distances)

    p = sub.add_parser("cluster", help="cluster a distance matrix")
    p.add_argument("--matrix", required=True)
    p.add_argument("--algorithm", required=True, choices=ALGORITHMS)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pam-n-init", dest="pam_n_init", type=int, default=30)
    p.add_argument("--pam-max-iter", dest="pam_max_iter", type=int, default=100)
    p.add_argument("--out", required=True, help="labels, one integer per line")
    p.set_defaults(func=_cmd_cluster)

    p = sub.add_parser("evaluate", help="compute validity indices for a labelling")
    p.add_argument("--matrix", default=None, help="precomputed distance matrix")
    p.add_argument("--data", default=None, help="raw data; paired with --measure")
    p.add_argument("--format", default="ucr_tsv", choices=LOAD_FORMATS)
    p.add_argument("--norm", default="none", choices=NORM_PROCEDURES + ("none",))
    p.add_argument("--axis", default=None, choices=NORM_AXES)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--measure", default=None, choices=MEASURE_KINDS)
    p.add_argument("--window-frac", dest="window_frac", type=float, default=None)
    p.add_argument("--msm-cost", dest="msm_cost", type=float, default=None)
    p.add_argument("--twed-nu", dest="twed_nu", type=float, default=None)
    p.add_argument("--twed-lambda", dest="twed_lambda", type=float, default=None)
    p.add_argument("--labels", required=True)
    p.add_argument("--rvi", action="append", choices=RVI_NAMES,
                   help="repeatable; default: all seven")
    p.add_argument("--tie-mode", dest="tie_mode", default="lowest_index",
                   choices=MEDOID_TIE_MODES)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_evaluate, parser=p)

    p = sub.add_parser("run", help="run a configured experiment battery")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--threads", type=int, default=None,
                   help="worker processes; default: available parallelism")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("null-dist", help="sample an index over random partitions")
    p.add_argument("--matrix", required=True)
    p.add_argument("--rvi", required=True, choices=RVI_NAMES)
    p.add_argument("--mode", default="uniform", choices=NULL_MODES)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--n-samples", dest="n_samples", type=int, default=1000)
    p.add_argument("--bins", type=int, default=30)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None,
                   help="default: null_hist_<rvi>_<paradigm>.csv")
    p.set_defaults(func=_cmd_null_dist)

    p = sub.add_parser("degrade-labels", help="external scores against tampered labels")
    p.add_argument("--labels", required=True)
    p.add_argument("--mode", required=True, choices=DEGRADE_MODES)
    p.add_argument("--fractions",
                   default="0.0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0")
    p.add_argument("--repeats", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_degrade_labels)

    p = sub.add_parser("report", help="aggregate a records.csv into summaries")
    p.add_argument("--records", required=True)
    p.add_argument("--evi-min", dest="evi_min", type=float, default=0.6)
    p.add_argument("--seed", type=int, default=0, help="accepted everywhere; inert here")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_report)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        _echo(f"input error: {exc}")
        return EXIT_IO
    except OSError as exc:
        _echo(f"io error: {exc}")
        return EXIT_IO
    except ValueError as exc:
        _echo(f"computation error: {exc}")
        return EXIT_COMPUTE

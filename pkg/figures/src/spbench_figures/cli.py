"""Command line entry point: render every known harness CSV in a directory."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .figures import FORMATS, FigureSpec, render

EXIT_OK = 0
EXIT_IO = 3
EXIT_COMPUTE = 4

# fixed-name summary CSVs and the glob patterns for per-run artifacts
FIXED_INPUTS = (
    ("bias.csv", "bias_boxen"),
    ("success_rates.csv", "success_bars"),
    ("median_correlations.csv", "correlation_table"),
)
GLOB_INPUTS = (
    ("null_hist_*.csv", "null_hist"),
    ("degradation*.csv", "degradation_curve"),
)


def _plan(csv_dir: Path) -> list:
    jobs = []
    for name, kind in FIXED_INPUTS:
        path = csv_dir / name
        if path.is_file():
            jobs.append((path, kind, path.stem))
    for pattern, kind in GLOB_INPUTS:
        for path in sorted(csv_dir.glob(pattern)):
            jobs.append((path, kind, path.stem))
    return jobs


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="render_figures",
        description="Render benchmark-harness CSVs as figures")
    parser.add_argument("csv_dir", help="directory holding harness CSV files")
    parser.add_argument("out_dir", help="directory to write images into")
    parser.add_argument("--format", choices=FORMATS, default="png")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    csv_dir = Path(args.csv_dir)
    if not csv_dir.is_dir():
        print(f"render_figures: not a directory: {csv_dir}", file=sys.stderr)
        return EXIT_IO
    jobs = _plan(csv_dir)
    if not jobs:
        print(f"render_figures: no harness CSV files in {csv_dir}",
              file=sys.stderr)
        return EXIT_IO
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for path, kind, stem in jobs:
        out = out_dir / f"{stem}.{args.format}"
        try:
            render(FigureSpec(kind=kind, csv_path=path, out_path=out))
        except ValueError as exc:
            print(f"render_figures: {exc}", file=sys.stderr)
            return EXIT_COMPUTE
        except OSError as exc:
            print(f"render_figures: {exc}", file=sys.stderr)
            return EXIT_IO
        print(f"render_figures: {path.name} -> {out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

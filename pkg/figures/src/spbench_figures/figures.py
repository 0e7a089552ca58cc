"""Render benchmark-harness CSVs as publication-style figures.

Fixed style defaults (the CSV schemas leave presentation open):
whitegrid theme, "deep" palette, Tukey letter-value depth, 150 dpi,
and a dashed black reference line for the no-bias level.  Output is
deterministic: the Agg backend is forced and date metadata is
suppressed, so identical CSVs render byte-identical images.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg", force=True)

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import pandas as pd  # noqa: E402
import seaborn as sns  # noqa: E402

KINDS = ("bias_boxen", "success_bars", "null_hist", "degradation_curve",
         "correlation_table")

REQUIRED_COLUMNS = {
    "bias_boxen": ("dataset", "paradigm", "rvi", "owm_rate", "n", "null_rate"),
    "success_bars": ("task", "rvi", "scheme", "success_rate", "n_defined",
                     "n_slices"),
    "null_hist": ("label", "lo", "hi", "count"),
    "degradation_curve": ("fraction", "mode", "repeat", "ari", "ami"),
    "correlation_table": ("task", "rvi", "scheme", "median_corr", "n_datasets"),
}

DEFAULT_GROUP_KEYS = {
    "bias_boxen": ("rvi", "paradigm"),
    "success_bars": ("rvi", "scheme"),
    "null_hist": (),
    "degradation_curve": ("mode",),
    "correlation_table": ("rvi", "scheme"),
}

DPI = 150
FORMATS = ("png", "svg")


@dataclass(frozen=True)
class FigureSpec:
    """One figure: which style, which CSV, where the image goes."""

    kind: str
    csv_path: str | Path
    out_path: str | Path
    group_keys: tuple = ()
    title: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind: {self.kind!r}")
        suffix = Path(self.out_path).suffix.lstrip(".").lower()
        if suffix not in FORMATS:
            raise ValueError(f"output format must be one of {FORMATS}, "
                             f"got {suffix!r}")
        object.__setattr__(self, "group_keys", tuple(self.group_keys))

    @property
    def image_format(self) -> str:
        return Path(self.out_path).suffix.lstrip(".").lower()


def _load(spec: FigureSpec) -> pd.DataFrame:
    frame = pd.read_csv(spec.csv_path)
    missing = [c for c in REQUIRED_COLUMNS[spec.kind] if c not in frame.columns]
    if missing:
        raise ValueError(f"{spec.csv_path}: {spec.kind} input is missing "
                         f"column(s): {', '.join(missing)}")
    if frame.empty:
        raise ValueError(f"{spec.csv_path}: no data rows")
    return frame


def _groups(spec: FigureSpec, frame: pd.DataFrame) -> tuple:
    keys = spec.group_keys or DEFAULT_GROUP_KEYS[spec.kind]
    for key in keys:
        if key not in frame.columns:
            raise ValueError(f"{spec.csv_path}: grouping key {key!r} is not "
                             f"a column")
    primary = keys[0] if keys else None
    secondary = keys[1] if len(keys) > 1 else None
    return primary, secondary


def _draw_bias_boxen(frame: pd.DataFrame, spec: FigureSpec):
    x, hue = _groups(spec, frame)
    width = max(6.0, 1.2 * frame[x].nunique() * max(1, frame[hue].nunique()
                                                    if hue else 1) ** 0.5)
    fig, ax = plt.subplots(figsize=(width, 4.5))
    sns.boxenplot(data=frame, x=x, y="owm_rate", hue=hue, k_depth="tukey",
                  ax=ax)
    no_bias = float(frame["null_rate"].mean())
    ax.axhline(no_bias, color="black", linestyle="--", linewidth=1.0,
               label=f"no-bias level {no_bias:.3f}")
    ax.set_ylabel("own-paradigm-optimal rate")
    ax.set_ylim(-0.03, 1.03)
    handles, labels = ax.get_legend_handles_labels()
    ax.legend(handles, labels, loc="center left", bbox_to_anchor=(1.01, 0.5),
              frameon=False)
    return fig


def _draw_success_bars(frame: pd.DataFrame, spec: FigureSpec):
    x, hue = _groups(spec, frame)
    tasks = sorted(frame["task"].unique())
    width = max(5.0, 0.55 * frame[x].nunique()
                * max(1, frame[hue].nunique() if hue else 1))
    fig, axes = plt.subplots(1, len(tasks), figsize=(width * len(tasks), 4.0),
                             sharey=True, squeeze=False)
    for ax, task in zip(axes[0], tasks):
        sns.barplot(data=frame[frame["task"] == task], x=x, y="success_rate",
                    hue=hue, ax=ax)
        ax.set_title(task)
        ax.set_ylim(0, 1)
        if ax.get_legend() is not None:
            ax.get_legend().remove()
    if hue is not None:
        handles, labels = axes[0][-1].get_legend_handles_labels()
        fig.legend(handles, labels, loc="center left",
                   bbox_to_anchor=(0.999, 0.5), frameon=False)
    return fig


def _draw_null_hist(frame: pd.DataFrame, spec: FigureSpec):
    fig, ax = plt.subplots(figsize=(6.5, 4.0))
    bins = frame[frame["label"] != "undefined"]
    lo = bins["lo"].astype(float).to_numpy()
    hi = bins["hi"].astype(float).to_numpy()
    count = bins["count"].astype(int).to_numpy()
    ax.bar(lo, count, width=hi - lo, align="edge", edgecolor="white",
           linewidth=0.5)
    ax.set_xlabel("index value")
    ax.set_ylabel("partitions")
    undefined = frame[frame["label"] == "undefined"]
    n_undefined = int(undefined["count"].sum()) if not undefined.empty else 0
    if n_undefined:
        ax.text(0.98, 0.95, f"undefined: {n_undefined}",
                transform=ax.transAxes, ha="right", va="top")
    return fig


def _draw_degradation_curve(frame: pd.DataFrame, spec: FigureSpec):
    (mode_key, _) = _groups(spec, frame)
    fig, ax = plt.subplots(figsize=(6.5, 4.0))
    for mode, sub in frame.groupby(mode_key, sort=True):
        stats = sub.groupby("fraction")["ari"].agg(["mean", "std"])
        ax.plot(stats.index, stats["mean"], marker="o", label=f"{mode} (ari)")
        band = stats["std"].fillna(0.0)
        ax.fill_between(stats.index, stats["mean"] - band,
                        stats["mean"] + band, alpha=0.2)
        ami_mean = sub.groupby("fraction")["ami"].mean()
        ax.plot(ami_mean.index, ami_mean, linestyle="--",
                label=f"{mode} (ami)")
    ax.axhline(0.0, color="grey", linestyle=":", linewidth=1.0)
    ax.set_xlabel("fraction of labels tampered")
    ax.set_ylabel("external score")
    ax.legend(frameon=False)
    return fig


def _draw_correlation_table(frame: pd.DataFrame, spec: FigureSpec):
    row_key, col_key = _groups(spec, frame)
    table = frame.pivot_table(index=row_key, columns=["task", col_key],
                              values="median_corr", aggfunc="first",
                              sort=True)
    fig, ax = plt.subplots(figsize=(1.0 + 0.9 * table.shape[1],
                                    1.2 + 0.6 * table.shape[0]))
    sns.heatmap(table, annot=True, fmt=".2f", vmin=-1.0, vmax=1.0,
                cmap="vlag", linewidths=0.5, cbar_kws={"shrink": 0.8}, ax=ax)
    ax.set_xlabel("")
    ax.set_ylabel("")
    return fig


_DRAWERS = {
    "bias_boxen": _draw_bias_boxen,
    "success_bars": _draw_success_bars,
    "null_hist": _draw_null_hist,
    "degradation_curve": _draw_degradation_curve,
    "correlation_table": _draw_correlation_table,
}


def render(spec: FigureSpec) -> str:
    """Draw one figure from a harness CSV and write the image file."""
    frame = _load(spec)
    sns.set_theme(style="whitegrid", palette="deep")
    plt.rcParams["svg.hashsalt"] = "spbench-figures"  # stable svg element ids
    fig = _DRAWERS[spec.kind](frame, spec)
    if spec.title:
        fig.suptitle(spec.title)
    # scrub volatile metadata so identical inputs give identical bytes
    metadata = {"Date": None} if spec.image_format == "svg" else {}
    fig.savefig(spec.out_path, dpi=DPI, bbox_inches="tight",
                metadata=metadata)
    plt.close(fig)
    return str(spec.out_path)

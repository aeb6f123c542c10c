"""Series extraction and figures for experiment result CSVs.

Everything here is a pure function of the results file written by the
experiment harness; nothing is recomputed or resimulated.  Each figure can
export the numbers it plots as a CSV so tests compare series instead of
pixels.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


@dataclass
class PlotSpec:
    csv_path: str
    out: str
    x: str | None = None
    group_by: list = field(default_factory=list)
    y: str = "accuracy"
    scale: str = "linear"

    def validate(self, header) -> None:
        if self.scale not in ("linear", "log"):
            raise ValueError(f"scale must be linear or log, got {self.scale!r}")
        referenced = list(self.group_by) + [self.y]
        if self.x is not None:
            referenced.append(self.x)
        missing = [c for c in referenced if c not in header]
        if missing:
            raise ValueError(
                f"columns not in the CSV header: {', '.join(missing)}")


def read_results(path):
    """Header and data rows (as string dicts) of a results CSV."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path} is empty") from None
        rows = []
        for lineno, cells in enumerate(reader, start=2):
            if len(cells) != len(header):
                raise ValueError(
                    f"{path} line {lineno}: expected {len(header)} cells, "
                    f"got {len(cells)}")
            rows.append(dict(zip(header, cells)))
    return header, rows


def _mean_ci(values):
    # same reduction the harness aggregator uses: 1.96 * s / sqrt(k),
    # zero half-width for a single value
    vals = np.asarray(values, dtype=np.float64)
    k = vals.size
    if k > 1:
        half = 1.96 * float(np.std(vals, ddof=1)) / math.sqrt(k)
    else:
        half = 0.0
    return k, float(vals.mean()), half


def line_series(rows, x, group_by, y="accuracy"):
    """Per-group lists of (x, reps, mean, ci95), groups in first-appearance
    order, points sorted by x."""
    if not rows:
        raise ValueError("no data rows selected")
    groups: dict[tuple, dict[float, list]] = {}
    for r in rows:
        key = tuple(r[c] for c in group_by)
        groups.setdefault(key, {}).setdefault(float(r[x]), []).append(
            float(r[y]))
    out = []
    for key, cells in groups.items():
        pts = [(xv,) + _mean_ci(cells[xv]) for xv in sorted(cells)]
        out.append((key, pts))
    return out


def box_series(rows, group_by, y="accuracy"):
    """Per-group raw value arrays plus (reps, mean, ci95), groups in
    first-appearance order."""
    if not rows:
        raise ValueError("no data rows selected")
    groups: dict[tuple, list] = {}
    for r in rows:
        groups.setdefault(tuple(r[c] for c in group_by), []).append(
            float(r[y]))
    return [(key, np.asarray(vals), _mean_ci(vals))
            for key, vals in groups.items()]


def _group_label(group_by, key, fallback):
    return ", ".join(f"{c}={v}" for c, v in zip(group_by, key)) or fallback


def _check_log_scale(rows, y):
    low = min(float(r[y]) for r in rows)
    if low <= 0:
        raise ValueError(
            f"log scale needs positive values, column {y} has minimum {low}")


def plot_lines(spec: PlotSpec):
    """Mean of the value column vs x, one line per group, shaded 95% band.

    Writes a PNG to spec.out and returns the plotted series.
    """
    header, rows = read_results(spec.csv_path)
    spec.validate(header)
    if spec.x is None:
        raise ValueError("line plots need an x column")
    if spec.scale == "log":
        _check_log_scale(rows, spec.y)
    series = line_series(rows, spec.x, spec.group_by, spec.y)

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for key, pts in series:
        xs = [p[0] for p in pts]
        means = [p[2] for p in pts]
        cis = [p[3] for p in pts]
        label = _group_label(spec.group_by, key, spec.y)
        (line,) = ax.plot(xs, means, marker="o", label=label)
        ax.fill_between(xs, [m - c for m, c in zip(means, cis)],
                        [m + c for m, c in zip(means, cis)],
                        color=line.get_color(), alpha=0.2, linewidth=0)
    ax.set_xlabel(spec.x)
    ax.set_ylabel(spec.y)
    if spec.scale == "log":
        ax.set_yscale("log")
    if spec.group_by:
        ax.legend()
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(spec.out, format="png", dpi=120)
    plt.close(fig)
    return series


def plot_box(spec: PlotSpec):
    """One box-and-whisker of the value column per group.

    Writes a PNG to spec.out and returns the per-group series.
    """
    header, rows = read_results(spec.csv_path)
    spec.validate(header)
    if spec.scale == "log":
        _check_log_scale(rows, spec.y)
    series = box_series(rows, spec.group_by, spec.y)

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.boxplot([vals for _, vals, _ in series],
               tick_labels=[_group_label(spec.group_by, key, spec.y)
                            for key, _, _ in series])
    ax.set_ylabel(spec.y)
    if spec.scale == "log":
        ax.set_yscale("log")
    ax.grid(alpha=0.3, axis="y")
    fig.tight_layout()
    fig.savefig(spec.out, format="png", dpi=120)
    plt.close(fig)
    return series


def dump_line_series(series, spec: PlotSpec, path_or_file) -> None:
    """The plotted numbers as CSV: group columns, x, reps, mean, ci95."""
    own = isinstance(path_or_file, (str, os.PathLike))
    fh = open(path_or_file, "w", encoding="utf-8") if own else path_or_file
    try:
        fh.write(",".join(list(spec.group_by)
                          + [spec.x, "reps", "mean", "ci95"]) + "\n")
        for key, pts in series:
            for xv, reps, mean, ci in pts:
                cells = list(key) + [repr(xv), str(reps), repr(mean),
                                     repr(ci)]
                fh.write(",".join(cells) + "\n")
    finally:
        if own:
            fh.close()


def dump_box_series(series, spec: PlotSpec, path_or_file) -> None:
    """Per-group reduction as CSV: group columns, reps, mean, ci95."""
    own = isinstance(path_or_file, (str, os.PathLike))
    fh = open(path_or_file, "w", encoding="utf-8") if own else path_or_file
    try:
        fh.write(",".join(list(spec.group_by)
                          + ["reps", "mean", "ci95"]) + "\n")
        for key, _, (reps, mean, ci) in series:
            fh.write(",".join(list(key) + [str(reps), repr(mean),
                                           repr(ci)]) + "\n")
    finally:
        if own:
            fh.close()

#!/usr/bin/env python3
"""Render the `entverify reproduce` CSV sweeps into summary figures.

Reads the six fixed-header CSV files from a results directory and writes
one PNG per figure id: copies-vs-fidelity, failure-probability-vs-fidelity
and copy-count-ratio panels.  Every plotted value is taken verbatim from
the CSV; nothing is recomputed here.

Usage: render.py <csv_dir> <out_dir>
"""

import argparse
import csv
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg", force=True)

import matplotlib.pyplot as plt

CSV_HEADER = [
    "strategy",
    "F",
    "n",
    "m",
    "m_embed",
    "delta",
    "copies_consumed",
    "ebits_consumed",
    "method",
    "trials",
    "estimate",
    "ci_low",
    "ci_high",
    "seed",
]

DPI = 150
FIGSIZE = (6.0, 4.0)

# fixed colors so a rerun is byte-identical and a strategy keeps its color
# across panels
STRATEGY_COLOR = {
    "single-copy": "#555555",
    "rank2-full": "#1f77b4",
    "rank2-subspace": "#2ca02c",
    "werner-full": "#d62728",
    "werner-subspace": "#9467bd",
    "embed-eng": "#ff7f0e",
    "embed-eng-subspace": "#17becf",
    "direct-embed": "#8c564b",
}
FALLBACK_COLOR = "#333333"


class RenderError(Exception):
    """Missing or malformed input CSV."""


class FigureSpec:
    def __init__(self, y_col, ylabel, title, level_col=None):
        self.y_col = y_col
        self.ylabel = ylabel
        self.title = title
        # extra grouping column: one line per (strategy, level) when set
        self.level_col = level_col


FIGURES = {
    "fig2a": FigureSpec(
        "copies_consumed",
        "copies consumed",
        "Copies to certify vs fidelity (failure target 0.1)",
    ),
    "fig2b": FigureSpec(
        "delta",
        "failure probability",
        "Failure probability vs fidelity (nine copies consumed)",
    ),
    "app_c_a": FigureSpec(
        "estimate",
        "copy-count ratio",
        "Single-copy / collective copy ratio (rank-2 ensembles)",
    ),
    "app_c_b": FigureSpec(
        "estimate",
        "copy-count ratio",
        "Single-copy / collective copy ratio (Werner ensembles)",
    ),
    "app_c_c": FigureSpec(
        "delta",
        "failure probability",
        "Direct embedded measurement vs per-copy measurement",
        level_col="copies_consumed",
    ),
    "app_c_d": FigureSpec(
        "delta",
        "failure probability",
        "Pure auxiliary vs auxiliary embedded from the ensemble",
        level_col="n",
    ),
}


def load_rows(path) -> list[dict]:
    """Read one fixed-header CSV; raise RenderError on anything off."""
    path = Path(path)
    if not path.is_file():
        raise RenderError(f"missing CSV: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise RenderError(f"empty CSV: {path}") from None
        if header != CSV_HEADER:
            raise RenderError(f"malformed CSV header in {path}")
        rows = [dict(zip(CSV_HEADER, r)) for r in reader]
    if not rows:
        raise RenderError(f"no data rows in {path}")
    for r in rows:
        if len(r) != len(CSV_HEADER):
            raise RenderError(f"ragged row in {path}")
    return rows


def _value(row, col, path):
    try:
        return float(row[col])
    except ValueError:
        raise RenderError(
            f"malformed CSV {path}: bad {col!r} value {row[col]!r}"
        ) from None


def _series(rows, spec, path):
    """Group rows into lines keyed by (strategy, level), sorted by F."""
    groups: dict[tuple, list] = {}
    for row in rows:
        level = _value(row, spec.level_col, path) if spec.level_col else 0.0
        key = (row["strategy"], level)
        x = _value(row, "F", path)
        y = _value(row, spec.y_col, path)
        groups.setdefault(key, []).append((x, y))
    for pts in groups.values():
        pts.sort()
    return dict(sorted(groups.items()))


def render_figure(fig_id: str, csv_path):
    spec = FIGURES[fig_id]
    rows = load_rows(csv_path)
    series = _series(rows, spec, csv_path)
    fig, ax = plt.subplots(figsize=FIGSIZE)
    labeled = set()
    strategies = sorted({s for s, _ in series})
    for (strategy, level), pts in series.items():
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        style = {
            "color": STRATEGY_COLOR.get(strategy, FALLBACK_COLOR),
            "marker": "o",
            "markersize": 3,
            "linewidth": 1.4,
        }
        want_label = True
        if spec.level_col is not None:
            # fade the smaller-resource lines of a family instead of
            # flooding the legend with one entry per level; label only the
            # full-strength line
            levels = sorted(lv for s, lv in series if s == strategy)
            idx = levels.index(level)
            span = max(len(levels) - 1, 1)
            style["alpha"] = 0.35 + 0.65 * idx / span
            want_label = idx == len(levels) - 1
        if want_label and strategy not in labeled:
            style["label"] = strategy
            labeled.add(strategy)
        ax.plot(xs, ys, **style)
    ax.set_yscale("log")
    ax.set_xlabel("fidelity F")
    ax.set_ylabel(spec.ylabel)
    ax.set_title(spec.title)
    ax.grid(True, which="both", alpha=0.25)
    ax.legend(
        [ln for ln in ax.lines if ln.get_label() in strategies],
        strategies,
        loc="best",
    )
    fig.tight_layout()
    return fig


def render_all(csv_dir, out_dir) -> list[Path]:
    csv_dir = Path(csv_dir)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for fig_id in FIGURES:
        fig = render_figure(fig_id, csv_dir / f"{fig_id}.csv")
        target = out_dir / f"{fig_id}.png"
        # Software=None drops the default metadata chunk so reruns are
        # byte-identical
        fig.savefig(target, dpi=DPI, metadata={"Software": None})
        plt.close(fig)
        written.append(target)
    return written


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("csv_dir", help="directory holding the reproduce CSVs")
    parser.add_argument("out_dir", help="directory for the rendered PNGs")
    args = parser.parse_args(argv)
    try:
        for target in render_all(args.csv_dir, args.out_dir):
            print(f"wrote {target}")
    except RenderError as exc:
        print(f"render error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

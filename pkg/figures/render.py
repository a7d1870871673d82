#!/usr/bin/env python3
"""Render benchmark figures from harness CSV artifacts.

Reads only the CSV/JSON files the experiment harness writes; has no
dependency on the solver package, so it can run anywhere the artifacts
are copied.

    python figures/render.py --spec figure.json

The spec file is a JSON object:

    {
      "kind": "error_vs_rank",        # one of KINDS below
      "input": "error_vs_rank.csv",   # or "inputs": [{"path": ..., "label": ...}]
      "output": "out/figure_a1",      # extension-less; .svg and .png are written
      "title": "optional title"
    }

Figure kinds and their axis conventions:

    error_vs_rank             log-log,   one series per method column
    error_vs_dt               log-log,   one series per (method, r)
    error_vs_time             semilog-y, one series per input file
    rank_vs_time              linear,    one series per input file
    singular_values_vs_time   semilog-y, one line per retained mode
    cpu_scaling               log-log,   one series per method, slope annotations
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

# deterministic output: pinned geometry, fonts and svg hashing
matplotlib.rcParams.update(
    {
        "figure.figsize": (5.2, 4.2),
        "figure.dpi": 120,
        "savefig.dpi": 120,
        "font.family": "DejaVu Sans",
        "svg.hashsalt": "lowrank-mde-figures",
        "axes.grid": True,
        "grid.alpha": 0.3,
    }
)

KINDS = (
    "error_vs_rank",
    "error_vs_dt",
    "error_vs_time",
    "rank_vs_time",
    "singular_values_vs_time",
    "cpu_scaling",
)


class FigureError(Exception):
    pass


def read_csv(path: Path) -> list[dict]:
    if not path.exists():
        raise FigureError(f"input CSV not found: {path}")
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise FigureError(f"no data rows in {path}")
    return rows


def need(rows: list[dict], columns: list[str], path: Path) -> None:
    have = set(rows[0])
    for col in columns:
        if col not in have:
            raise FigureError(f"column '{col}' missing from {path}")


def floats(rows, col, where=lambda r: True):
    return np.array([float(r[col]) for r in rows if where(r) and r[col] != ""])


def _series_by(rows, key):
    order = []
    for row in rows:
        if row[key] not in order:
            order.append(row[key])
    return order


def plot_error_vs_rank(ax, spec, inputs):
    path, _ = inputs[0]
    rows = read_csv(path)
    need(rows, ["method", "r", "error"], path)
    for method in _series_by(rows, "method"):
        keep = lambda r: r["method"] == method and r.get("failed", "0") == "0" and r["error"] != ""
        x = floats(rows, "r", keep)
        y = floats(rows, "error", keep)
        if not len(x):
            continue
        style = {"linestyle": "--", "color": "k"} if method == "svd_optimal" else {"marker": "o"}
        ax.loglog(x, y, label=method, **style)
    ax.set_xlabel("rank r")
    ax.set_ylabel("relative error at final time")


def plot_error_vs_dt(ax, spec, inputs):
    path, _ = inputs[0]
    rows = read_csv(path)
    need(rows, ["method", "r", "dt", "error"], path)
    combos = _series_by(rows, "method")
    for method in combos:
        for rank in _series_by([r for r in rows if r["method"] == method], "r"):
            keep = (
                lambda row: row["method"] == method
                and row["r"] == rank
                and row.get("failed", "0") == "0"
                and row["error"] != ""
            )
            x = floats(rows, "dt", keep)
            y = floats(rows, "error", keep)
            if not len(x):
                continue
            order = np.argsort(x)
            ax.loglog(x[order], y[order], marker="o", label=f"{method} r={rank}")
    ax.set_xlabel("step size")
    ax.set_ylabel("relative error at final time")


def plot_error_vs_time(ax, spec, inputs):
    for path, label in inputs:
        rows = read_csv(path)
        need(rows, ["t", "error"], path)
        keep = lambda r: r["error"] != ""
        x = floats(rows, "t", keep)
        y = floats(rows, "error", keep)
        if not len(x):
            raise FigureError(f"no usable error values in {path}")
        ax.semilogy(x, y, label=label)
    ax.set_xlabel("t")
    ax.set_ylabel("relative error")


def plot_rank_vs_time(ax, spec, inputs):
    for path, label in inputs:
        rows = read_csv(path)
        need(rows, ["t", "r"], path)
        keep = lambda r: r["r"] != ""
        x = floats(rows, "t", keep)
        y = floats(rows, "r", keep)
        ax.plot(x, y, drawstyle="steps-post", label=label)
    ax.set_xlabel("t")
    ax.set_ylabel("rank r")


def plot_singular_values_vs_time(ax, spec, inputs):
    path, _ = inputs[0]
    rows = read_csv(path)
    need(rows, ["t"], path)
    sigma_cols = sorted(
        (c for c in rows[0] if c.startswith("sigma_")), key=lambda c: int(c.split("_")[1])
    )
    if not sigma_cols:
        raise FigureError(f"no sigma_* columns in {path}")
    t = floats(rows, "t")
    for col in sigma_cols:
        vals = np.array([float(r[col]) if r[col] != "" else np.nan for r in rows])
        ax.semilogy(t, vals, linewidth=0.9)
    ax.set_xlabel("t")
    ax.set_ylabel("singular values")


def plot_cpu_scaling(ax, spec, inputs):
    path, _ = inputs[0]
    rows = read_csv(path)
    need(rows, ["method", "n", "median_step_ms"], path)
    for method in _series_by(rows, "method"):
        keep = (
            lambda r: r["method"] == method
            and r.get("skipped", "0") == "0"
            and r["median_step_ms"] != ""
        )
        x = floats(rows, "n", keep)
        y = floats(rows, "median_step_ms", keep)
        if len(x) < 2:
            continue
        slope = np.polyfit(np.log(x), np.log(y), 1)[0]
        ax.loglog(x, y, marker="o", label=f"{method} (slope {slope:.2f})")
    ax.set_xlabel("n = s")
    ax.set_ylabel("median step time [ms]")


PLOTTERS = {
    "error_vs_rank": plot_error_vs_rank,
    "error_vs_dt": plot_error_vs_dt,
    "error_vs_time": plot_error_vs_time,
    "rank_vs_time": plot_rank_vs_time,
    "singular_values_vs_time": plot_singular_values_vs_time,
    "cpu_scaling": plot_cpu_scaling,
}


def load_spec(path: Path) -> dict:
    try:
        spec = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise FigureError(f"cannot read spec {path}: {exc}") from exc
    kind = spec.get("kind")
    if kind not in KINDS:
        raise FigureError(f"kind must be one of {KINDS}, got {kind!r}")
    if "output" not in spec:
        raise FigureError("spec needs an 'output' path (extension-less)")
    if "input" not in spec and "inputs" not in spec:
        raise FigureError("spec needs 'input' or 'inputs'")
    return spec


def spec_inputs(spec: dict, base: Path) -> list[tuple[Path, str]]:
    if "input" in spec:
        p = Path(spec["input"])
        p = p if p.is_absolute() else base / p
        return [(p, spec.get("label", p.stem))]
    out = []
    for item in spec["inputs"]:
        p = Path(item["path"])
        p = p if p.is_absolute() else base / p
        out.append((p, item.get("label", p.stem)))
    if not out:
        raise FigureError("'inputs' list is empty")
    return out


def render(spec_path: Path) -> list[Path]:
    """Render one spec; returns the written image paths."""
    spec = load_spec(spec_path)
    base = spec_path.parent
    inputs = spec_inputs(spec, base)
    fig, ax = plt.subplots()
    try:
        PLOTTERS[spec["kind"]](ax, spec, inputs)
        if not ax.has_data():
            raise FigureError("nothing to plot: every series was empty")
        if spec.get("title"):
            ax.set_title(spec["title"])
        if ax.get_legend_handles_labels()[0]:
            ax.legend(fontsize=8)
        out_base = Path(spec["output"])
        out_base = out_base if out_base.is_absolute() else base / out_base
        out_base.parent.mkdir(parents=True, exist_ok=True)
        written = []
        for ext in ("svg", "png"):
            target = out_base.with_suffix(f".{ext}")
            fig.savefig(target, metadata={"Date": None} if ext == "svg" else None)
            written.append(target)
        return written
    finally:
        plt.close(fig)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="Render figures from harness CSVs")
    parser.add_argument("--spec", required=True, type=Path)
    args = parser.parse_args(argv)
    try:
        for target in render(args.spec):
            print(f"wrote {target}")
    except FigureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

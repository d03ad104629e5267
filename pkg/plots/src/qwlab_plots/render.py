"""Render one figure per spec file from the documented CSV formats.

Figure kinds:

    decay       semilog-y series against t, with the fitted C*exp(-rate*t)
                overlay read from the summary file
    order       log-log error-vs-dt points with a reference slope line
    histogram   distribution of one column
    attraction  semidistance curve against t
    cloud       scatter of per-state norms (e_norm vs e1_norm)

Spec document (JSON):

    {
      "csv_path": "out/energy.csv",
      "figure_kind": "decay",
      "output_path": "figs/decay.svg",
      "summary_path": "out/summary.json",
      "axis": {"y": "e_norm", "title": "...", "rate_key": "decay_rate"}
    }
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

__all__ = ["FigureSpec", "load_figure_spec", "render", "main"]

FIGURE_KINDS = ("decay", "order", "histogram", "attraction", "cloud")
OUTPUT_FORMATS = (".png", ".svg")

# pinned style: deterministic output, no timestamps
matplotlib.rcParams["svg.hashsalt"] = "qwlab-plots"
matplotlib.rcParams["figure.figsize"] = (6.4, 4.2)
matplotlib.rcParams["axes.grid"] = True
matplotlib.rcParams["grid.alpha"] = 0.3


@dataclass(frozen=True)
class FigureSpec:
    csv_path: str
    figure_kind: str
    output_path: str
    summary_path: str | None = None
    axis: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.figure_kind not in FIGURE_KINDS:
            raise ValueError(f"unknown figure_kind {self.figure_kind!r}; choose from {FIGURE_KINDS}")
        suffix = Path(self.output_path).suffix.lower()
        if suffix not in OUTPUT_FORMATS:
            raise ValueError(f"output format {suffix!r} not supported; use PNG or SVG")


def load_figure_spec(path) -> FigureSpec:
    doc = json.loads(Path(path).read_text())
    return FigureSpec(
        csv_path=doc["csv_path"],
        figure_kind=doc["figure_kind"],
        output_path=doc["output_path"],
        summary_path=doc.get("summary_path"),
        axis=doc.get("axis", {}),
    )


def read_columns(path) -> dict[str, np.ndarray]:
    p = Path(path)
    if not p.exists():
        raise ValueError(f"CSV not found: {path}")
    with p.open(newline="") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r and any(cell.strip() for cell in r)]
    if len(rows) < 2:
        raise ValueError(f"empty CSV: {path}")
    header = rows[0]
    data = np.array([[float(x) for x in r] for r in rows[1:]])
    return {name: data[:, j] for j, name in enumerate(header)}


def _column(cols: dict, name: str, csv_path: str) -> np.ndarray:
    if name not in cols:
        raise ValueError(f"column {name!r} not present in {csv_path} (has {sorted(cols)})")
    return cols[name]


def _summary_value(spec: FigureSpec, key: str) -> float:
    if spec.summary_path is None:
        raise ValueError(f"figure_kind 'decay' requires summary_path for the {key!r} overlay")
    doc = json.loads(Path(spec.summary_path).read_text())
    values = doc.get("values", {})
    if key not in values:
        raise ValueError(f"summary {spec.summary_path} has no value {key!r}")
    return float(values[key])


def render(spec: FigureSpec) -> Path:
    """Draw the figure and write it to output_path; returns the path."""
    cols = read_columns(spec.csv_path)
    ax_opts = spec.axis
    fig, ax = plt.subplots()
    try:
        if spec.figure_kind == "decay":
            x = _column(cols, ax_opts.get("x", "t"), spec.csv_path)
            yname = ax_opts.get("y", "e_norm")
            y = _column(cols, yname, spec.csv_path)
            ax.semilogy(x, np.maximum(y, 1e-300), label=yname, color="tab:blue")
            rate = _summary_value(spec, ax_opts.get("rate_key", "decay_rate"))
            amp = _summary_value(spec, ax_opts.get("amplitude_key", "decay_amplitude"))
            overlay = amp * np.exp(-rate * x)
            ax.semilogy(
                x,
                np.maximum(overlay, 1e-300),
                "--",
                color="tab:red",
                label=f"fit: {amp:.6g} exp(-{rate:.6g} t)",
            )
            ax.set_xlabel(ax_opts.get("xlabel", "t"))
            ax.set_ylabel(ax_opts.get("ylabel", yname))
            ax.legend()
        elif spec.figure_kind == "order":
            xname = ax_opts.get("x", "dt")
            yname = ax_opts.get("y", "residual_per_unit_time")
            x = _column(cols, xname, spec.csv_path)
            y = _column(cols, yname, spec.csv_path)
            ax.loglog(x, y, "o-", color="tab:blue", label=yname)
            slope = float(ax_opts.get("slope", 2.0))
            ref = y[0] * (x / x[0]) ** slope
            ax.loglog(x, ref, "--", color="tab:gray", label=f"slope {slope:g} reference")
            ax.set_xlabel(ax_opts.get("xlabel", xname))
            ax.set_ylabel(ax_opts.get("ylabel", yname))
            ax.legend()
        elif spec.figure_kind == "histogram":
            yname = ax_opts.get("y", "ratio")
            y = _column(cols, yname, spec.csv_path)
            ax.hist(y, bins=int(ax_opts.get("bins", 20)), color="tab:blue", edgecolor="black")
            ax.set_xlabel(ax_opts.get("xlabel", yname))
            ax.set_ylabel(ax_opts.get("ylabel", "count"))
        elif spec.figure_kind == "attraction":
            x = _column(cols, ax_opts.get("x", "t"), spec.csv_path)
            y = _column(cols, ax_opts.get("y", "semidist"), spec.csv_path)
            ax.semilogy(x, np.maximum(y, 1e-300), "o-", color="tab:blue")
            ax.set_xlabel(ax_opts.get("xlabel", "t"))
            ax.set_ylabel(ax_opts.get("ylabel", "semidistance"))
        else:  # cloud
            xname = ax_opts.get("x", "e_norm")
            yname = ax_opts.get("y", "e1_norm")
            x = _column(cols, xname, spec.csv_path)
            y = _column(cols, yname, spec.csv_path)
            ax.scatter(x, y, s=12, color="tab:blue")
            ax.set_xlabel(ax_opts.get("xlabel", xname))
            ax.set_ylabel(ax_opts.get("ylabel", yname))
        if "title" in ax_opts:
            ax.set_title(ax_opts["title"])
        out = Path(spec.output_path)
        out.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(out, metadata=_deterministic_metadata(out))
        return out
    finally:
        plt.close(fig)


def _deterministic_metadata(out: Path) -> dict | None:
    suffix = out.suffix.lower()
    if suffix == ".svg":
        return {"Date": None}
    if suffix == ".png":
        return {"Software": None}
    return None


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="qwlab-plot", description="render figures from wave-lab CSV artifacts"
    )
    parser.add_argument("specs", nargs="+", help="figure spec JSON files")
    args = parser.parse_args(argv)
    status = 0
    for spec_path in args.specs:
        try:
            out = render(load_figure_spec(spec_path))
            print(f"wrote {out}")
        except (ValueError, OSError, KeyError, json.JSONDecodeError) as err:
            print(f"error in {spec_path}: {err}", file=sys.stderr)
            status = 1
    return status


if __name__ == "__main__":
    sys.exit(main())

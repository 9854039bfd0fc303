"""Render the two sweep figures from ris-street CSV output.

Figure kinds:

* mean-length-sweep: mean covered length against alpha = gamma2/gamma1
  (closed form, with the correction-free approximation and Monte-Carlo
  points when those columns are present);
* sinr-comparison: coverage probability against the SINR threshold,
  overlaying the analytic curve and both Monte-Carlo estimates with
  standard-error bands.

Rendering is read-only over its input and deterministic: the same CSV
produces byte-identical image files.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


class FigureError(ValueError):
    """Bad figure request: unknown kind, missing column, or empty input."""


REQUIRED_COLUMNS = {
    "mean-length-sweep": ("alpha", "el_closed_form"),
    "sinr-comparison": ("theta", "p_analytic", "p_mc_h0", "p_mc_h0_stderr",
                        "p_mc_dep", "p_mc_dep_stderr"),
}
FIGURE_KINDS = tuple(REQUIRED_COLUMNS)


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    csv_path: str
    out_path: str

    def __post_init__(self):
        if self.kind not in REQUIRED_COLUMNS:
            raise FigureError(
                f"unknown figure kind {self.kind!r}; expected one of {FIGURE_KINDS}")


def read_sweep_csv(path: str) -> dict[str, list[float]]:
    """Parse a ris-street CSV: '#' metadata lines, a header row, float cells.

    Empty cells are returned as None.
    """
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    if not rows:
        raise FigureError(f"{path}: no header row")
    header, data = rows[0], rows[1:]
    if not data:
        raise FigureError(f"{path}: no data rows")
    columns: dict[str, list] = {name: [] for name in header}
    for row in data:
        for name, cell in zip(header, row):
            columns[name].append(float(cell) if cell != "" else None)
    return columns


def _require(columns: dict, spec: FigureSpec) -> None:
    for name in REQUIRED_COLUMNS[spec.kind]:
        if name not in columns:
            raise FigureError(f"{spec.csv_path}: missing required column "
                              f"{name!r} for kind {spec.kind!r}")


def _has_values(columns: dict, name: str) -> bool:
    return name in columns and all(v is not None for v in columns[name])


def build_figure(spec: FigureSpec) -> plt.Figure:
    """Build the matplotlib figure for a spec (no file output)."""
    columns = read_sweep_csv(spec.csv_path)
    _require(columns, spec)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    if spec.kind == "mean-length-sweep":
        alpha = columns["alpha"]
        ax.plot(alpha, columns["el_closed_form"], "-", color="tab:blue",
                label="closed form")
        if _has_values(columns, "el_approx"):
            ax.plot(alpha, columns["el_approx"], "--", color="tab:orange",
                    label="approximation")
        if _has_values(columns, "el_mc") and _has_values(columns, "el_mc_stderr"):
            ax.errorbar(alpha, columns["el_mc"],
                        yerr=[3.0 * s for s in columns["el_mc_stderr"]],
                        fmt="o", ms=3.5, lw=1.0, color="tab:green",
                        label="Monte-Carlo (3 s.e.)")
        ax.set_xlabel(r"$\alpha = \gamma_2 / \gamma_1$")
        ax.set_ylabel("mean covered length (m)")
        ax.set_xscale("log")
    else:
        theta = columns["theta"]
        for key, color, label in (("p_analytic", "tab:blue", "analytic"),
                                  ("p_mc_h0", "tab:orange",
                                   "MC, independent marks"),
                                  ("p_mc_dep", "tab:green", "MC, dependent")):
            ax.plot(theta, columns[key], "-o", ms=3.0, color=color, label=label)
            err_key = key + "_stderr"
            if _has_values(columns, err_key):
                lo = [p - 3.0 * s for p, s in zip(columns[key], columns[err_key])]
                hi = [p + 3.0 * s for p, s in zip(columns[key], columns[err_key])]
                ax.fill_between(theta, lo, hi, color=color, alpha=0.2, lw=0)
        ax.set_xlabel(r"SINR threshold $\theta$")
        ax.set_ylabel("coverage probability")
        ax.set_xscale("log")
        ax.set_ylim(bottom=0.0)
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    return fig


def render(spec: FigureSpec) -> str:
    """Render the figure to spec.out_path; nothing is written on error."""
    fig = build_figure(spec)
    try:
        fig.savefig(spec.out_path, dpi=150)
    finally:
        plt.close(fig)
    return spec.out_path

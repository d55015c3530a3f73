"""Figure rendering: analytic curves as lines, empirical means as points
with 95% error bars, one curve per thinning type found in the CSV.

The plotting layer does no statistics and recomputes nothing; every number
drawn comes straight out of the CSV columns.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
# stable element ids so repeated SVG renders are byte-identical
matplotlib.rcParams["svg.hashsalt"] = "rtscts-figures"

import matplotlib.pyplot as plt

from .records import read_sweep_csv

# kind -> (analytic column, empirical mean column, ci column, y label)
KIND_SERIES = {
    "intensity_vs_lambda_p": (
        "analytic_intensity", "emp_intensity_mean", "emp_intensity_ci95",
        "retained transmitter density"),
    "interference_vs_lambda_p": (
        "analytic_interference", "emp_interference_mean",
        "emp_interference_ci95", "mean interference at the receiver"),
}

KINDS = tuple(KIND_SERIES)

_THINNING_LABELS = {"type1": "unconditional rule", "type2": "mark rule"}


@dataclass(frozen=True)
class FigureSpec:
    input_csv: Path
    output: Path
    kind: str
    log_x: bool = False
    log_y: bool = False

    def __post_init__(self):
        if self.kind not in KIND_SERIES:
            raise ValueError(
                f"kind must be one of {', '.join(KINDS)}, got {self.kind!r}")


def build_figure(records: list[dict], kind: str,
                 log_x: bool = False, log_y: bool = False):
    """Assemble the figure for one plot kind; returns (figure, axes)."""
    analytic_col, mean_col, ci_col, y_label = KIND_SERIES[kind]
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for thinning in sorted({r["thinning"] for r in records}):
        rows = sorted((r for r in records if r["thinning"] == thinning),
                      key=lambda r: r["lambda_p"])
        label = _THINNING_LABELS.get(thinning, thinning)
        ax.plot([r["lambda_p"] for r in rows],
                [r[analytic_col] for r in rows],
                label=f"{label}, analytic")
        points = [r for r in rows if r[mean_col] is not None]
        if points:
            ax.errorbar([r["lambda_p"] for r in points],
                        [r[mean_col] for r in points],
                        yerr=[r[ci_col] for r in points],
                        fmt="o", markersize=4, capsize=3, linestyle="none",
                        label=f"{label}, simulated (95% CI)")
    ax.set_xlabel("candidate transmitter density")
    ax.set_ylabel(y_label)
    if log_x:
        ax.set_xscale("log")
    if log_y:
        ax.set_yscale("log")
    ax.grid(True, alpha=0.3)
    ax.legend(frameon=False)
    fig.tight_layout()
    return fig, ax


def render(spec: FigureSpec) -> Path:
    """Read the CSV and write the figure; deterministic for fixed input."""
    records = read_sweep_csv(spec.input_csv)
    fig, _ = build_figure(records, spec.kind, spec.log_x, spec.log_y)
    out = Path(spec.output)
    try:
        # date metadata would vary between runs; everything else is stable
        fig.savefig(out, dpi=150, metadata={"Date": None}
                    if out.suffix == ".svg" else None)
    finally:
        plt.close(fig)
    return out

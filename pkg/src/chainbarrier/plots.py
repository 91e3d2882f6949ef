"""Summary figures for experiment batches.

Renders the displacement-versus-sensor-count comparison (mean of per-run
average displacement, and mean of per-run maximum displacement) to PNG
files next to the CSV. Headless backend; nothing is shown interactively.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .harness import ExperimentRow, aggregate_summary

_LABELS = {"nonlinear": "chain formation", "linear_baseline": "linear baseline"}
_MARKERS = {"nonlinear": "o", "linear_baseline": "s"}


def displacement_figures(
    rows: list[ExperimentRow], out_dir: str | Path, stem: str = "displacement"
) -> list[Path]:
    """One figure per metric: mean avg and mean max displacement vs N."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summary = aggregate_summary(rows)
    algorithms = sorted({alg for alg, _ in summary})
    paths = []
    for metric, title in (("mean_avg", "Average displacement"), ("mean_max", "Maximum displacement")):
        fig, ax = plt.subplots(figsize=(6.4, 4.2))
        for alg in algorithms:
            ns = sorted(n for a, n in summary if a == alg)
            ys = [getattr(summary[(alg, n)], metric) for n in ns]
            ax.plot(ns, ys, marker=_MARKERS.get(alg, "^"), label=_LABELS.get(alg, alg))
        ax.set_xlabel("number of sensors")
        ax.set_ylabel("displacement (m)")
        ax.set_title(title)
        ax.grid(True, alpha=0.3)
        ax.legend()
        fig.tight_layout()
        path = out / f"{stem}_{metric.split('_')[1]}.png"
        fig.savefig(path, dpi=150)
        plt.close(fig)
        paths.append(path)
    return paths

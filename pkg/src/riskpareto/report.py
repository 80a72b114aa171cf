"""Matplotlib figure rendering for run and benchmark reports."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .benchmarks import ExperimentResult
from .optimizer import RunHistory

__all__ = ["render_benchmark_curves", "render_run_figures"]

_METRIC_LABELS = {
    "inference_discrepancy": "inference discrepancy",
    "phv_regret": "hypervolume regret",
}

plt.rcParams.update({
    "figure.dpi": 120,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
})


def render_benchmark_curves(result: ExperimentResult, out_dir: Path) -> list[Path]:
    """One figure per metric: mean curve with a standard-error band per method."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for metric, label in _METRIC_LABELS.items():
        fig, ax = plt.subplots(figsize=(5.0, 3.4))
        drew = False
        for method in result.methods:
            agg = result.curves[method][metric]
            mean, err = agg["mean"], agg["stderr"]
            if np.all(np.isnan(mean)):
                continue
            t = np.arange(len(mean))
            ax.plot(t, mean, label=method, lw=1.4)
            ax.fill_between(t, mean - err, mean + err, alpha=0.2)
            drew = True
        if not drew:
            plt.close(fig)
            continue
        ax.set_xlabel("iteration")
        ax.set_ylabel(label)
        ax.set_title(f"{result.name} ({result.trials} trials)")
        ax.legend(frameon=False)
        fig.tight_layout()
        path = out_dir / f"{metric}.png"
        fig.savefig(path)
        plt.close(fig)
        written.append(path)
    return written


def render_run_figures(histories: Sequence[RunHistory], out_dir: Path) -> list[Path]:
    """Convergence trace and, for two risk measures, the final bounding boxes."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    for trial, hist in enumerate(histories):
        t = [r.iteration for r in hist.records]
        ax.plot(t, [r.af_value for r in hist.records], lw=1.2,
                label="acquisition" if trial == 0 else None, color="C0", alpha=0.8)
        bounds = [r.termination_bound for r in hist.records]
        if not all(np.isnan(b) for b in bounds):
            ax.plot(t, bounds, lw=1.0, ls="--", color="C1", alpha=0.8,
                    label="width bound" if trial == 0 else None)
    ax.set_xlabel("iteration")
    ax.set_ylabel("value")
    ax.set_yscale("log")
    ax.legend(frameon=False)
    fig.tight_layout()
    path = out_dir / "convergence.png"
    fig.savefig(path)
    plt.close(fig)
    written.append(path)

    box = histories[0].final_box if histories else None
    if box is not None and box.n_objectives == 2:
        fig, ax = plt.subplots(figsize=(4.4, 4.0))
        members = set(histories[0].pi_hat)
        for x in range(box.n_design):
            lo, hi = box.lcb[x], box.ucb[x]
            on_front = x in members
            ax.add_patch(plt.Rectangle(lo, hi[0] - lo[0], hi[1] - lo[1], fill=False,
                                       ec="C3" if on_front else "0.7",
                                       lw=1.2 if on_front else 0.6))
        front = box.lcb[sorted(members)]
        ax.plot(front[:, 0], front[:, 1], "o", ms=3, color="C3", label="LCB front")
        ax.set_xlabel("risk measure 1")
        ax.set_ylabel("risk measure 2")
        ax.relim()
        ax.autoscale_view()
        ax.legend(frameon=False)
        fig.tight_layout()
        path = out_dir / "bounding_boxes.png"
        fig.savefig(path)
        plt.close(fig)
        written.append(path)
    return written

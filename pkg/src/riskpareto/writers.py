"""Deterministic CSV/JSON writers for run and benchmark outputs.

Floats are serialized with 17 significant digits so that equal runs produce
byte-identical files and values round-trip exactly.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Sequence

import numpy as np

from .optimizer import RunHistory

__all__ = [
    "HISTORY_COLUMNS",
    "fmt_float",
    "write_curves_csv",
    "write_history_csv",
    "write_pareto_csv",
    "write_summary_json",
]

HISTORY_COLUMNS = ("trial", "iter", "design_index", "env_index", "af_value",
                   "env_af_value", "inference_discrepancy", "phv_regret",
                   "termination_bound", "stopped")


def fmt_float(x: float) -> str:
    """17-significant-digit text form; NaN becomes the empty field."""
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return f"{float(x):.17g}"


def _json_ready(obj):
    if isinstance(obj, dict):
        return {k: _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_ready(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return None if math.isnan(v) or math.isinf(v) else v
    if isinstance(obj, np.ndarray):
        return _json_ready(obj.tolist())
    return obj


def write_history_csv(path: Path, histories: Sequence[RunHistory]) -> None:
    lines = [",".join(HISTORY_COLUMNS)]
    for trial, hist in enumerate(histories):
        for rec in hist.records:
            lines.append(",".join([
                str(trial), str(rec.iteration), str(rec.design_index),
                str(rec.env_index), fmt_float(rec.af_value), fmt_float(rec.env_af_value),
                fmt_float(rec.inference_discrepancy), fmt_float(rec.phv_regret),
                fmt_float(rec.termination_bound), "true" if rec.stopped else "false",
            ]))
    Path(path).write_text("\n".join(lines) + "\n")


def write_pareto_csv(path: Path, histories: Sequence[RunHistory]) -> None:
    n_risk = 0
    for h in histories:
        if h.final_box is not None:
            n_risk = h.final_box.n_objectives
            break
    header = (["trial", "design_index"]
              + [f"lcb_{j}" for j in range(n_risk)] + [f"ucb_{j}" for j in range(n_risk)])
    lines = [",".join(header)]
    for trial, hist in enumerate(histories):
        if hist.final_box is None:
            continue
        for x in hist.pi_hat:
            row = [str(trial), str(x)]
            row += [fmt_float(v) for v in hist.final_box.lcb[x]]
            row += [fmt_float(v) for v in hist.final_box.ucb[x]]
            lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n")


def write_summary_json(path: Path, histories: Sequence[RunHistory],
                       wall_time_s: float, extra: dict | None = None) -> None:
    trials = [{
        "pi_hat": sorted(int(i) for i in h.pi_hat),
        "guarantee": h.guarantee,
        "guarantee_flagged": h.guarantee_flagged,
        "stop_reason": h.stop_reason,
        "iterations": h.iterations,
        "evaluation_count": h.evaluation_count,
    } for h in histories]
    doc = {
        "pi_hat": trials[0]["pi_hat"] if trials else [],
        "guarantee": trials[0]["guarantee"] if trials else None,
        "stop_reason": trials[0]["stop_reason"] if trials else None,
        "trials": trials,
        "wall_time_s": round(float(wall_time_s), 3),
    }
    if extra:
        doc.update(extra)
    Path(path).write_text(json.dumps(_json_ready(doc), indent=2, sort_keys=True) + "\n")


def write_curves_csv(path: Path, curves: dict[str, dict[str, dict[str, np.ndarray]]]) -> None:
    """Aggregate benchmark curves: method, metric, iter, mean, stderr."""
    lines = ["method,metric,iter,mean,stderr"]
    for method in sorted(curves):
        for metric in sorted(curves[method]):
            agg = curves[method][metric]
            for t, (m, s) in enumerate(zip(agg["mean"], agg["stderr"])):
                lines.append(f"{method},{metric},{t},{fmt_float(m)},{fmt_float(s)}")
    Path(path).write_text("\n".join(lines) + "\n")

"""Command-line entry point: run a configured optimization or benchmark.

Exit codes: 0 success (including budget stops), 2 configuration error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from .benchmarks import build_truth, replicate_experiment
from .config import ConfigError, RunConfig, parse_config
from .gp import GPFactorizationError
from .optimizer import run as run_optimizer
from .rng import substream_seed
from .writers import (write_curves_csv, write_history_csv, write_pareto_csv,
                      write_summary_json)

__all__ = ["main"]


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="riskpareto",
        description="Pareto-front identification of risk measures for black-box "
                    "functions under input uncertainty.")
    p.add_argument("--config", required=True, help="YAML run configuration")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--out", default=None, help="override the output directory")
    p.add_argument("--trials", type=int, default=None, help="override the trial count")
    return p


def _run_problem(cfg: RunConfig, out_dir: Path) -> int:
    problem = cfg.build_problem()
    gp_configs = cfg.build_gp_configs()
    schedule = cfg.build_schedule()
    truth = build_truth(problem).values if cfg.data["problem"]["compute_truth"] else None

    def one_trial(trial: int):
        seed = int(substream_seed(cfg.seed, "trial", trial).generate_state(1)[0])
        return run_optimizer(problem, gp_configs, schedule, seed, truth=truth)

    start = time.perf_counter()
    workers = cfg.output["workers"]
    if workers > 1 and cfg.trials > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=workers) as pool:
            histories = list(pool.map(one_trial, range(cfg.trials)))
    else:
        histories = [one_trial(t) for t in range(cfg.trials)]
    wall = time.perf_counter() - start

    write_history_csv(out_dir / "history.csv", histories)
    write_pareto_csv(out_dir / "pareto.csv", histories)
    write_summary_json(out_dir / "summary.json", histories, wall)
    if cfg.output["figures"]:
        from .report import render_run_figures
        render_run_figures(histories, out_dir / "figures")
    return 0


def _run_benchmark(cfg: RunConfig, out_dir: Path) -> int:
    b = cfg.data["benchmark"]
    start = time.perf_counter()
    result = replicate_experiment(b["name"], trials=b["trials"], budget=b["budget"],
                                  seed=cfg.seed, methods=tuple(b["methods"]),
                                  mode=b["mode"], workers=cfg.output["workers"])
    wall = time.perf_counter() - start
    for method in result.methods:
        mdir = out_dir / method
        mdir.mkdir(parents=True, exist_ok=True)
        write_history_csv(mdir / "history.csv", result.histories[method])
        write_pareto_csv(mdir / "pareto.csv", result.histories[method])
    write_curves_csv(out_dir / "curves.csv", result.curves)
    finals = {
        method: {metric: (None if np.all(np.isnan(agg["mean"]))
                          else float(agg["mean"][-1]))
                 for metric, agg in result.curves[method].items()}
        for method in result.methods}
    write_summary_json(out_dir / "summary.json", result.histories[result.methods[0]],
                       wall, extra={
        "benchmark": b["name"], "methods": list(result.methods),
        "budget": b["budget"], "bench_trials": b["trials"],
        "final_means": finals,
        "z_star": sorted(result.truth.z_star) if result.truth else [],
    })
    if cfg.output["figures"]:
        from .report import render_benchmark_curves
        render_benchmark_curves(result, out_dir)
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 2
    try:
        cfg = parse_config(text)
        data = dict(cfg.data)
        if args.seed is not None:
            data["seed"] = int(args.seed)
        if args.trials is not None:
            data["trials"] = int(args.trials)
            if "benchmark" in data:
                data["benchmark"] = dict(data["benchmark"], trials=int(args.trials))
        if args.out is not None:
            data["output"] = dict(data["output"], directory=args.out)
        cfg = RunConfig(data=data)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    out_dir = Path(cfg.output["directory"])
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        if cfg.is_benchmark:
            return _run_benchmark(cfg, out_dir)
        return _run_problem(cfg, out_dir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (GPFactorizationError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

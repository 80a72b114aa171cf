"""Synthetic benchmark suite, truth computation, and experiment replication.

The synthetic functions are the standardized, sign-flipped benchmark forms
(maximization orientation).  Truth tables evaluate every risk measure
exactly on the discrete environment, bypassing the band machinery, and feed
the inference-discrepancy and hypervolume-regret metrics.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .env import EnvModel, uniform_env
from .gp import KernelSpec, NoiseModel
from .optimizer import (BetaSchedule, GPConfig, Objective, ProblemSpec, RunHistory,
                        run, run_baseline)
from .pareto import pareto_front_indices
from .risk import RiskSpec, exact_risk
from .rng import substream_seed

__all__ = [
    "EXPERIMENTS",
    "SYNTHETIC_DIMS",
    "ExperimentResult",
    "TruthTable",
    "build_truth",
    "discretized_normal",
    "discretized_normal_weights",
    "eval_synthetic",
    "experiment_setup",
    "grid_points",
    "neg_std_risk",
    "replicate_experiment",
]


# ---------------------------------------------------------------------------
# standardized synthetic functions


def _booth(v):
    x1, x2 = v
    return (-(x1 + 2 * x2 - 7) ** 2 - (2 * x1 + x2 - 5) ** 2 + 157.35) / np.sqrt(28896.11)


def _matyas(v):
    x1, x2 = v
    return (-0.26 * (x1 ** 2 + x2 ** 2) + 0.48 * x1 * x2 + 4.3342) / np.sqrt(23.52052)


def _himmelblau(v):
    x1, x2 = v
    return (-(x1 ** 2 + x2 - 11) ** 2 - (x1 + x2 ** 2 - 7) ** 2 + 136.71) / np.sqrt(12503.63)


def _mccormick(v):
    x1, x2 = v
    return (-np.sin(x1 + x2) - (x1 - x2) ** 2 + 1.5 * x1 - 2.5 * x2 - 1 + 17.67) / np.sqrt(460.573)


def _zdt1_pair(v):
    a1, a2 = v
    g1 = a1
    h = 1 + 9 * a2
    g2 = h - np.sqrt(np.maximum(g1 * h, 0.0))
    return (-(g1 - 0.5) / np.sqrt(0.042), -(g2 - 3.9085) / np.sqrt(2.5615))


def _zdt1_f1(v):
    return _zdt1_pair(v)[0]


def _zdt1_f2(v):
    return _zdt1_pair(v)[1]


def _rosenbrock6(v):
    a = np.asarray(v, float)
    s = 0.0
    for i in range(5):
        s += 100.0 * (a[i + 1] - a[i] ** 2) ** 2 + (1 - a[i]) ** 2
    return (273.45 - s) / np.sqrt(28153.22)


_SYNTHETIC: dict[str, Callable] = {
    "booth": _booth,
    "matyas": _matyas,
    "himmelblau": _himmelblau,
    "mccormick": _mccormick,
    "zdt1_f1": _zdt1_f1,
    "zdt1_f2": _zdt1_f2,
    "rosenbrock6": _rosenbrock6,
}

SYNTHETIC_DIMS = {"booth": 2, "matyas": 2, "himmelblau": 2, "mccormick": 2,
                  "zdt1_f1": 2, "zdt1_f2": 2, "rosenbrock6": 6}


def eval_synthetic(kind: str, v: Sequence[float]) -> float:
    """Evaluate a standardized benchmark function at one input vector."""
    if kind not in _SYNTHETIC:
        raise ValueError(f"unknown synthetic function {kind!r}")
    v = np.asarray(v, float).ravel()
    if v.shape[0] != SYNTHETIC_DIMS[kind]:
        raise ValueError(f"{kind} expects {SYNTHETIC_DIMS[kind]} inputs, got {v.shape[0]}")
    return float(_SYNTHETIC[kind](v))


# ---------------------------------------------------------------------------
# environment distributions and grids


def discretized_normal_weights(support: Sequence[Sequence[float]]) -> np.ndarray:
    """Weights proportional to the standard normal density at each point."""
    pts = np.atleast_2d(np.asarray(support, float))
    if pts.shape[0] == 0:
        raise ValueError("empty support")
    logd = -0.5 * np.sum(pts * pts, axis=1)
    w = np.exp(logd - logd.max())
    return w / w.sum()


def discretized_normal(support: Sequence[Sequence[float]]) -> EnvModel:
    """Environment model with density-proportional weights on the support."""
    w = discretized_normal_weights(support)
    return EnvModel(support=tuple(range(len(w))), weights=tuple(w),
                    distribution_kind="discretized_normal")


def grid_points(lower: Sequence[float], upper: Sequence[float],
                counts: Sequence[int]) -> np.ndarray:
    """Cartesian product of equally spaced axes, row per point."""
    axes = [np.linspace(lo, hi, int(n)) for lo, hi, n in zip(lower, upper, counts)]
    return np.array(list(itertools.product(*axes)), float).reshape(-1, len(axes))


def neg_std_risk(objective_index: int = 0, rkhs_bound: float = 1.0) -> RiskSpec:
    """Negative standard deviation as a monotone unit-Lipschitz map of std."""
    return RiskSpec(kind="lipschitz",
                    inner=RiskSpec(kind="std", objective_index=objective_index,
                                   rkhs_bound=rkhs_bound),
                    mapping=lambda v: -v, lipschitz_constant=1.0,
                    objective_index=objective_index, label="neg_std")


# ---------------------------------------------------------------------------
# truth tables


@dataclass(frozen=True)
class TruthTable:
    """Exact risk vectors per design point and the true Pareto-optimal set."""

    values: np.ndarray
    z_star: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", np.atleast_2d(np.asarray(self.values, float)))


def build_truth(problem: ProblemSpec) -> TruthTable:
    """Evaluate every risk measure exactly (noise-free) on the grids."""
    n_x = problem.design_grid.shape[0]
    values = np.empty((n_x, problem.num_risks))
    for x in range(n_x):
        view = problem.env_model.view_for(x)
        sup = np.asarray(view.support, int)
        fvals = {m: np.array([problem.objectives[m].fn(problem.design_grid[x],
                                                       problem.env_grid[w]) for w in sup])
                 for m in range(problem.num_objectives)}
        for li, spec in enumerate(problem.risks):
            values[x, li] = exact_risk(spec, fvals, view)
    z_star = tuple(int(i) for i in pareto_front_indices(values))
    return TruthTable(values=values, z_star=z_star)


# ---------------------------------------------------------------------------
# experiment definitions (desk-scale reductions of the published setups)


def _objective_from_synthetic(kind: str, wiring: str) -> Objective:
    fn = _SYNTHETIC[kind]
    if wiring == "x":
        return Objective(fn=lambda x, w: float(fn(x)), noise_std=1e-3)
    if wiring == "x_plus_w":
        return Objective(fn=lambda x, w: float(fn(x + w)), noise_std=1e-3)
    raise ValueError(f"unknown wiring {wiring!r}")


def _zdt1_iu_setup() -> tuple[ProblemSpec, list[GPConfig], BetaSchedule]:
    design = grid_points([0.25, 0.25], [0.75, 0.75], [12, 12])
    envg = grid_points([-0.25, -0.25], [0.25, 0.25], [5, 5])
    problem = ProblemSpec(
        design_grid=design, env_grid=envg, env_model=uniform_env(envg.shape[0]),
        objectives=(_objective_from_synthetic("zdt1_f1", "x_plus_w"),
                    _objective_from_synthetic("zdt1_f2", "x_plus_w")),
        risks=(RiskSpec(kind="bayes", objective_index=0),
               RiskSpec(kind="bayes", objective_index=1)),
        mode="simulator", epsilon=None, budget=150, init_points=1)
    gp = [GPConfig(kernel=KernelSpec(length_scale=0.2), noise=NoiseModel(variance=1e-6))
          for _ in range(2)]
    return problem, gp, BetaSchedule(kind="fixed", value=3.0)


def _rosenbrock_iu_setup() -> tuple[ProblemSpec, list[GPConfig], BetaSchedule]:
    design = grid_points([-1] * 3, [1] * 3, [5, 5, 5])
    envg = grid_points([-1] * 3, [1] * 3, [5, 5, 5])
    env_model = EnvModel(support=tuple(range(envg.shape[0])),
                         weights=tuple(discretized_normal_weights(envg)),
                         distribution_kind="discretized_normal")
    fn = _SYNTHETIC["rosenbrock6"]

    def joint(x, w):
        return float(fn(np.array([w[0], w[1], x[0], x[1], x[2], w[2]])))

    problem = ProblemSpec(
        design_grid=design, env_grid=envg, env_model=env_model,
        objectives=(Objective(fn=joint, noise_std=1e-3),),
        risks=(RiskSpec(kind="bayes", objective_index=0), neg_std_risk(0)),
        mode="simulator", epsilon=None, budget=150, init_points=1)
    gp = [GPConfig(kernel=KernelSpec(length_scale=4.0), noise=NoiseModel(variance=1e-6))]
    return problem, gp, BetaSchedule(kind="fixed", value=3.0)


def _no_iu_setup() -> tuple[ProblemSpec, list[GPConfig], BetaSchedule]:
    design = grid_points([-5, -5], [5, 5], [25, 25])
    envg = np.zeros((1, 1))
    problem = ProblemSpec(
        design_grid=design, env_grid=envg, env_model=uniform_env(1),
        objectives=(_objective_from_synthetic("booth", "x"),
                    _objective_from_synthetic("matyas", "x")),
        risks=(RiskSpec(kind="bayes", objective_index=0),
               RiskSpec(kind="bayes", objective_index=1)),
        mode="simulator", epsilon=None, budget=100, init_points=1)
    gp = [GPConfig(kernel=KernelSpec(length_scale=2.0, variance=2.0),
                   noise=NoiseModel(variance=1e-6)) for _ in range(2)]
    return problem, gp, BetaSchedule(kind="fixed", value=3.0)


EXPERIMENTS: dict[str, Callable[[], tuple[ProblemSpec, list[GPConfig], BetaSchedule]]] = {
    "zdt1_iu": _zdt1_iu_setup,
    "rosenbrock_iu": _rosenbrock_iu_setup,
    "two_objective_no_iu": _no_iu_setup,
}


def experiment_setup(name: str, budget: int | None = None,
                     mode: str | None = None) -> tuple[ProblemSpec, list[GPConfig], BetaSchedule]:
    if name not in EXPERIMENTS:
        raise ValueError(f"unknown experiment {name!r}; choose from {sorted(EXPERIMENTS)}")
    problem, gp, schedule = EXPERIMENTS[name]()
    updates = {}
    if budget is not None:
        updates["budget"] = int(budget)
    if mode is not None:
        updates["mode"] = mode
    if updates:
        from dataclasses import replace
        problem = replace(problem, **updates)
    return problem, gp, schedule


# ---------------------------------------------------------------------------
# replication harness


@dataclass
class ExperimentResult:
    name: str
    methods: tuple[str, ...]
    budget: int
    trials: int
    histories: dict[str, list[RunHistory]] = field(default_factory=dict)
    curves: dict[str, dict[str, np.ndarray]] = field(default_factory=dict)
    truth: TruthTable | None = None


def _curve(histories: list[RunHistory], attr: str, budget: int) -> np.ndarray:
    rows = np.full((len(histories), budget), np.nan)
    for i, h in enumerate(histories):
        vals = [getattr(r, attr) for r in h.records]
        # a stopped run holds its last metric value for the remaining budget
        if vals:
            vals = vals + [vals[-1]] * (budget - len(vals))
        rows[i, :] = vals[:budget]
    return rows


def _aggregate(rows: np.ndarray) -> dict[str, np.ndarray]:
    mean = np.nanmean(rows, axis=0)
    n = rows.shape[0]
    stderr = (np.nanstd(rows, axis=0, ddof=1) / np.sqrt(n)) if n > 1 else np.zeros(rows.shape[1])
    return {"mean": mean, "stderr": stderr, "rows": rows}


def run_trial(name: str, method: str, trial: int, seed: int, budget: int,
              truth_values: np.ndarray, mode: str | None = None) -> RunHistory:
    """One seeded trial of one method; trial substreams are method-agnostic
    for the shared parts (the initial point) and method-specific elsewhere."""
    problem, gp, schedule = experiment_setup(name, budget=budget, mode=mode)
    trial_seed = int(substream_seed(seed, "trial", trial).generate_state(1)[0])
    if method == "proposed":
        return run(problem, gp, schedule, trial_seed, truth=truth_values)
    return run_baseline(method, problem, gp, schedule, trial_seed, truth=truth_values)


def replicate_experiment(name: str, trials: int, budget: int, seed: int,
                         methods: Sequence[str] = ("proposed", "random", "us"),
                         mode: str | None = None,
                         workers: int = 1) -> ExperimentResult:
    """Run the named experiment for every method with shared per-trial seeds.

    Emits mean and standard-error curves of the inference discrepancy (and
    hypervolume regret, where defined) over iterations.
    """
    problem, _, _ = experiment_setup(name, budget=budget, mode=mode)
    truth = build_truth(problem)
    result = ExperimentResult(name=name, methods=tuple(methods), budget=budget,
                              trials=trials, truth=truth)

    jobs = [(method, trial) for method in methods for trial in range(trials)]
    outputs: dict[tuple[str, int], RunHistory] = {}
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futs = {key: pool.submit(run_trial, name, key[0], key[1], seed, budget,
                                     truth.values, mode) for key in jobs}
            outputs = {key: f.result() for key, f in futs.items()}
    else:
        for key in jobs:
            outputs[key] = run_trial(name, key[0], key[1], seed, budget, truth.values, mode)

    for method in methods:
        hist = [outputs[(method, t)] for t in range(trials)]
        result.histories[method] = hist
        result.curves[method] = {
            "inference_discrepancy": _aggregate(_curve(hist, "inference_discrepancy", budget)),
            "phv_regret": _aggregate(_curve(hist, "phv_regret", budget)),
        }
    return result

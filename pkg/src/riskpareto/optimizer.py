"""Outer optimization loop: bounding boxes, acquisition, stopping, baselines.

One iteration builds credible bands from the GP posteriors, turns them into
per-design risk intervals and bounding boxes, estimates the Pareto set from
the LCB front, picks the design point with the largest Chebyshev distance
from its UCB vector to the dominated region, checks the stopping rule before
observing, then (simulator setting) picks the environment point with the
largest summed scaled posterior deviation, or (uncontrollable setting) draws
it from the environment distribution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from . import gp as gplib
from .env import EnvModel
from .gp import GPState, JointGrid, JointPoint, KernelSpec, NoiseModel
from .pareto import (BoxTable, build_box_table, front_distances, hypervolume,
                     inference_discrepancy, pareto_front_indices, phv_regret)
from .risk import (Band, RiskSpec, UnsupportedRiskError, bound_decomposition,
                   bound_sampling, q_function)
from .rng import substream, substream_seed

__all__ = [
    "BetaSchedule",
    "BoundMethod",
    "ErrorParams",
    "GPConfig",
    "IterationRecord",
    "Objective",
    "ProblemSpec",
    "RunHistory",
    "RunState",
    "beta_sqrts",
    "compute_box_table",
    "guarantee_report",
    "initialize",
    "median_heuristic_length_scale",
    "run",
    "run_baseline",
    "sample_env_uncontrollable",
    "select_design",
    "select_env",
    "step",
    "termination_bound",
]

BASELINE_KINDS = ("random", "us", "naive_random", "naive_us")


# ---------------------------------------------------------------------------
# configuration types


@dataclass(frozen=True)
class BetaSchedule:
    """Tradeoff-parameter schedule producing beta^(1/2) per objective.

    kinds
    -----
    fixed        constant ``value`` (experiments use 3).
    theoretical  B_m sqrt(lambda_m) + sqrt(2 (gain_m + log(M/delta))), with the
                 realized information gain standing in for the maximum one, so
                 this schedule is a heuristic rather than a certified bound.
    srinivas     sqrt(2 log(2 G pi^2 t^2 / (6 delta))) on a G-point grid.
    sampled      sqrt(2 log(2 G / 2) + r_t), r_t exponential with mean ``rate``.
    """

    kind: str = "fixed"
    value: float = 3.0
    delta: float = 0.1
    rate: float = 0.5

    def __post_init__(self):
        if self.kind not in ("fixed", "theoretical", "srinivas", "sampled"):
            raise ValueError(f"unknown beta schedule {self.kind!r}")
        if self.kind == "fixed" and self.value < 0:
            raise ValueError("fixed beta^(1/2) must be nonnegative")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")


def beta_sqrts(schedule: BetaSchedule, t: int, *, num_objectives: int, grid_size: int,
               rkhs_bounds: Sequence[float] | None = None,
               gp_states: Sequence[GPState] | None = None,
               rng: np.random.Generator | None = None) -> np.ndarray:
    """beta^(1/2) values for iteration ``t`` (0-based), one per objective."""
    m = num_objectives
    if schedule.kind == "fixed":
        return np.full(m, schedule.value)
    if schedule.kind == "srinivas":
        tt = t + 1
        return np.full(m, math.sqrt(2.0 * math.log(2.0 * grid_size * math.pi ** 2 * tt ** 2
                                                   / (6.0 * schedule.delta))))
    if schedule.kind == "sampled":
        r = rng.exponential(scale=schedule.rate)
        return np.full(m, math.sqrt(2.0 * math.log(2.0 * grid_size / 2.0) + r))
    # theoretical
    out = np.empty(m)
    for i in range(m):
        b = rkhs_bounds[i] if rkhs_bounds is not None else 1.0
        state = gp_states[i]
        gain = gplib.realized_information_gain(state)
        out[i] = b * math.sqrt(state.kernel.scaling) + math.sqrt(2.0 * (gain + math.log(m / schedule.delta)))
    return out


@dataclass(frozen=True)
class Objective:
    """Black-box objective over (design, environment) coordinates."""

    fn: Callable[[np.ndarray, np.ndarray], float]
    noise_std: float = 0.0


@dataclass(frozen=True)
class GPConfig:
    kernel: KernelSpec
    noise: NoiseModel
    jitter: float = gplib.DEFAULT_JITTER


@dataclass(frozen=True)
class ErrorParams:
    """Nonnegative approximation-error parameters (lcb, ucb, PF, X, Omega)."""

    lcb: float = 0.0
    ucb: float = 0.0
    pf: float = 0.0
    design: float = 0.0
    env: float = 0.0

    def __post_init__(self):
        for name in ("lcb", "ucb", "pf", "design", "env"):
            if getattr(self, name) < 0:
                raise ValueError(f"error parameter {name} must be nonnegative")


@dataclass(frozen=True)
class BoundMethod:
    kind: str = "decomposition"
    sample_count: int = 64

    def __post_init__(self):
        if self.kind not in ("decomposition", "sampling"):
            raise ValueError(f"unknown bound method {self.kind!r}")
        if self.kind == "sampling" and self.sample_count < 1:
            raise ValueError("sampling bound method needs sample_count >= 1")


@dataclass(frozen=True)
class ProblemSpec:
    """Full problem description consumed by the optimization loop."""

    design_grid: np.ndarray
    env_grid: np.ndarray
    env_model: EnvModel
    objectives: tuple[Objective, ...]
    risks: tuple[RiskSpec, ...]
    mode: str = "simulator"
    bound_method: BoundMethod = BoundMethod()
    epsilon: float | None = None
    budget: int = 100
    error_params: ErrorParams = ErrorParams()
    init_points: int = 0

    def __post_init__(self):
        object.__setattr__(self, "design_grid", np.atleast_2d(np.asarray(self.design_grid, float)))
        object.__setattr__(self, "env_grid", np.atleast_2d(np.asarray(self.env_grid, float)))
        object.__setattr__(self, "objectives", tuple(self.objectives))
        object.__setattr__(self, "risks", tuple(self.risks))
        if len(self.risks) < 2:
            raise ValueError("need at least two risk measures (L >= 2)")
        if self.mode not in ("simulator", "uncontrollable"):
            raise ValueError(f"unknown mode {self.mode!r}")
        for r in self.risks:
            if max(r.objectives()) >= len(self.objectives):
                raise ValueError("risk references a missing objective")
        if self.budget < 0:
            raise ValueError("budget must be nonnegative")

    @property
    def grid(self) -> JointGrid:
        return JointGrid(self.design_grid, self.env_grid)

    @property
    def num_objectives(self) -> int:
        return len(self.objectives)

    @property
    def num_risks(self) -> int:
        return len(self.risks)

    def has_certificate(self) -> bool:
        return all(r.kind != "prob_threshold" for r in self.risks)


# ---------------------------------------------------------------------------
# history


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    design_index: int
    env_index: int
    af_value: float
    env_af_value: float
    pi_hat: tuple[int, ...]
    inference_discrepancy: float
    phv_regret: float
    termination_bound: float
    stopped: bool


@dataclass
class RunHistory:
    records: list[IterationRecord] = field(default_factory=list)
    stop_reason: str = "budget"
    pi_hat: tuple[int, ...] = ()
    guarantee: float = float("nan")
    guarantee_flagged: bool = False
    evaluation_count: int = 0
    final_box: BoxTable | None = None

    @property
    def iterations(self) -> int:
        return len(self.records)


# ---------------------------------------------------------------------------
# per-iteration building blocks


# kinds whose decomposition row is a plain weighted sum / min / max over the
# support, vectorizable across all design points at once
_VECTOR_KINDS = frozenset({"bayes", "worst_case", "best_case"})


def _vectorized_intervals(spec, lo, hi, sup, w):
    # lo/hi: (n_x, n_w) band matrices; returns (lcb, ucb) columns
    if spec.kind == "bayes":
        return lo[:, sup] @ w, hi[:, sup] @ w
    if spec.kind == "worst_case":
        return lo[:, sup].min(axis=1), hi[:, sup].min(axis=1)
    return lo[:, sup].max(axis=1), hi[:, sup].max(axis=1)


def compute_box_table(gp_states: Sequence[GPState], problem: ProblemSpec,
                      betas: np.ndarray, *, sampling_seed: int = 0) -> BoxTable:
    """Risk intervals for every design point, assembled into a box table."""
    grid = gp_states[0].grid
    n_x, n_w = grid.n_design, grid.n_env
    mu = np.empty((len(gp_states), n_x, n_w))
    sd = np.empty_like(mu)
    for m, state in enumerate(gp_states):
        mean, std = gplib.posterior_grid(state)
        mu[m] = mean.reshape(n_x, n_w)
        sd[m] = std.reshape(n_x, n_w)

    sampling = problem.bound_method.kind == "sampling"
    fast = (not sampling and problem.env_model.mode == "shared"
            and all(r.kind in _VECTOR_KINDS for r in problem.risks))
    if fast:
        sup = np.asarray(problem.env_model.support, int)
        w = np.asarray(problem.env_model.weights, float)
        lcb = np.empty((n_x, problem.num_risks))
        ucb = np.empty_like(lcb)
        for li, spec in enumerate(problem.risks):
            m = spec.objective_index
            lo = mu[m] - betas[m] * sd[m]
            hi = mu[m] + betas[m] * sd[m]
            lcb[:, li], ucb[:, li] = _vectorized_intervals(spec, lo, hi, sup, w)
        return BoxTable(lcb, ucb)

    states_map = dict(enumerate(gp_states))
    betas_map = {m: float(betas[m]) for m in range(len(gp_states))}
    intervals = []
    for x in range(n_x):
        view = problem.env_model.view_for(x)
        sup = np.asarray(view.support, int)
        bands = {m: Band(mu[m, x, sup] - betas[m] * sd[m, x, sup],
                         mu[m, x, sup] + betas[m] * sd[m, x, sup])
                 for m in range(len(gp_states))}
        row = []
        for li, spec in enumerate(problem.risks):
            if sampling:
                seed = substream_seed(sampling_seed, "bound-sampling", x, li).generate_state(1)[0]
                row.append(bound_sampling(spec, states_map, x, problem.env_model,
                                          betas_map, problem.bound_method.sample_count,
                                          int(seed)))
            else:
                row.append(bound_decomposition(spec, bands, view))
        intervals.append(row)
    return build_box_table(intervals)


def acquisition_values(box_table: BoxTable, front_indices: np.ndarray | None = None) -> np.ndarray:
    """a(x) for every design point: distance of UCB(x) to Dom(LCB front)."""
    if front_indices is None:
        front_indices = box_table.pi_hat()
    front = box_table.lcb[front_indices]
    gaps = np.max(box_table.ucb[:, None, :] - front[None, :, :], axis=2)
    return np.maximum(gaps.min(axis=1), 0.0)


def select_design(box_table: BoxTable) -> tuple[int, float]:
    """Design index maximizing the acquisition, lowest index on ties."""
    af = acquisition_values(box_table)
    idx = int(np.argmax(af))
    return idx, float(af[idx])


def select_env(gp_states: Sequence[GPState], design_index: int, betas: Sequence[float],
               env_support: Sequence[int]) -> tuple[int, float]:
    """Environment index maximizing the summed scaled posterior deviations."""
    support = [int(j) for j in env_support]
    if not support:
        raise ValueError("empty environment support")
    pts = [JointPoint(design_index, j) for j in support]
    total = np.zeros(len(support))
    for m, state in enumerate(gp_states):
        _, sd = gplib.posterior_many(state, pts)
        total += 2.0 * betas[m] * sd
    k = int(np.argmax(total))
    return support[k], float(total[k])


def sample_env_uncontrollable(env_model: EnvModel, design_index: int,
                              rng: np.random.Generator | int) -> int:
    """Draw the next environment index from the (design-dependent) distribution."""
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    return env_model.sample_index(design_index, rng)


def termination_bound(risks: Sequence[RiskSpec], gp_states: Sequence[GPState],
                      betas: Sequence[float], t: int,
                      error_params: ErrorParams = ErrorParams()) -> float:
    """Width-bound diagnostic eps_PF + q(eps_Omega + s_t).

    s_t uses the realized information gain in place of the maximum one, so
    the reported value is a monitoring proxy rather than a certified bound.
    """
    m_count = len(gp_states)
    total = 0.0
    for m, state in enumerate(gp_states):
        floor = max(state.noise.floor(), state.jitter_abs)
        c_m = 8.0 * m_count / math.log1p(1.0 / (state.kernel.scaling * floor))
        gain = gplib.realized_information_gain(state)
        total += c_m * float(betas[m]) ** 2 * gain
    s_t = math.sqrt(total / (t + 1))
    q = max(q_function(r, error_params.env + s_t) for r in risks)
    return error_params.pf + q


def guarantee_report(history: RunHistory, error_params: ErrorParams,
                     epsilon: float | None) -> tuple[float, bool]:
    """Advertised accuracy eps + eps_lcb + eps_ucb + eps_X after an eps stop.

    A budget stop reports the last acquisition value plus the error terms
    instead, flagged.
    """
    extra = error_params.lcb + error_params.ucb + error_params.design
    if history.stop_reason == "epsilon" and epsilon is not None:
        return epsilon + extra, False
    last_af = history.records[-1].af_value if history.records else float("inf")
    return last_af + extra, True


def median_heuristic_length_scale(points: np.ndarray) -> float:
    """0.5 * median of pairwise squared distances (kernel exponent divisor)."""
    pts = np.atleast_2d(np.asarray(points, float))
    sq = np.sum(pts * pts, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * pts @ pts.T
    iu = np.triu_indices(pts.shape[0], k=1)
    med = float(np.median(d2[iu]))
    return max(0.5 * med, 1e-12)


# ---------------------------------------------------------------------------
# run state and stepping


@dataclass
class RunState:
    """Mutable state of one optimization run (single-writer)."""

    problem: ProblemSpec
    schedule: BetaSchedule
    method: str
    seed: int
    gp_states: list[GPState]
    truth: np.ndarray | None
    t: int = 0
    finished: bool = False
    stop_reason: str = "budget"
    records: list[IterationRecord] = field(default_factory=list)
    evaluated: set[int] = field(default_factory=set)
    evaluation_count: int = 0
    last_box: BoxTable | None = None
    final_pi: tuple[int, ...] | None = None
    truth_front: np.ndarray | None = None
    truth_ref: np.ndarray | None = None
    truth_full_hv: float = float("nan")
    rng_obs: np.random.Generator = None
    rng_env: np.random.Generator = None
    rng_baseline: np.random.Generator = None
    rng_schedule: np.random.Generator = None

    def current_betas(self) -> np.ndarray:
        problem = self.problem
        return beta_sqrts(self.schedule, self.t,
                          num_objectives=problem.num_objectives,
                          grid_size=problem.grid.n_design * problem.grid.n_env,
                          rkhs_bounds=[max((r.rkhs_bound for r in problem.risks
                                            if m in r.objectives()), default=1.0)
                                       for m in range(problem.num_objectives)],
                          gp_states=self.gp_states, rng=self.rng_schedule)

    def history(self) -> RunHistory:
        if self.final_pi is not None:
            pi = self.final_pi
        elif self.records:
            pi = self.records[-1].pi_hat
        elif self.last_box is not None:
            pi = tuple(int(i) for i in self.last_box.pi_hat())
        else:
            pi = ()
        h = RunHistory(records=list(self.records), stop_reason=self.stop_reason,
                       pi_hat=pi, evaluation_count=self.evaluation_count,
                       final_box=self.last_box)
        h.guarantee, h.guarantee_flagged = guarantee_report(
            h, self.problem.error_params, self.problem.epsilon)
        return h


def _observe(state: RunState, x: int, w: int) -> None:
    problem = state.problem
    xc = problem.design_grid[x]
    wc = problem.env_grid[w]
    for m, obj in enumerate(problem.objectives):
        y = float(obj.fn(xc, wc))
        if obj.noise_std > 0:
            y += obj.noise_std * state.rng_obs.standard_normal()
        state.gp_states[m] = gplib.update(state.gp_states[m], JointPoint(x, w), y)
    state.evaluated.add(x)
    state.evaluation_count += 1


def initialize(problem: ProblemSpec, gp_configs: Sequence[GPConfig],
               schedule: BetaSchedule, seed: int, truth: np.ndarray | None = None,
               method: str = "proposed") -> RunState:
    """Set up GP states, RNG substreams, and the initial random observations."""
    if method not in ("proposed", "random", "us"):
        raise ValueError(f"unknown method {method!r}")
    if len(gp_configs) != problem.num_objectives:
        raise ValueError("one GP config per objective is required")
    grid = problem.grid
    states = [gplib.prior_state(c.kernel, c.noise, grid, jitter=c.jitter) for c in gp_configs]
    state = RunState(
        problem=problem, schedule=schedule, method=method, seed=seed,
        gp_states=states, truth=None if truth is None else np.asarray(truth, float),
        rng_obs=substream(seed, "observation-noise"),
        rng_env=substream(seed, "env-draws"),
        rng_baseline=substream(seed, "baseline-random"),
        rng_schedule=substream(seed, "schedule"),
    )
    if state.truth is not None:
        F = state.truth
        state.truth_front = F[pareto_front_indices(F)]
        if F.shape[1] <= 4:
            state.truth_ref = F.min(axis=0)
            state.truth_full_hv = hypervolume(F, state.truth_ref)
    rng_init = substream(seed, "init")
    for _ in range(problem.init_points):
        x = int(rng_init.integers(grid.n_design))
        if problem.mode == "simulator":
            sup = problem.env_model.indices_for(x)
            w = int(sup[rng_init.integers(len(sup))])
        else:
            w = problem.env_model.sample_index(x, rng_init)
        _observe(state, x, w)
    return state


def _metrics(state: RunState, pi_hat: tuple[int, ...]) -> tuple[float, float]:
    if state.truth is None:
        return float("nan"), float("nan")
    images = state.truth[list(pi_hat)]
    est_front = images[pareto_front_indices(images)]
    disc = max(float(front_distances(state.truth_front, est_front).max()),
               float(front_distances(images, state.truth_front).max()))
    regret = float("nan")
    if state.truth_ref is not None:
        part = hypervolume(state.truth[sorted(state.evaluated)], state.truth_ref)
        regret = max(state.truth_full_hv - part, 0.0)
    return disc, regret


def _bound_or_nan(state: RunState, betas: np.ndarray) -> float:
    # no certificate for probabilistic-threshold risks, and the bound's
    # derivation assumes the simulator setting's environment choice
    if not state.problem.has_certificate() or state.problem.mode != "simulator":
        return float("nan")
    return termination_bound(state.problem.risks, state.gp_states, betas, state.t,
                             state.problem.error_params)


def step(state: RunState) -> RunState:
    """Execute one iteration of the loop; raises if already finished."""
    if state.finished:
        raise RuntimeError("run already finished")
    problem = state.problem
    betas = state.current_betas()
    box = compute_box_table(state.gp_states, problem, betas,
                            sampling_seed=substream_seed(state.seed, "gp-sampling",
                                                         state.t).generate_state(1)[0])
    state.last_box = box
    pi_idx = box.pi_hat()
    pi_hat = tuple(int(i) for i in pi_idx)
    af = acquisition_values(box, pi_idx)
    x_star = int(np.argmax(af))
    disc, regret = _metrics(state, pi_hat)

    # stopping precedes the selection of w and the observation
    if problem.epsilon is not None and float(af[x_star]) <= problem.epsilon:
        state.records.append(IterationRecord(
            iteration=state.t, design_index=x_star, env_index=-1,
            af_value=float(af[x_star]), env_af_value=float("nan"), pi_hat=pi_hat,
            inference_discrepancy=disc, phv_regret=regret,
            termination_bound=_bound_or_nan(state, betas), stopped=True))
        state.finished = True
        state.stop_reason = "epsilon"
        return state

    env_af = float("nan")
    if state.method == "proposed":
        x_next = x_star
    elif state.method == "random":
        x_next = int(state.rng_baseline.integers(problem.grid.n_design))
    else:
        x_next, w_us = _us_joint_argmax(state)

    if problem.mode == "uncontrollable":
        w_next = sample_env_uncontrollable(problem.env_model, x_next, state.rng_env)
    elif state.method == "proposed":
        w_next, env_af = select_env(state.gp_states, x_next, betas,
                                    problem.env_model.indices_for(x_next))
    else:
        if state.method == "random":
            sup = problem.env_model.indices_for(x_next)
            w_next = int(sup[state.rng_baseline.integers(len(sup))])
        else:
            w_next = w_us
        _, env_af = select_env(state.gp_states, x_next, betas, [w_next])

    _observe(state, x_next, w_next)
    state.records.append(IterationRecord(
        iteration=state.t, design_index=x_next, env_index=w_next,
        af_value=float(af[x_next]), env_af_value=env_af, pi_hat=pi_hat,
        inference_discrepancy=disc, phv_regret=regret,
        termination_bound=_bound_or_nan(state, betas), stopped=False))
    state.t += 1
    if state.t >= problem.budget:
        state.finished = True
        state.stop_reason = "budget"
    return state


def _us_joint_argmax(state: RunState) -> tuple[int, int]:
    """Uncertainty sampling: (x, w) maximizing the summed posterior variances."""
    problem = state.problem
    best = (-1.0, 0, 0)
    grid = state.gp_states[0].grid
    total = np.zeros(grid.n_design * grid.n_env)
    for s in state.gp_states:
        _, sd = gplib.posterior_grid(s)
        total += sd * sd
    total = total.reshape(grid.n_design, grid.n_env)
    for x in range(grid.n_design):
        sup = problem.env_model.indices_for(x)
        vals = total[x, sup]
        k = int(np.argmax(vals))
        if vals[k] > best[0]:
            best = (float(vals[k]), x, int(sup[k]))
    return best[1], best[2]


def run(problem: ProblemSpec, gp_configs: Sequence[GPConfig], schedule: BetaSchedule,
        seed: int, truth: np.ndarray | None = None, method: str = "proposed") -> RunHistory:
    """Run the loop to an epsilon stop or budget exhaustion."""
    state = initialize(problem, gp_configs, schedule, seed, truth=truth, method=method)
    if problem.budget == 0:
        state.finished = True
    while not state.finished:
        step(state)
    if state.stop_reason == "budget":
        # the returned estimate uses everything observed, including the
        # final iteration's data
        box = compute_box_table(state.gp_states, problem, state.current_betas(),
                                sampling_seed=substream_seed(state.seed, "gp-sampling",
                                                             state.t).generate_state(1)[0])
        state.last_box = box
        state.final_pi = tuple(int(i) for i in box.pi_hat())
    return state.history()


# ---------------------------------------------------------------------------
# naive baselines: five environment draws per iteration, risks modeled
# directly by a GP over the design grid


def _naive_estimator(risk: RiskSpec) -> Callable[[Mapping[int, np.ndarray]], float]:
    if risk.kind == "bayes":
        m = risk.objective_index
        return lambda samples: float(np.mean(samples[m]))
    if risk.kind in ("std", "variance"):
        m = risk.objective_index
        ddof = 1
        if risk.kind == "std":
            return lambda samples: float(np.std(samples[m], ddof=ddof))
        return lambda samples: float(np.var(samples[m], ddof=ddof))
    if risk.kind == "lipschitz":
        inner = _naive_estimator(risk.inner)
        fn = risk.mapping
        return lambda samples: float(fn(inner(samples)))
    if risk.kind == "weighted_sum":
        parts = [(c, _naive_estimator(sub)) for c, sub in risk.terms]
        return lambda samples: float(sum(c * est(samples) for c, est in parts))
    raise UnsupportedRiskError(
        f"naive baselines support moment risks (bayes/std/variance and their "
        f"monotone maps), not {risk.kind!r}")


def run_baseline(kind: str, problem: ProblemSpec, gp_configs: Sequence[GPConfig],
                 schedule: BetaSchedule, seed: int,
                 truth: np.ndarray | None = None) -> RunHistory:
    """Execute a named baseline with the proposed method's instrumentation."""
    if kind not in BASELINE_KINDS:
        raise ValueError(f"unknown baseline {kind!r}")
    if kind in ("random", "us"):
        return run(problem, gp_configs, schedule, seed, truth=truth, method=kind)
    return _run_naive(kind, problem, seed, truth)


def _run_naive(kind: str, problem: ProblemSpec, seed: int,
               truth: np.ndarray | None) -> RunHistory:
    estimators = [_naive_estimator(r) for r in problem.risks]
    n_x = problem.design_grid.shape[0]
    # one GP per risk measure directly over the design grid
    grid = JointGrid(problem.design_grid, np.zeros((1, 1)))
    kernel = KernelSpec(length_scale=median_heuristic_length_scale(problem.design_grid))
    noise = NoiseModel(variance=1e-6)
    risk_states = [gplib.prior_state(kernel, noise, grid) for _ in problem.risks]
    rng_obs = substream(seed, "observation-noise")
    rng_env = substream(seed, "env-draws")
    rng_base = substream(seed, "baseline-random")
    rng_init = substream(seed, "init")
    truth_arr = None if truth is None else np.asarray(truth, float)

    history = RunHistory()
    evaluated: set[int] = set()
    coords = grid.coords([JointPoint(i, 0) for i in range(n_x)])

    def observe_at(x: int):
        draws = [problem.env_model.sample_index(x, rng_env) for _ in range(5)]
        samples = {m: np.array([problem.objectives[m].fn(problem.design_grid[x],
                                                         problem.env_grid[w])
                                + (problem.objectives[m].noise_std
                                   * rng_obs.standard_normal()
                                   if problem.objectives[m].noise_std > 0 else 0.0)
                                for w in draws])
                   for m in range(problem.num_objectives)}
        for li, est in enumerate(estimators):
            risk_states[li] = gplib.update(risk_states[li], JointPoint(x, 0), est(samples))
        evaluated.add(x)
        history.evaluation_count += 5

    for _ in range(max(problem.init_points, 1)):
        observe_at(int(rng_init.integers(n_x)))

    for t in range(problem.budget):
        if kind == "naive_us":
            total = np.zeros(n_x)
            for s in risk_states:
                _, sd = gplib.posterior_at_coords(s, coords)
                total += sd * sd
            x_next = int(np.argmax(total))
            af = float(total[x_next])
        else:
            x_next = int(rng_base.integers(n_x))
            af = 0.0
        ev = sorted(evaluated)
        means = np.column_stack([gplib.posterior_at_coords(s, coords[ev])[0]
                                 for s in risk_states])
        pi_hat = tuple(ev[i] for i in pareto_front_indices(means))
        if truth_arr is not None:
            _, _, disc = inference_discrepancy(pi_hat, truth_arr)
            regret = (phv_regret(evaluated, range(n_x), truth_arr)
                      if truth_arr.shape[1] <= 4 else float("nan"))
        else:
            disc = regret = float("nan")
        observe_at(x_next)
        history.records.append(IterationRecord(
            iteration=t, design_index=x_next, env_index=-1, af_value=af,
            env_af_value=float("nan"), pi_hat=pi_hat, inference_discrepancy=disc,
            phv_regret=regret, termination_bound=float("nan"), stopped=False))
    history.stop_reason = "budget"
    history.pi_hat = history.records[-1].pi_hat if history.records else ()
    history.guarantee, history.guarantee_flagged = guarantee_report(
        history, problem.error_params, problem.epsilon)
    return history

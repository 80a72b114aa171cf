"""Credible intervals for risk measures from pointwise function bands.

Given a band l(x,w) <= f(x,w) <= u(x,w) over a design point's environment
support, each risk kind maps the band endpoints to an interval
[lcb, ucb] that contains rho(g) for every function g inside the band
(the decomposition method).  A sampling alternative draws posterior paths,
keeps those inside the band, and takes the min/max of the risk over them.
Each supported kind also carries a strictly increasing width-bound function
q with q(0)=0 relating the interval width to the band width; the
probabilistic-threshold measure has none and disables the termination
certificate.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .env import EnvModel
from .gp import GPState, JointPoint, posterior_many, sample_paths

__all__ = [
    "RISK_KINDS",
    "AmbiguitySet",
    "Band",
    "RiskInterval",
    "RiskSpec",
    "UnsupportedRiskError",
    "bound_decomposition",
    "bound_sampling",
    "box_width_bound_check",
    "discrete_quantile",
    "exact_risk",
    "l1_ball_min_expectation",
    "q_function",
]

log = logging.getLogger(__name__)

RISK_KINDS = frozenset({
    "bayes", "worst_case", "best_case", "var", "cvar", "mad", "std",
    "variance", "dist_robust", "lipschitz", "weighted_sum", "prob_threshold",
})

# Nonnegative measures whose decomposition lcb is clamped at zero; clamping
# events are counted for the error budget.
_NONNEGATIVE_KINDS = ("mad", "std", "variance")
clamp_events = 0


class UnsupportedRiskError(ValueError):
    """Raised for risk configurations the artifact cannot certify or compute."""


@dataclass(frozen=True)
class RiskInterval:
    """Interval [lcb, ucb]; ``approximate`` marks a sampling fallback result."""

    lcb: float
    ucb: float
    approximate: bool = False

    def __post_init__(self):
        if not self.lcb <= self.ucb + 1e-12:
            raise ValueError(f"lcb {self.lcb} > ucb {self.ucb}")
        if self.lcb > self.ucb:
            object.__setattr__(self, "lcb", self.ucb)

    @property
    def width(self) -> float:
        return self.ucb - self.lcb


@dataclass(frozen=True)
class Band:
    """Pointwise function band over an environment support, lower <= upper."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lower, float)
        hi = np.asarray(self.upper, float)
        if lo.shape != hi.shape:
            raise ValueError("band lower/upper shape mismatch")
        if (lo > hi + 1e-12).any():
            raise ValueError("band lower exceeds upper")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", np.maximum(lo, hi))


@dataclass(frozen=True)
class AmbiguitySet:
    """Candidate environment distributions for distributionally robust risks.

    Either an explicit list of EnvModels sharing the outer support, or an L1
    ball of radius r around a center distribution (the worst-case Bayes-risk
    construction uses r = 0.25).
    """

    kind: str
    candidates: tuple[EnvModel, ...] = ()
    center: EnvModel | None = None
    radius: float = 0.0

    def __post_init__(self):
        if self.kind not in ("explicit_list", "l1_ball"):
            raise ValueError(f"unknown ambiguity kind {self.kind!r}")
        if self.kind == "explicit_list" and not self.candidates:
            raise ValueError("explicit ambiguity list is empty")
        if self.kind == "l1_ball" and not 0.0 <= self.radius <= 2.0:
            raise ValueError("l1 radius must lie in [0, 2]")


@dataclass(frozen=True)
class RiskSpec:
    """One risk-measure definition bound to an objective index.

    ``rkhs_bound`` is the RKHS norm bound B_m entering the std/variance
    width-bound functions and the theoretical beta schedule.
    """

    kind: str
    objective_index: int = 0
    alpha: float | None = None
    threshold: float | None = None
    rkhs_bound: float = 1.0
    inner: "RiskSpec | None" = None
    ambiguity: AmbiguitySet | None = None
    mapping: Callable[[float], float] | None = None
    lipschitz_constant: float | None = None
    monotone: bool = True
    terms: tuple[tuple[float, "RiskSpec"], ...] | None = None
    label: str = ""

    def __post_init__(self):
        if self.kind not in RISK_KINDS:
            raise UnsupportedRiskError(f"unknown risk kind {self.kind!r}")
        if self.kind in ("var", "cvar"):
            if self.alpha is None or not 0.0 < self.alpha < 1.0:
                raise ValueError(f"{self.kind} needs alpha in (0, 1)")
        if self.kind == "prob_threshold" and self.threshold is None:
            raise ValueError("prob_threshold needs a threshold")
        if self.rkhs_bound <= 0:
            raise ValueError("rkhs_bound must be positive")
        if self.kind in ("dist_robust", "lipschitz") and self.inner is None:
            raise ValueError(f"{self.kind} needs an inner risk")
        if self.kind == "dist_robust" and self.ambiguity is None:
            raise ValueError("dist_robust needs an ambiguity set")
        if self.kind == "lipschitz":
            if self.mapping is None:
                raise ValueError("lipschitz needs a map")
            if self.lipschitz_constant is None or self.lipschitz_constant <= 0:
                raise ValueError("lipschitz constant K must be positive and supplied")
            if not self.monotone:
                raise ValueError("non-monotone maps are rejected: the endpoint "
                                 "decomposition is only valid for monotone maps")
        if self.kind == "weighted_sum":
            if not self.terms:
                raise ValueError("weighted_sum needs terms")
            for coeff, _ in self.terms:
                if coeff < 0:
                    raise ValueError("weighted_sum coefficients must be nonnegative")

    def objectives(self) -> set[int]:
        """All objective indices this risk reads."""
        if self.kind == "weighted_sum":
            out: set[int] = set()
            for _, sub in self.terms:
                out |= sub.objectives()
            return out
        if self.inner is not None:
            return self.inner.objectives()
        return {self.objective_index}


# ---------------------------------------------------------------------------
# discrete helpers


def discrete_quantile(values: np.ndarray, weights: np.ndarray, alpha: float) -> float:
    """inf{b : P(z <= b) >= alpha} for a discrete distribution."""
    order = np.argsort(values, kind="stable")
    cum = np.cumsum(weights[order])
    pos = np.searchsorted(cum, alpha - 1e-12, side="left")
    pos = min(pos, len(order) - 1)
    return float(values[order][pos])


def _cvar_lower(values: np.ndarray, weights: np.ndarray, alpha: float) -> float:
    """(1/alpha) * integral_0^alpha quantile(z; a') da', exact piecewise."""
    order = np.argsort(values, kind="stable")
    v = values[order]
    w = weights[order]
    cum = np.concatenate([[0.0], np.cumsum(w)])
    hi = np.minimum(cum[1:], alpha)
    lo = np.minimum(cum[:-1], alpha)
    return float(np.sum(v * (hi - lo)) / alpha)


def l1_ball_min_expectation(values: np.ndarray, weights: np.ndarray, radius: float) -> float:
    """Minimum of E_p[values] over {p in simplex : ||p - weights||_1 <= radius}.

    The linear objective attains its minimum by moving up to radius/2 mass
    from the highest values onto the lowest value; the receiving point always
    has capacity since the moved mass comes from the rest of the simplex.
    """
    v = np.asarray(values, float)
    w = np.array(weights, float)
    budget = radius / 2.0
    receiver = int(np.argmin(v))
    order = np.argsort(v, kind="stable")[::-1]
    moved = 0.0
    for i in order:
        if budget <= 1e-15:
            break
        if v[i] <= v[receiver]:
            break
        take = min(w[i], budget)
        w[i] -= take
        moved += take
        budget -= take
    w[receiver] += moved
    return float(w @ v)


def _str_term(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    # STR(a, b) = max(min(-a, b), 0)
    return np.maximum(np.minimum(-lo, hi), 0.0)


def _centered(lower, upper, weights):
    # l-check = l - E[u], u-check = u - E[l]
    lo = lower - float(upper @ weights)
    hi = upper - float(lower @ weights)
    return lo, hi


def _clamped(kind: str, lcb: float, ucb: float) -> tuple[float, float]:
    global clamp_events
    if kind in _NONNEGATIVE_KINDS and lcb < 0.0:
        clamp_events += 1
        log.debug("clamped negative %s lcb %.3g to 0", kind, lcb)
        lcb = 0.0
    return lcb, max(ucb, lcb)


# ---------------------------------------------------------------------------
# decomposition method: per-kind interval rows on a discrete environment


def bound_decomposition(spec: RiskSpec, bands: Mapping[int, Band], env: EnvModel) -> RiskInterval:
    """Risk-measure credible interval from per-point bands.

    ``bands`` maps objective index to the Band over ``env``'s support (a
    shared-mode view for the design point under consideration).  Guarantees
    lcb <= rho(g) <= ucb for every g with lower <= g <= upper pointwise.
    """
    w = np.asarray(env.weights, float)

    if spec.kind in ("dist_robust", "lipschitz", "weighted_sum"):
        return _compound_bounds(spec, bands, env)

    band = bands[spec.objective_index]
    lo, hi = band.lower, band.upper
    if lo.shape != w.shape:
        raise ValueError("band does not match the environment support")

    if spec.kind == "bayes":
        return RiskInterval(float(lo @ w), float(hi @ w))
    if spec.kind == "worst_case":
        return RiskInterval(float(lo.min()), float(hi.min()))
    if spec.kind == "best_case":
        return RiskInterval(float(lo.max()), float(hi.max()))
    if spec.kind == "var":
        return RiskInterval(discrete_quantile(lo, w, spec.alpha),
                            discrete_quantile(hi, w, spec.alpha))
    if spec.kind == "cvar":
        return RiskInterval(_cvar_lower(lo, w, spec.alpha), _cvar_lower(hi, w, spec.alpha))
    if spec.kind == "mad":
        cl, cu = _centered(lo, hi, w)
        lcb = float((np.minimum(np.abs(cl), np.abs(cu)) - _str_term(cl, cu)) @ w)
        ucb = float(np.maximum(np.abs(cl), np.abs(cu)) @ w)
        return RiskInterval(*_clamped("mad", lcb, ucb))
    if spec.kind in ("variance", "std"):
        cl, cu = _centered(lo, hi, w)
        lcb = float((np.minimum(cl * cl, cu * cu) - _str_term(cl, cu) ** 2) @ w)
        ucb = float(np.maximum(cl * cl, cu * cu) @ w)
        lcb, ucb = _clamped(spec.kind, lcb, ucb)
        if spec.kind == "std":
            return RiskInterval(float(np.sqrt(lcb)), float(np.sqrt(ucb)))
        return RiskInterval(lcb, ucb)
    if spec.kind == "prob_threshold":
        theta = spec.threshold
        return RiskInterval(float(w[lo >= theta].sum()), float(w[hi >= theta].sum()))
    raise UnsupportedRiskError(spec.kind)


def _compound_bounds(spec: RiskSpec, bands: Mapping[int, Band], env: EnvModel) -> RiskInterval:
    if spec.kind == "weighted_sum":
        lcb = ucb = 0.0
        approx = False
        for coeff, sub in spec.terms:
            iv = bound_decomposition(sub, bands, env)
            lcb += coeff * iv.lcb
            ucb += coeff * iv.ucb
            approx |= iv.approximate
        return RiskInterval(lcb, ucb, approx)

    if spec.kind == "lipschitz":
        iv = bound_decomposition(spec.inner, bands, env)
        a, b = spec.mapping(iv.lcb), spec.mapping(iv.ucb)
        return RiskInterval(min(a, b), max(a, b), iv.approximate)

    # distributionally robust: infimum of the inner bounds over the set
    amb = spec.ambiguity
    if amb.kind == "explicit_list":
        lcbs, ucbs = [], []
        for cand in amb.candidates:
            if tuple(cand.support) != tuple(env.support):
                raise ValueError("ambiguity candidates must share the outer support")
            iv = bound_decomposition(spec.inner, bands, cand)
            lcbs.append(iv.lcb)
            ucbs.append(iv.ucb)
        return RiskInterval(min(lcbs), min(ucbs))

    center = amb.center if amb.center is not None else env
    if tuple(center.support) != tuple(env.support):
        raise ValueError("l1 ball center must share the outer support")
    if spec.inner.kind != "bayes":
        raise UnsupportedRiskError(
            "l1-ball distributional robustness is implemented for Bayes-risk "
            "inner measures; use an explicit candidate list otherwise")
    band = bands[spec.inner.objective_index]
    cw = np.asarray(center.weights, float)
    return RiskInterval(l1_ball_min_expectation(band.lower, cw, amb.radius),
                        l1_ball_min_expectation(band.upper, cw, amb.radius))


# ---------------------------------------------------------------------------
# definitional risk evaluation (degenerate band): used for truth tables and
# by the sampling method


def exact_risk(spec: RiskSpec, values: Mapping[int, np.ndarray] | np.ndarray, env: EnvModel) -> float:
    """rho(g) for a concrete function g given by its values over the support."""
    if isinstance(values, np.ndarray):
        values = {i: values for i in spec.objectives()}
    bands = {i: Band(np.asarray(v, float), np.asarray(v, float)) for i, v in values.items()}
    iv = bound_decomposition(spec, bands, env)
    # degenerate bands collapse every row to the definition
    return iv.lcb


# ---------------------------------------------------------------------------
# sampling method


def bound_sampling(spec: RiskSpec, gp: GPState | Mapping[int, GPState], design_index: int,
                   env: EnvModel, beta_sqrt: float | Mapping[int, float], count: int,
                   seed: int) -> RiskInterval:
    """Sampling-method credible interval at one design point.

    Draws ``count`` joint posterior paths over the design point's environment
    slice, keeps paths lying inside [mu - beta^(1/2) sigma, mu + beta^(1/2) sigma]
    at every support point, and returns the min/max of the risk over the
    retained paths.  If no path is retained, every path is clipped into the
    band coordinatewise and the interval is flagged approximate.
    """
    if count < 1:
        raise ValueError("sample count must be >= 1")
    view = env.view_for(design_index)
    support = view.indices_for(design_index)
    slice_pts = [JointPoint(design_index, int(j)) for j in support]
    states = gp if isinstance(gp, Mapping) else {spec.objective_index: gp}
    betas = beta_sqrt if isinstance(beta_sqrt, Mapping) else {m: float(beta_sqrt) for m in states}

    paths: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}
    inside = np.ones(count, dtype=bool)

    for m in sorted(spec.objectives()):
        state = states[m]
        mu, sd = posterior_many(state, slice_pts)
        lo, hi = mu - betas[m] * sd, mu + betas[m] * sd
        draws = sample_paths(state, slice_pts, count, seed=np.random.default_rng([seed, m]))
        inside &= ((draws >= lo[None, :] - 1e-12) & (draws <= hi[None, :] + 1e-12)).all(axis=1)
        paths[m] = (draws, lo, hi)

    approximate = not inside.any()
    if approximate:
        retained = {m: np.clip(d, lo[None, :], hi[None, :]) for m, (d, lo, hi) in paths.items()}
        keep = np.ones(count, dtype=bool)
    else:
        retained = {m: d for m, (d, lo, hi) in paths.items()}
        keep = inside

    vals = [exact_risk(spec, {m: retained[m][j] for m in retained}, view)
            for j in np.flatnonzero(keep)]
    return RiskInterval(min(vals), max(vals), approximate)


# ---------------------------------------------------------------------------
# width-bound functions and the box-width check


def q_function(spec: RiskSpec, a: float) -> float:
    """Strictly increasing width bound q(a) with q(0) = 0 for the risk kind."""
    if a < 0:
        raise ValueError("q is defined on a >= 0")
    kind = spec.kind
    if kind in ("bayes", "worst_case", "best_case", "var", "cvar"):
        return float(a)
    if kind == "mad":
        return 2.0 * a
    if kind == "std":
        return float(np.sqrt(8.0 * spec.rkhs_bound * a + 5.0 * a * a))
    if kind == "variance":
        return 8.0 * spec.rkhs_bound * a + 5.0 * a * a
    if kind == "dist_robust":
        return q_function(spec.inner, a)
    if kind == "lipschitz":
        return spec.lipschitz_constant * q_function(spec.inner, a)
    if kind == "weighted_sum":
        return float(sum(c * q_function(sub, a) for c, sub in spec.terms))
    raise UnsupportedRiskError(
        "the probabilistic-threshold measure admits no width bound; "
        "no termination certificate exists for it")


def box_width_bound_check(interval: RiskInterval, spec: RiskSpec, zeta: float) -> bool:
    """True iff the interval width respects its q bound at band width zeta."""
    return interval.width <= q_function(spec, zeta) + 1e-9

"""Gaussian-process surrogates over a joint (design, environment) grid.

The surrogate is an exact GP with a squared-exponential kernel, optionally
rescaled by 1/scaling, and homoscedastic or heteroscedastic observation
noise.  States are immutable: :func:`update` returns a new state that shares
the old observation history and extends the Cholesky factor by one row, with
a periodic from-scratch rebuild to bound drift.  All read operations are safe
to call concurrently on one state.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping, NamedTuple, Sequence

import numpy as np
from scipy.linalg import cho_solve, solve_triangular

__all__ = [
    "JointPoint",
    "JointGrid",
    "KernelSpec",
    "NoiseModel",
    "GPState",
    "GPFactorizationError",
    "prior_state",
    "posterior",
    "posterior_at_coords",
    "posterior_grid",
    "posterior_many",
    "update",
    "sample_paths",
    "realized_information_gain",
]

# Relative jitter added to the factorization diagonal; escalated x10 on
# failure up to the cap, after which the configuration is rejected.
DEFAULT_JITTER = 1e-10
JITTER_CAP = 1e-4
REBUILD_EVERY = 64


class GPFactorizationError(RuntimeError):
    """Covariance factorization failed even after jitter escalation."""


class JointPoint(NamedTuple):
    """Index pair into the design grid X and the environment grid Omega."""

    design_index: int
    env_index: int


@dataclass(frozen=True)
class JointGrid:
    """Finite candidate grids for design and environment variables.

    Parameters
    ----------
    design_points : ndarray, shape (n_x, d_x)
    env_points : ndarray, shape (n_w, d_w)
    """

    design_points: np.ndarray
    env_points: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "design_points", np.atleast_2d(np.asarray(self.design_points, float)))
        object.__setattr__(self, "env_points", np.atleast_2d(np.asarray(self.env_points, float)))

    @property
    def n_design(self) -> int:
        return self.design_points.shape[0]

    @property
    def n_env(self) -> int:
        return self.env_points.shape[0]

    def full_coords(self) -> np.ndarray:
        """Coordinates of the whole joint grid, design-major; cached."""
        cached = getattr(self, "_full_coords", None)
        if cached is None:
            cached = self.coords(self.all_points())
            object.__setattr__(self, "_full_coords", cached)
        return cached

    def coords(self, points: Sequence[JointPoint]) -> np.ndarray:
        """Concatenated (x, w) coordinates for a sequence of joint points."""
        pts = list(points)
        if not pts:
            return np.zeros((0, self.design_points.shape[1] + self.env_points.shape[1]))
        xi = np.fromiter((p[0] for p in pts), dtype=int, count=len(pts))
        wi = np.fromiter((p[1] for p in pts), dtype=int, count=len(pts))
        if xi.size and (xi.max() >= self.n_design or wi.max() >= self.n_env):
            raise IndexError("joint point outside the grid")
        return np.hstack([self.design_points[xi], self.env_points[wi]])

    def all_points(self) -> list[JointPoint]:
        return [JointPoint(i, j) for i in range(self.n_design) for j in range(self.n_env)]


@dataclass(frozen=True)
class KernelSpec:
    """Squared-exponential kernel k(a,b) = (variance/scaling) exp(-|a-b|^2/length_scale).

    ``length_scale`` is the divisor inside the exponent and ``scaling`` is the
    1/lambda multiplier applied to the whole kernel, so the prior variance at
    any point is ``variance / scaling``.
    """

    kind: str = "gaussian"
    length_scale: float = 1.0
    variance: float = 1.0
    scaling: float = 1.0

    def __post_init__(self):
        if self.kind != "gaussian":
            raise ValueError(f"unsupported kernel kind {self.kind!r}")
        for name in ("length_scale", "variance", "scaling"):
            if not getattr(self, name) > 0:
                raise ValueError(f"kernel {name} must be positive")

    @property
    def prior_variance(self) -> float:
        return self.variance / self.scaling

    def matrix(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        a = np.atleast_2d(a)
        b = np.atleast_2d(b)
        sq = np.sum(a * a, axis=1)[:, None] + np.sum(b * b, axis=1)[None, :] - 2.0 * (a @ b.T)
        np.maximum(sq, 0.0, out=sq)
        return self.prior_variance * np.exp(-sq / self.length_scale)


@dataclass(frozen=True)
class NoiseModel:
    """Observation-noise variance, constant or per joint point.

    Heteroscedastic variances are looked up by joint point and must lie in
    ``bounds`` when bounds are given.  A variance of exactly zero is allowed
    (noise-free observations); the factorization jitter keeps the system
    solvable.
    """

    kind: str = "homoscedastic"
    variance: float | Mapping[JointPoint, float] = 1e-6
    bounds: tuple[float, float] | None = None

    def __post_init__(self):
        if self.kind not in ("homoscedastic", "heteroscedastic"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.kind == "homoscedastic":
            if not np.isscalar(self.variance) or self.variance < 0:
                raise ValueError("homoscedastic variance must be a nonnegative scalar")
        else:
            if np.isscalar(self.variance):
                raise ValueError("heteroscedastic noise needs a point -> variance map")

    def at(self, point: JointPoint) -> float:
        if self.kind == "homoscedastic":
            return float(self.variance)
        v = float(self.variance[JointPoint(*point)])
        if v <= 0:
            raise ValueError("heteroscedastic variances must be strictly positive")
        if self.bounds is not None and not (self.bounds[0] <= v <= self.bounds[1]):
            raise ValueError(f"noise variance {v} outside bounds {self.bounds}")
        return v

    def floor(self) -> float:
        """Lower bound on the noise variance (tau-underbar squared)."""
        if self.kind == "homoscedastic":
            return float(self.variance)
        if self.bounds is not None:
            return float(self.bounds[0])
        return float(min(self.variance.values()))


@dataclass(frozen=True)
class GPState:
    """Immutable GP posterior state.

    ``chol`` is the lower-triangular factor of K_t + Sigma_t + jitter*I and
    ``alpha`` solves (K_t + Sigma_t + jitter*I) alpha = y.
    """

    kernel: KernelSpec
    noise: NoiseModel
    grid: JointGrid
    points: tuple[JointPoint, ...] = ()
    values: np.ndarray = field(default_factory=lambda: np.zeros(0))
    chol: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    alpha: np.ndarray = field(default_factory=lambda: np.zeros(0))
    obs_coords: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    noise_diag: np.ndarray = field(default_factory=lambda: np.zeros(0))
    # kernel columns between the full grid and the observed points, extended
    # one column per update so the hot posterior-over-grid path never
    # re-evaluates the kernel
    grid_cross: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    base_jitter: float = DEFAULT_JITTER
    jitter: float = DEFAULT_JITTER

    @property
    def n_obs(self) -> int:
        return len(self.points)

    @property
    def jitter_abs(self) -> float:
        return self.jitter * self.kernel.prior_variance


def prior_state(kernel: KernelSpec, noise: NoiseModel, grid: JointGrid,
                jitter: float = DEFAULT_JITTER) -> GPState:
    d = grid.design_points.shape[1] + grid.env_points.shape[1]
    return GPState(kernel=kernel, noise=noise, grid=grid,
                   obs_coords=np.zeros((0, d)), base_jitter=jitter, jitter=jitter)


def _rebuild(state: GPState) -> GPState:
    """From-scratch factorization at the state's current jitter level."""
    jitter = state.jitter
    K = state.kernel.matrix(state.obs_coords, state.obs_coords)
    while True:
        A = K + np.diag(state.noise_diag + jitter * state.kernel.prior_variance)
        try:
            L = np.linalg.cholesky(A)
            break
        except np.linalg.LinAlgError:
            jitter *= 10.0
            if jitter > JITTER_CAP:
                raise GPFactorizationError(
                    "kernel matrix not factorizable below the jitter cap; "
                    "the kernel configuration is ill conditioned") from None
    alpha = cho_solve((L, True), state.values)
    return replace(state, chol=L, alpha=alpha, jitter=jitter)


def update(state: GPState, point: JointPoint, value: float) -> GPState:
    """Return a new state with one observation appended.

    Uses a rank-one extension of the Cholesky factor; every
    ``REBUILD_EVERY`` observations (or on numerical failure, with jitter
    escalation) the factor is rebuilt from scratch.
    """
    point = JointPoint(*point)
    coords = state.grid.coords([point])
    noise_var = state.noise.at(point)
    cross_col = state.kernel.matrix(state.grid.full_coords(), coords)
    new = replace(
        state,
        points=state.points + (point,),
        values=np.append(state.values, float(value)),
        obs_coords=np.vstack([state.obs_coords, coords]) if state.n_obs else coords,
        noise_diag=np.append(state.noise_diag, noise_var),
        grid_cross=np.hstack([state.grid_cross, cross_col]) if state.n_obs else cross_col,
    )
    if new.n_obs % REBUILD_EVERY == 0 or state.n_obs == 0:
        return _rebuild(new)

    k_vec = state.kernel.matrix(state.obs_coords, coords)[:, 0]
    k_self = state.kernel.prior_variance + noise_var + state.jitter_abs
    c = solve_triangular(state.chol, k_vec, lower=True, check_finite=False)
    d2 = k_self - c @ c
    if d2 <= 0:
        escalated = replace(new, jitter=state.jitter * 10.0)
        if escalated.jitter > JITTER_CAP:
            raise GPFactorizationError("rank-one extension failed at the jitter cap")
        return _rebuild(escalated)
    t = state.n_obs
    L = np.zeros((t + 1, t + 1))
    L[:t, :t] = state.chol
    L[t, :t] = c
    L[t, t] = np.sqrt(d2)
    alpha = cho_solve((L, True), new.values)
    return replace(new, chol=L, alpha=alpha)


def posterior_at_coords(state: GPState, coords: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Posterior mean/std at precomputed joint coordinates (hot-loop path)."""
    prior_var = state.kernel.prior_variance
    if state.n_obs == 0:
        n = coords.shape[0]
        return np.zeros(n), np.full(n, np.sqrt(prior_var))
    Kq = state.kernel.matrix(state.obs_coords, coords)
    mean = Kq.T @ state.alpha
    V = solve_triangular(state.chol, Kq, lower=True, check_finite=False)
    var = prior_var - np.einsum("ij,ij->j", V, V)
    np.clip(var, 0.0, prior_var, out=var)
    return mean, np.sqrt(var)


def posterior_many(state: GPState, points: Sequence[JointPoint]) -> tuple[np.ndarray, np.ndarray]:
    """Posterior mean and standard deviation at many joint points.

    Returns
    -------
    (mean, std) : ndarrays of shape (len(points),)
    """
    return posterior_at_coords(state, state.grid.coords(points))


def posterior_grid(state: GPState) -> tuple[np.ndarray, np.ndarray]:
    """Posterior mean/std over the whole joint grid (design-major order).

    Uses the incrementally cached kernel columns, so no kernel evaluations
    happen here.
    """
    prior_var = state.kernel.prior_variance
    n = state.grid.n_design * state.grid.n_env
    if state.n_obs == 0:
        return np.zeros(n), np.full(n, np.sqrt(prior_var))
    Kq = state.grid_cross
    mean = Kq @ state.alpha
    V = solve_triangular(state.chol, Kq.T, lower=True, check_finite=False)
    var = prior_var - np.einsum("ij,ij->j", V, V)
    np.clip(var, 0.0, prior_var, out=var)
    return mean, np.sqrt(var)


def posterior(state: GPState, query: JointPoint) -> tuple[float, float]:
    """Posterior mean and standard deviation at one joint point."""
    mean, std = posterior_many(state, [JointPoint(*query)])
    return float(mean[0]), float(std[0])


def _posterior_cov(state: GPState, pts: Sequence[JointPoint]) -> tuple[np.ndarray, np.ndarray]:
    q = state.grid.coords(pts)
    Kss = state.kernel.matrix(q, q)
    if state.n_obs == 0:
        return np.zeros(q.shape[0]), Kss
    Kq = state.kernel.matrix(state.obs_coords, q)
    mean = Kq.T @ state.alpha
    V = solve_triangular(state.chol, Kq, lower=True, check_finite=False)
    return mean, Kss - V.T @ V


def sample_paths(state: GPState, slice_points: Sequence[JointPoint], count: int,
                 seed: int | np.random.Generator) -> np.ndarray:
    """Draw ``count`` joint posterior samples over ``slice_points``.

    Deterministic given the seed: a fixed seed yields a bit-identical matrix
    of shape (count, len(slice_points)).
    """
    if not len(slice_points):
        raise ValueError("slice must be nonempty")
    if count < 1:
        raise ValueError("count must be >= 1")
    mean, cov = _posterior_cov(state, slice_points)
    cov = 0.5 * (cov + cov.T)
    jitter = state.base_jitter
    while True:
        try:
            Lc = np.linalg.cholesky(cov + jitter * state.kernel.prior_variance * np.eye(cov.shape[0]))
            break
        except np.linalg.LinAlgError:
            jitter *= 10.0
            if jitter > JITTER_CAP:
                raise GPFactorizationError("posterior covariance not factorizable") from None
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    z = rng.standard_normal((int(count), cov.shape[0]))
    return mean[None, :] + z @ Lc.T


def realized_information_gain(state: GPState) -> float:
    """Information gain of the executed observation sequence.

    Computes (1/2) log det(I + Sigma^{-1} K) on the realized points, with the
    factorization jitter folded into Sigma.  This lower-bounds the maximum
    information gain over all sequences of the same length.
    """
    if state.n_obs == 0:
        return 0.0
    sigma_eff = state.noise_diag + state.jitter_abs
    logdet_a = 2.0 * np.sum(np.log(np.diag(state.chol)))
    logdet_s = np.sum(np.log(sigma_eff))
    return max(0.0, 0.5 * (logdet_a - logdet_s))

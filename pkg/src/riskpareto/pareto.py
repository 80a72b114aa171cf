"""Dominated regions, Pareto fronts, bounding boxes, and front metrics.

Everything operates on finite point sets in maximization orientation: a
vector dominates another when it is componentwise >=.  The Pareto front of a
set is represented by its non-dominated subset; sup-norm distances to the
front boundary are computed analytically from the maximin form, positive
outside the dominated region and by the symmetric deficiency inside it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .risk import RiskInterval

__all__ = [
    "BoxTable",
    "build_box_table",
    "dist_to_dominated",
    "dist_to_front",
    "dominates",
    "front_distances",
    "hypervolume",
    "inference_discrepancy",
    "pareto_front_indices",
    "phv_regret",
]


def dominates(a: Sequence[float], b: Sequence[float]) -> bool:
    """True iff a dominates b, i.e. b <= a componentwise (ties allowed)."""
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    if a.shape != b.shape:
        raise ValueError("objective vectors have different lengths")
    return bool((b <= a).all())


def pareto_front_indices(points: Sequence[Sequence[float]]) -> np.ndarray:
    """Indices of points not strictly dominated by any other point.

    Strict domination means >= in every coordinate and > in at least one;
    duplicated maximal vectors are therefore all retained.
    """
    pts = np.atleast_2d(np.asarray(points, float))
    n = pts.shape[0]
    if n == 0 or pts.size == 0:
        raise ValueError("empty point set")
    keep = np.ones(n, dtype=bool)
    # chunked pairwise check keeps memory bounded for large grids
    chunk = max(1, int(4e6 // max(n, 1)))
    for start in range(0, n, chunk):
        block = pts[start:start + chunk]                      # (c, L)
        ge = (pts[None, :, :] >= block[:, None, :]).all(-1)   # (c, n)
        gt = (pts[None, :, :] > block[:, None, :]).any(-1)
        keep[start:start + chunk] = ~(ge & gt).any(axis=1)
    return np.flatnonzero(keep)


def _maximin_gap(u: np.ndarray, front: np.ndarray) -> float:
    # min over front points of the largest coordinate surplus of u
    return float(np.min(np.max(u[None, :] - front, axis=1)))


def front_distances(points: np.ndarray, front: np.ndarray) -> np.ndarray:
    """Sup-norm boundary distances of many points to one front, vectorized."""
    pts = np.atleast_2d(np.asarray(points, float))
    f = np.atleast_2d(np.asarray(front, float))
    gaps = np.min(np.max(pts[:, None, :] - f[None, :, :], axis=2), axis=1)
    return np.abs(gaps)


def dist_to_dominated(u: Sequence[float], front_lcbs: Sequence[Sequence[float]]) -> float:
    """Chebyshev distance from u to the region dominated by the front points.

    Computed analytically as max(min_i max_j (u_j - l_j^(i)), 0); zero for
    points already inside the dominated region.
    """
    front = np.atleast_2d(np.asarray(front_lcbs, float))
    if front.shape[0] == 0:
        raise ValueError("empty front")
    u = np.asarray(u, float)
    if u.shape[0] != front.shape[1]:
        raise ValueError("dimension mismatch")
    return max(_maximin_gap(u, front), 0.0)


def dist_to_front(y: Sequence[float], front: Sequence[Sequence[float]]) -> float:
    """Sup-norm distance from y to the Pareto boundary spanned by ``front``.

    The boundary of the dominated region is approached from outside at the
    maximin gap and from inside at its negation, so the distance is the
    absolute value of the gap.
    """
    f = np.atleast_2d(np.asarray(front, float))
    if f.shape[0] == 0:
        raise ValueError("empty front")
    return abs(_maximin_gap(np.asarray(y, float), f))


@dataclass(frozen=True)
class BoxTable:
    """Per-design bounding boxes: rows of LCB and UCB vectors, lcb <= ucb."""

    lcb: np.ndarray
    ucb: np.ndarray

    def __post_init__(self):
        lo = np.atleast_2d(np.asarray(self.lcb, float))
        hi = np.atleast_2d(np.asarray(self.ucb, float))
        if lo.shape != hi.shape:
            raise ValueError("LCB/UCB shape mismatch")
        if (lo > hi + 1e-12).any():
            raise ValueError("box with lcb > ucb")
        object.__setattr__(self, "lcb", lo)
        object.__setattr__(self, "ucb", hi)

    @property
    def n_design(self) -> int:
        return self.lcb.shape[0]

    @property
    def n_objectives(self) -> int:
        return self.lcb.shape[1]

    def pi_hat(self) -> np.ndarray:
        """Estimated Pareto set: designs whose LCB lies on the LCB front."""
        return pareto_front_indices(self.lcb)


def build_box_table(risk_intervals: Sequence[Sequence[RiskInterval]]) -> BoxTable:
    """Assemble the box table from a complete design x risk interval grid."""
    if not len(risk_intervals):
        raise ValueError("empty interval table")
    width = len(risk_intervals[0])
    for row in risk_intervals:
        if len(row) != width:
            raise ValueError("ragged interval table: missing entries")
    lcb = np.array([[iv.lcb for iv in row] for row in risk_intervals])
    ucb = np.array([[iv.ucb for iv in row] for row in risk_intervals])
    return BoxTable(lcb, ucb)


def inference_discrepancy(pi_hat: Iterable[int],
                          true_F: Sequence[Sequence[float]]) -> tuple[float, float, float]:
    """Recall- and precision-like distances of the estimated Pareto set.

    Returns (I_i, I_ii, I): the farthest true-front point from the front of
    the estimate's images, the farthest estimate image from the true front,
    and their maximum.
    """
    members = np.asarray(sorted(set(int(i) for i in pi_hat)), int)
    if members.size == 0:
        raise ValueError("empty estimated Pareto set")
    F = np.atleast_2d(np.asarray(true_F, float))
    z_star = F[pareto_front_indices(F)]
    images = F[members]
    est_front = images[pareto_front_indices(images)]
    i_recall = float(front_distances(z_star, est_front).max())
    i_precision = float(front_distances(images, z_star).max())
    return i_recall, i_precision, max(i_recall, i_precision)


def _hv2(pts: np.ndarray, ref: np.ndarray) -> float:
    order = np.argsort(pts[:, 0], kind="stable")[::-1]
    total = 0.0
    ceiling = ref[1]
    for x, y in pts[order]:
        if y > ceiling:
            total += (x - ref[0]) * (y - ceiling)
            ceiling = y
    return total


def _hv_recursive(pts: np.ndarray, ref: np.ndarray) -> float:
    if pts.shape[0] == 0:
        return 0.0
    if pts.shape[1] == 2:
        return _hv2(pts, ref)
    last = pts.shape[1] - 1
    order = np.argsort(pts[:, last], kind="stable")[::-1]
    sorted_pts = pts[order]
    levels = sorted_pts[:, last]
    total = 0.0
    for k in range(len(levels)):
        z_hi = levels[k]
        z_lo = levels[k + 1] if k + 1 < len(levels) else ref[last]
        if z_hi > z_lo:
            slab = _hv_recursive(sorted_pts[:k + 1, :last], ref[:last])
            total += slab * (z_hi - z_lo)
    return total


def hypervolume(points: Sequence[Sequence[float]], reference: Sequence[float]) -> float:
    """Lebesgue measure of the union of boxes [reference, point].

    Exact sweep for two objectives and recursive slicing for three or four;
    points below the reference are clipped to it (zero contribution).
    """
    ref = np.asarray(reference, float)
    pts = np.asarray(points, float).reshape(-1, ref.shape[0]) if len(points) else np.zeros((0, ref.shape[0]))
    if pts.shape[0] == 0:
        return 0.0
    if pts.shape[1] != ref.shape[0]:
        raise ValueError("reference dimension mismatch")
    if pts.shape[1] < 2 or pts.shape[1] > 4:
        raise ValueError("hypervolume supports 2 to 4 objectives")
    pts = np.maximum(pts, ref[None, :])
    pts = pts[(pts > ref[None, :]).any(axis=1)]
    if pts.shape[0] == 0:
        return 0.0
    pts = pts[pareto_front_indices(pts)]
    return float(_hv_recursive(pts, ref))


def phv_regret(evaluated_designs: Iterable[int], all_designs: Iterable[int],
               true_F: Sequence[Sequence[float]], reference: Sequence[float] | None = None) -> float:
    """Hypervolume gap between the full design grid and the evaluated subset.

    The default reference point is the componentwise minimum of the grid's
    objective images.
    """
    F = np.atleast_2d(np.asarray(true_F, float))
    all_idx = np.asarray(sorted(set(int(i) for i in all_designs)), int)
    eval_idx = np.asarray(sorted(set(int(i) for i in evaluated_designs)), int)
    if not set(eval_idx).issubset(set(all_idx)):
        raise ValueError("evaluated designs must be a subset of all designs")
    ref = np.asarray(reference, float) if reference is not None else F[all_idx].min(axis=0)
    full = hypervolume(F[all_idx], ref)
    part = hypervolume(F[eval_idx], ref) if eval_idx.size else 0.0
    return max(full - part, 0.0)

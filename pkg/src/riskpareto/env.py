"""Discrete environment distributions, optionally design-dependent."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

__all__ = ["EnvModel", "uniform_env"]

_WEIGHT_TOL = 1e-12


def _check_weights(weights, where: str):
    w = np.asarray(weights, float)
    if w.size == 0:
        raise ValueError(f"{where}: empty support")
    if (w < -_WEIGHT_TOL).any():
        raise ValueError(f"{where}: negative weight")
    if abs(w.sum() - 1.0) > 1e-9:
        raise ValueError(f"{where}: weights sum to {w.sum()}, expected 1")
    w = np.clip(w, 0.0, None)
    return tuple(w / w.sum())


@dataclass(frozen=True)
class EnvModel:
    """Probability distribution over environment grid indices.

    ``mode='shared'`` uses one (support, weights) pair for every design
    point; ``mode='per_design'`` attaches a distribution Omega_x to each
    design index, with every per-design support a subset of the global
    environment grid.
    """

    support: tuple[int, ...]
    weights: tuple[float, ...]
    mode: str = "shared"
    per_design: Mapping[int, tuple[tuple[int, ...], tuple[float, ...]]] | None = None
    distribution_kind: str = "explicit"

    def __post_init__(self):
        if self.mode not in ("shared", "per_design"):
            raise ValueError(f"unknown env mode {self.mode!r}")
        object.__setattr__(self, "support", tuple(int(i) for i in self.support))
        object.__setattr__(self, "weights", _check_weights(self.weights, "env weights"))
        if len(self.support) != len(self.weights):
            raise ValueError("support and weights length mismatch")
        if self.mode == "per_design":
            if not self.per_design:
                raise ValueError("per_design mode needs a design -> distribution map")
            for x, (sup, w) in self.per_design.items():
                if len(sup) != len(w):
                    raise ValueError(f"per_design[{x}]: support/weights length mismatch")
                _check_weights(w, f"per_design[{x}] weights")

    def indices_for(self, design_index: int) -> np.ndarray:
        if self.mode == "per_design" and design_index in self.per_design:
            return np.asarray(self.per_design[design_index][0], int)
        return np.asarray(self.support, int)

    def weights_for(self, design_index: int) -> np.ndarray:
        if self.mode == "per_design" and design_index in self.per_design:
            return np.asarray(self.per_design[design_index][1], float)
        return np.asarray(self.weights, float)

    def view_for(self, design_index: int) -> "EnvModel":
        """Shared-mode view of the distribution at one design point."""
        if self.mode == "shared":
            return self
        return EnvModel(support=tuple(self.indices_for(design_index)),
                        weights=tuple(self.weights_for(design_index)),
                        distribution_kind=self.distribution_kind)

    def reweighted(self, weights) -> "EnvModel":
        """Same support with different weights (ambiguity-set candidates)."""
        return EnvModel(support=self.support, weights=tuple(np.asarray(weights, float)),
                        distribution_kind="explicit")

    def sample_index(self, design_index: int, rng: np.random.Generator) -> int:
        """Draw one environment index from the distribution at ``design_index``."""
        idx = self.indices_for(design_index)
        w = self.weights_for(design_index)
        return int(idx[rng.choice(len(idx), p=w)])


def uniform_env(n_env: int) -> EnvModel:
    """Uniform distribution over the full environment grid."""
    return EnvModel(support=tuple(range(n_env)), weights=(1.0 / n_env,) * n_env,
                    distribution_kind="uniform")

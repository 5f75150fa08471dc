"""FitzHugh-Nagumo reaction terms and model parameters."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ModelParams:
    """Reaction parameters.

    ``theta`` is the threshold of the cubic, ``tau`` the adaptation rate and
    ``gamma`` the adaptation decay. When ``linear_alpha`` is set the cubic is
    replaced by the linear reaction ``-alpha * v`` (used by the accuracy test).
    """

    theta: float = 0.1
    tau: float = 0.005
    gamma: float = 5.0
    linear_alpha: float | None = None

    def __post_init__(self):
        if not 0.0 < self.theta < 1.0:
            raise ValueError(f"theta must lie in (0, 1), got {self.theta}")
        if self.tau < 0.0:
            raise ValueError(f"tau must be >= 0, got {self.tau}")
        if self.gamma <= 0.0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")

    @classmethod
    def linear(cls, alpha: float, tau: float = 0.0, gamma: float = 5.0) -> "ModelParams":
        return cls(tau=tau, gamma=gamma, linear_alpha=alpha)

    @property
    def is_linear(self) -> bool:
        return self.linear_alpha is not None


def nonlinearity(v, params: ModelParams):
    """Cubic reaction ``v (1 - v) (v - theta)``, or ``-alpha v`` in the linear variant."""
    if params.linear_alpha is not None:
        return -params.linear_alpha * v
    return v * (1.0 - v) * (v - params.theta)


def adaptation(v, w, params: ModelParams):
    return params.tau * (v - params.gamma * w)


def cubic_roots(params: ModelParams) -> np.ndarray:
    return np.array([0.0, params.theta, 1.0])

"""Opinion update, rewards and utilities for a single agent.

The agent holds an opinion ``x_k`` in [-1, 1].  When it clicks on the
recommendation ``u`` the opinion moves to a convex combination of the innate
opinion, the latest opinion and the recommendation; when it skips, the
opinion relaxes back toward the innate opinion.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


class ConfigurationError(ValueError):
    """Raised when parameters violate the model's invariants."""


@dataclass(frozen=True)
class DynamicsParams:
    """Opinion-update weights.

    ``alpha`` weighs the innate opinion and ``beta`` the latest opinion.
    ``zeta = alpha + beta`` and ``b = beta / zeta`` are derived on
    construction and cannot be passed in.
    """

    alpha: float
    beta: float
    zeta: float = field(init=False)
    b: float = field(init=False)

    def __post_init__(self):
        a, bt = float(self.alpha), float(self.beta)
        if not (0.0 <= bt <= a <= 1.0):
            raise ConfigurationError(
                f"need 0 <= beta <= alpha <= 1, got alpha={a}, beta={bt}")
        zeta = a + bt
        if not (0.0 < zeta <= 1.0):
            raise ConfigurationError(f"need 0 < alpha + beta <= 1, got {zeta}")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", bt)
        object.__setattr__(self, "zeta", zeta)
        object.__setattr__(self, "b", bt / zeta)

    @property
    def degenerate(self) -> bool:
        # alpha + beta == 1: clicks no longer pull toward the recommendation
        return self.zeta >= 1.0


@dataclass(frozen=True)
class RewardSpec:
    """Linear reward ``1 - d * dist`` shared by the agent and the platform."""

    d: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.d <= 1.0):
            raise ConfigurationError(f"reward slope d must lie in [0, 1], got {self.d}")


@dataclass
class Trajectory:
    """One realised closed-loop run over ``horizon`` steps."""

    opinions: np.ndarray        # x_0 .. x_K
    recommendations: np.ndarray  # u_0 .. u_{K-1}
    clicks: np.ndarray          # c_0 .. c_{K-1}
    click_probs: np.ndarray     # gamma_0 .. gamma_{K-1}
    final_gamma: float | None = None  # probability that would govern a click at K

    def __post_init__(self):
        self.opinions = np.asarray(self.opinions, dtype=float)
        self.recommendations = np.asarray(self.recommendations, dtype=float)
        self.clicks = np.asarray(self.clicks, dtype=np.int8)
        self.click_probs = np.asarray(self.click_probs, dtype=float)
        K = len(self.recommendations)
        if not (len(self.opinions) == K + 1 and len(self.clicks) == K
                and len(self.click_probs) == K):
            raise ValueError("inconsistent trajectory lengths")

    @property
    def horizon(self) -> int:
        return len(self.recommendations)

    @property
    def x0(self) -> float:
        return float(self.opinions[0])


def _check_opinion(name, value):
    if not (-1.0 <= value <= 1.0):
        raise ValueError(f"{name} must lie in [-1, 1], got {value}")


def step(x_prev: float, x0: float, u_prev: float, c_prev: int,
         params: DynamicsParams) -> float:
    """Return the next opinion given the previous opinion, recommendation and click."""
    if c_prev not in (0, 1):
        raise ValueError(f"click must be 0 or 1, got {c_prev}")
    if c_prev:
        return params.alpha * x0 + params.beta * x_prev + (1.0 - params.zeta) * u_prev
    return (1.0 - params.b) * x0 + params.b * x_prev


def ex_post_opinion(x0: float, u0: float, clicks: Sequence[int],
                    params: DynamicsParams) -> tuple[float, float]:
    """Closed-form opinion after a click sequence under a constant recommendation.

    Returns ``(x_k, Gamma)`` with ``x_k = (1 - Gamma) x0 + Gamma u0`` and

        Gamma = (1 - zeta) * sum_j c_j b^(k-j-1) zeta^(number of clicks after j)

    evaluated in one backward pass.
    """
    _check_opinion("x0", x0)
    _check_opinion("u0", u0)
    gamma = 0.0
    # running factor b^(k-j-1) * zeta^(clicks after j)
    weight = 1.0
    for c in reversed(list(clicks)):
        if c not in (0, 1):
            raise ValueError(f"click must be 0 or 1, got {c}")
        if c:
            gamma += weight
            weight *= params.b * params.zeta
        else:
            weight *= params.b
    gamma *= 1.0 - params.zeta
    return (1.0 - gamma) * x0 + gamma * u0, gamma


def all_click_drift(m: int, distance: float, params: DynamicsParams) -> float:
    """Drift ``|x_m - x0|`` after ``m`` consecutive clicks from the innate opinion."""
    if params.beta == 1.0:
        # unreachable under the invariants (beta <= alpha, zeta <= 1)
        return 0.0
    return (1.0 - params.zeta) * distance * (1.0 - params.beta ** m) / (1.0 - params.beta)


def reward_value(dist: float, spec: RewardSpec) -> float:
    if dist < 0:
        raise ValueError("distance must be non-negative")
    return 1.0 - spec.d * dist


def _check_upto(traj: Trajectory, k: int):
    if not (1 <= k <= traj.horizon):
        raise ValueError(f"horizon k must satisfy 1 <= k <= {traj.horizon}, got {k}")


def _click_rewards(traj: Trajectory, k: int, spec: RewardSpec) -> float:
    dist = np.abs(traj.opinions[:k] - traj.recommendations[:k])
    return float(np.sum(traj.clicks[:k] * (1.0 - spec.d * dist)))


def agent_utility(traj: Trajectory, upto: int, lam: float, spec: RewardSpec,
                  x0: float | None = None) -> float:
    """Consumption reward averaged over ``upto`` steps minus the terminal drift.

    ``lam`` trades content consumption (weight ``lam``) against opinion
    preservation (weight ``1 - lam``).
    """
    _check_upto(traj, upto)
    if not (0.0 <= lam <= 1.0):
        raise ValueError(f"lambda must lie in [0, 1], got {lam}")
    if x0 is None:
        x0 = traj.x0
    consumption = _click_rewards(traj, upto, spec) / upto
    return lam * consumption - (1.0 - lam) * abs(traj.opinions[upto] - x0)


def platform_payoff(traj: Trajectory, upto: int, spec: RewardSpec) -> float:
    _check_upto(traj, upto)
    return _click_rewards(traj, upto, spec) / upto

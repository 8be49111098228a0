"""Agent clicking policies and platform recommendation policies.

Agent side: ``fixed`` clicks with a constant probability; ``adaptive``
divides its click probability by ``kappa`` whenever the freshly updated
opinion sits at least ``delta`` away from the innate opinion; ``forced``
applies the same division at a prescribed set of time indices (used for
coupling experiments).

Platform side: ``fixed`` always recommends ``u0``; ``explore`` samples a fresh
recommendation every ``period`` steps and otherwise repeats the best clicked
recommendation seen so far.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .dynamics import ConfigurationError

AGENT_KINDS = ("fixed", "adaptive", "forced")
PLATFORM_KINDS = ("fixed", "explore")


@dataclass(frozen=True)
class Distribution:
    """Sampling law over [-1, 1].

    ``kind`` is ``uniform`` (on ``[low, high]``), ``normal`` (``loc``,
    ``scale``) or ``point`` (``value``).  Normal samples falling outside
    [-1, 1] are either clipped or redrawn, per ``truncation``.
    """

    kind: str = "uniform"
    low: float = -1.0
    high: float = 1.0
    loc: float = 0.0
    scale: float = 0.5
    value: float = 0.0
    truncation: str = "clip"

    def __post_init__(self):
        if self.kind not in ("uniform", "normal", "point"):
            raise ConfigurationError(f"unknown distribution kind {self.kind!r}")
        if self.truncation not in ("clip", "reject"):
            raise ConfigurationError(f"unknown truncation {self.truncation!r}")
        if self.kind == "uniform" and not (-1.0 <= self.low <= self.high <= 1.0):
            raise ConfigurationError("uniform bounds must satisfy -1 <= low <= high <= 1")
        if self.kind == "normal" and self.scale < 0:
            raise ConfigurationError("normal scale must be non-negative")
        if self.kind == "normal" and self.truncation == "reject" and self.scale == 0 \
                and abs(self.loc) > 1:
            raise ConfigurationError("degenerate normal outside [-1, 1] cannot be rejected into range")
        if self.kind == "point" and not (-1.0 <= self.value <= 1.0):
            raise ConfigurationError("point mass must lie in [-1, 1]")

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.kind == "point":
            return np.full(n, float(self.value))
        if self.kind == "uniform":
            return rng.uniform(self.low, self.high, size=n)
        if self.truncation == "clip":
            return np.clip(rng.normal(self.loc, self.scale, size=n), -1.0, 1.0)
        out = np.empty(n)
        for i in range(n):
            while True:
                v = rng.normal(self.loc, self.scale)
                if -1.0 <= v <= 1.0:
                    out[i] = v
                    break
        return out

    def to_dict(self) -> dict:
        return {"kind": self.kind, "low": self.low, "high": self.high, "loc": self.loc,
                "scale": self.scale, "value": self.value, "truncation": self.truncation}


@dataclass(frozen=True)
class AgentPolicyConfig:
    kind: str = "fixed"
    gamma0: float = 1.0
    kappa: float = 1.0
    delta: float = 1.0
    schedule: tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind not in AGENT_KINDS:
            raise ConfigurationError(f"unknown agent policy {self.kind!r}")
        if not (0.0 <= self.gamma0 <= 1.0):
            raise ConfigurationError(f"gamma0 must lie in [0, 1], got {self.gamma0}")
        if self.kind == "adaptive":
            if not self.kappa > 1.0:
                raise ConfigurationError("adaptive policy needs kappa > 1")
            if not self.delta > 0.0:
                raise ConfigurationError("adaptive policy needs delta > 0")
        if self.kind == "forced":
            if self.kappa < 1.0:
                raise ConfigurationError("forced policy needs kappa >= 1")
            sched = tuple(int(k) for k in self.schedule)
            if any(b <= a for a, b in zip(sched, sched[1:])):
                raise ConfigurationError("forced schedule must be strictly increasing")
            if sched and sched[0] < 1:
                raise ConfigurationError("forced reductions apply from step 1 onward")
            object.__setattr__(self, "schedule", sched)

    def check_horizon(self, horizon: int):
        if self.kind == "forced" and self.schedule and self.schedule[-1] > horizon:
            raise ConfigurationError(
                f"forced schedule index {self.schedule[-1]} exceeds horizon {horizon}")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "gamma0": self.gamma0, "kappa": self.kappa,
                "delta": self.delta, "schedule": list(self.schedule)}


@dataclass
class AgentPolicyState:
    gamma: float
    reductions: int = 0

    @classmethod
    def initial(cls, config: AgentPolicyConfig) -> "AgentPolicyState":
        return cls(gamma=float(config.gamma0))


def agent_click_probability(state: AgentPolicyState) -> float:
    return state.gamma


def agent_policy_advance(state: AgentPolicyState, x_next: float, x0: float, k_next: int,
                         config: AgentPolicyConfig) -> AgentPolicyState:
    """Update the click probability once ``x_next`` (the opinion at ``k_next``) is known.

    A triggered reduction governs the click at ``k_next``.
    """
    if config.kind == "adaptive":
        triggered = abs(x_next - x0) >= config.delta
    elif config.kind == "forced":
        triggered = k_next in config.schedule
    else:
        return state
    if not triggered:
        return state
    r = state.reductions + 1
    # recompute from gamma0 so gamma == gamma0 / kappa**r holds exactly
    return AgentPolicyState(gamma=config.gamma0 / config.kappa ** r, reductions=r)


@dataclass(frozen=True)
class PlatformPolicyConfig:
    kind: str = "fixed"
    u0: Optional[float] = 1.0
    period: int = 5
    exploration: Distribution = field(default_factory=Distribution)

    def __post_init__(self):
        if self.kind not in PLATFORM_KINDS:
            raise ConfigurationError(f"unknown platform policy {self.kind!r}")
        if self.kind == "fixed" and self.u0 is None:
            raise ConfigurationError("fixed platform policy needs u0")
        if self.u0 is not None and not (-1.0 <= self.u0 <= 1.0):
            raise ConfigurationError(f"u0 must lie in [-1, 1], got {self.u0}")
        if self.period < 1:
            raise ConfigurationError("exploration period must be >= 1")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "u0": self.u0, "period": self.period,
                "exploration": self.exploration.to_dict()}


@dataclass
class PlatformPolicyState:
    """Observed ``(u, c, c * reward)`` records and the index of the best clicked one."""

    history: list = field(default_factory=list)
    best_index: Optional[int] = None

    @property
    def best_reward(self) -> Optional[float]:
        if self.best_index is None:
            return None
        return self.history[self.best_index][2]


def platform_recommend(state: PlatformPolicyState, k: int, config: PlatformPolicyConfig,
                       rng: Optional[np.random.Generator] = None) -> float:
    """Recommendation at step ``k``.

    For ``explore``, steps with ``k % period == 0`` draw from the exploration
    law (at ``k == 0`` a configured ``u0`` is used instead, if given).  Other
    steps exploit the best clicked recommendation, or repeat the most recent
    one when nothing has been clicked yet.
    """
    if config.kind == "fixed":
        return float(config.u0)
    if k % config.period == 0:
        if k == 0 and config.u0 is not None:
            return float(config.u0)
        if rng is None:
            raise ValueError("exploration step needs a random generator")
        return float(config.exploration.sample(rng, 1)[0])
    if state.best_index is not None:
        return state.history[state.best_index][0]
    return state.history[-1][0]


def platform_observe(state: PlatformPolicyState, u_k: float, c_k: int,
                     reward: float) -> PlatformPolicyState:
    stored = c_k * reward
    state.history.append((u_k, c_k, stored))
    if c_k == 1 and (state.best_index is None or stored > state.best_reward):
        state.best_index = len(state.history) - 1
    return state

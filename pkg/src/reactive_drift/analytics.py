"""Closed-form expectations, limits and the finite-horizon lambda threshold.

Every function here is deterministic and cheap; the Monte Carlo engine and
the exhaustive enumerator are checked against these values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .dynamics import ConfigurationError, DynamicsParams, all_click_drift

SEARCH_CAP = 10**6


class ApplicabilityError(ValueError):
    """A closed-form result does not apply to the given scenario."""


@dataclass(frozen=True)
class ScenarioParams:
    params: DynamicsParams
    x0: float
    u0: float
    gamma0: float
    kappa: float = 1.2
    delta: float = 0.3
    lam: float = 0.5
    horizon: int = 1

    def __post_init__(self):
        for name in ("x0", "u0"):
            v = getattr(self, name)
            if not (-1.0 <= v <= 1.0):
                raise ConfigurationError(f"{name} must lie in [-1, 1], got {v}")
        if not (0.0 <= self.gamma0 <= 1.0):
            raise ConfigurationError(f"gamma0 must lie in [0, 1], got {self.gamma0}")
        if self.kappa < 1.0:
            raise ConfigurationError("kappa must be >= 1")
        if not self.delta > 0.0:
            raise ConfigurationError("delta must be > 0")
        if not (0.0 <= self.lam <= 1.0):
            raise ConfigurationError("lambda must lie in [0, 1]")
        if self.horizon < 0:
            raise ConfigurationError("horizon must be non-negative")

    @property
    def distance(self) -> float:
        return abs(self.u0 - self.x0)

    def to_dict(self) -> dict:
        return {"alpha": self.params.alpha, "beta": self.params.beta, "x0": self.x0,
                "u0": self.u0, "gamma0": self.gamma0, "kappa": self.kappa,
                "delta": self.delta, "lambda": self.lam, "horizon": self.horizon}


def decay_ratio(s: ScenarioParams) -> float:
    """Per-step contraction ``r = b (gamma0 zeta + 1 - gamma0)`` of the expected drift."""
    p = s.params
    return p.b * (s.gamma0 * p.zeta + 1.0 - s.gamma0)


def drift_coefficient(s: ScenarioParams) -> float:
    """Long-run weight on ``u0 - x0`` of the expected fixed-policy opinion."""
    return s.gamma0 * (1.0 - s.params.zeta) / (1.0 - decay_ratio(s))


def expected_opinion_fixed(k: int, s: ScenarioParams) -> float:
    if k < 0:
        raise ValueError("k must be non-negative")
    r = decay_ratio(s)
    return s.x0 + s.gamma0 * (1.0 - s.params.zeta) * (1.0 - r**k) / (1.0 - r) * (s.u0 - s.x0)


def limit_opinion_fixed(s: ScenarioParams) -> float:
    return s.x0 + drift_coefficient(s) * (s.u0 - s.x0)


def max_all_click_drift(s: ScenarioParams) -> float:
    """Supremum over m of the drift reached after m consecutive clicks."""
    p = s.params
    return (1.0 - p.zeta) * s.distance / (1.0 - p.beta)


def deviation_reachable(s: ScenarioParams) -> bool:
    return max_all_click_drift(s) >= s.delta


def literal_gamma_condition(s: ScenarioParams) -> bool:
    """The convergence condition exactly as printed: ``(1 - alpha/zeta)|u0 - x0| < delta``.

    Reported alongside :func:`deviation_reachable`; the two frequently disagree.
    """
    p = s.params
    return (1.0 - p.alpha / p.zeta) * s.distance < s.delta


def limit_opinion_adaptive(s: ScenarioParams) -> float:
    if not deviation_reachable(s):
        raise ApplicabilityError(
            "drift threshold is unreachable: the adaptive policy coincides with the "
            f"fixed one and its limit is {limit_opinion_fixed(s)!r}")
    return s.x0


def limit_utilities(s: ScenarioParams, d: float = 0.0) -> tuple[float, float]:
    """Long-run expected utilities ``(fixed, adaptive)`` under unit rewards."""
    if d != 0.0:
        raise ApplicabilityError("long-run utilities assume unit rewards (d = 0)")
    fixed = s.lam * s.gamma0 - (1.0 - s.lam) * drift_coefficient(s) * s.distance
    return fixed, 0.0


def longrun_lambda_threshold(s: ScenarioParams) -> float:
    """Fixed policy beats the adaptive one in the long run iff lambda exceeds this."""
    if s.distance == 0.0:
        raise ApplicabilityError("u0 == x0: the fixed policy never drifts")
    p = s.params
    if p.zeta >= 1.0:
        return 0.0
    return 1.0 / (1.0 + (1.0 - decay_ratio(s)) / ((1.0 - p.zeta) * s.distance))


def min_clicks_to_deviate(s: ScenarioParams) -> int | None:
    """Smallest m with all-click drift >= delta, or ``None`` when unreachable."""
    if not deviation_reachable(s):
        return None
    for m in range(1, SEARCH_CAP + 1):
        if all_click_drift(m, s.distance, s.params) >= s.delta:
            return m
    # equality at the supremum is only attained in the limit
    return None


def min_skips_to_return(s: ScenarioParams) -> int:
    p = s.params
    if p.b == 0.0:
        return 1
    bound = (1.0 - p.zeta) * s.distance * (1.0 - p.beta**s.horizon) / (1.0 - p.beta)
    for n in range(1, SEARCH_CAP + 1):
        if bound * p.b**n < s.delta:
            return n
    raise ApplicabilityError("no admissible skip count below the search cap")


@dataclass(frozen=True)
class Prop3Bound:
    """Finite-horizon sufficient threshold and all intermediate quantities."""

    M: int
    N: int
    G_lb: float
    D0: float
    Delta: float
    P: float
    D_ub: float
    lambda_star: float
    flags: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"M": self.M, "N": self.N, "G_lb": self.G_lb, "D0": self.D0,
                "Delta": self.Delta, "P": self.P, "D_ub": self.D_ub,
                "lambda_star": self.lambda_star, **self.flags}


def one_reduction_opinion(s: ScenarioParams) -> float:
    """Expected opinion at K when only the last click uses ``gamma0 / kappa``."""
    p = s.params
    g = s.gamma0 / s.kappa
    prev = expected_opinion_fixed(s.horizon - 1, s)
    return ((p.alpha * g + (1.0 - p.b) * (1.0 - g)) * s.x0
            + (1.0 - p.zeta) * g * s.u0
            + (p.beta * g + p.b * (1.0 - g)) * prev)


def prop3_bound(s: ScenarioParams) -> Prop3Bound:
    """Threshold on lambda below which the adaptive policy wins in expectation at horizon K.

    Raises :class:`ApplicabilityError` when no reduction can happen within the
    horizon or when the drift bound is vacuous.
    """
    K = s.horizon
    M = min_clicks_to_deviate(s)
    if M is None:
        raise ApplicabilityError("drift threshold unreachable: no reduction can occur")
    if K <= M:
        raise ApplicabilityError(f"horizon K={K} must exceed M={M}")
    if s.gamma0 == 0.0:
        raise ApplicabilityError("gamma0 = 0: the agent never clicks, no reduction occurs")
    if s.kappa <= 1.0:
        raise ApplicabilityError("kappa must exceed 1 for a reduction to change anything")
    N = min_skips_to_return(s)
    G_lb = (M - (1.0 - s.kappa ** -(K - M)) / (1.0 - s.kappa)) / K
    D0 = abs(expected_opinion_fixed(K, s) - s.x0)
    Delta = one_reduction_opinion(s)
    P = s.gamma0**M * (1.0 - s.gamma0 / s.kappa) ** (K - M)
    if M >= 2 and N == 1:
        D_ub = s.delta * P + abs(Delta - s.x0) * (1.0 - P)
    else:
        D_ub = abs(Delta - s.x0)
    if not D0 > D_ub:
        raise ApplicabilityError(f"bound is vacuous: D0={D0!r} <= D_ub={D_ub!r}")
    lam_star = 1.0 / (1.0 + s.gamma0 * (1.0 - G_lb) / (D0 - D_ub))
    flags = {"reachable": True, "literal_condition": literal_gamma_condition(s),
             "degenerate": s.params.degenerate}
    return Prop3Bound(M, N, G_lb, D0, Delta, P, D_ub, lam_star, flags)

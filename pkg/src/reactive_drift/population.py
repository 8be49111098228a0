"""Many independent agents with sampled innate opinions and recommendations.

Agent ``i`` draws ``(x0_i, u0_i)`` from its own sampling stream and its click
uniforms from its own click stream, both keyed by ``(master_seed, i)`` exactly
as trials are in :mod:`reactive_drift.montecarlo`.  The fixed and adaptive
runs of an agent share those uniforms.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .analytics import ScenarioParams
from .dynamics import ConfigurationError, DynamicsParams
from .montecarlo import CLICK_STREAM, make_experiment, simulate_batch, trial_generator
from .policies import Distribution

SAMPLING_STREAM = 2
DEFAULT_BINS = 50


@dataclass(frozen=True)
class PopulationConfig:
    num_agents: int
    params: DynamicsParams
    gamma0: float
    kappa: float
    delta: float
    horizon: int
    innate: Distribution = field(default_factory=lambda: Distribution("uniform"))
    recommendation: Distribution = field(
        default_factory=lambda: Distribution("normal", loc=0.0, scale=0.5))
    master_seed: int = 0

    def __post_init__(self):
        if self.num_agents < 1:
            raise ConfigurationError("num_agents must be >= 1")
        if self.horizon < 0:
            raise ConfigurationError("horizon must be >= 0")
        # validates gamma0, kappa, delta
        self.scenario(0.0, 0.0)

    def scenario(self, x0: float, u0: float) -> ScenarioParams:
        return ScenarioParams(self.params, x0, u0, self.gamma0, self.kappa, self.delta,
                              horizon=self.horizon)

    def to_dict(self) -> dict:
        return {"num_agents": self.num_agents, "alpha": self.params.alpha,
                "beta": self.params.beta, "gamma0": self.gamma0, "kappa": self.kappa,
                "delta": self.delta, "horizon": self.horizon,
                "innate": self.innate.to_dict(), "recommendation": self.recommendation.to_dict(),
                "master_seed": int(self.master_seed)}


@dataclass
class PopulationResult:
    innate: np.ndarray
    recommendations: np.ndarray
    final_fixed: np.ndarray
    final_adaptive: np.ndarray

    @staticmethod
    def concat(parts):
        return PopulationResult(*(np.concatenate([getattr(p, f) for p in parts]) for f in
                                  ("innate", "recommendations", "final_fixed", "final_adaptive")))


def _run_agents(config: PopulationConfig, indices) -> PopulationResult:
    indices = list(indices)
    n, K = len(indices), config.horizon
    x0 = np.empty(n)
    u0 = np.empty(n)
    z = np.empty((n, K))
    for row, i in enumerate(indices):
        rng = trial_generator(config.master_seed, i, SAMPLING_STREAM)
        x0[row] = config.innate.sample(rng, 1)[0]
        u0[row] = config.recommendation.sample(rng, 1)[0]
        z[row] = trial_generator(config.master_seed, i, CLICK_STREAM).random(K)
    if K == 0:
        return PopulationResult(x0, u0, x0.copy(), x0.copy())
    finals = []
    for kind in ("fixed", "adaptive"):
        # x0/u0 of the template scenario are overridden per agent
        exp = make_experiment(config.scenario(0.0, 0.0), kind, seed=config.master_seed)
        finals.append(simulate_batch(exp, indices, x0=x0, u0=u0, z=z).opinions[:, -1])
    return PopulationResult(x0, u0, finals[0], finals[1])


def _chunk_job(args):
    return _run_agents(*args)


def run_population(config: PopulationConfig, workers: int = 1) -> PopulationResult:
    n = config.num_agents
    if workers <= 1:
        return _run_agents(config, range(n))
    chunk = max(1, -(-n // (4 * workers)))
    jobs = [(config, range(a, min(n, a + chunk))) for a in range(0, n, chunk)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return PopulationResult.concat(list(pool.map(_chunk_job, jobs)))


def unreachable_mask(config: PopulationConfig, result: PopulationResult) -> np.ndarray:
    """Agents whose drift threshold cannot be crossed even by clicking every step."""
    p = config.params
    dist = np.abs(result.recommendations - result.innate)
    return (1.0 - p.zeta) * dist / (1.0 - p.beta) < config.delta


def wasserstein1(a, b) -> float:
    """Empirical 1-Wasserstein distance between two equally sized samples."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    if a.shape != b.shape:
        raise ValueError(f"samples must have equal length, got {a.size} and {b.size}")
    if a.size == 0:
        return 0.0
    return float(np.mean(np.abs(a - b)))


def histogram(samples, bins: int = DEFAULT_BINS, range_=(-1.0, 1.0)) -> np.ndarray:
    """Equal-width bin counts; the last bin includes its right edge, out-of-range samples are dropped."""
    if bins < 1:
        raise ValueError("bins must be >= 1")
    counts, _ = np.histogram(np.asarray(samples, dtype=float), bins=bins, range=range_)
    return counts

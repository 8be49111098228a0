"""Seed-reproducible trial engine, aggregate estimators, coupling and exact enumeration.

Seeding contract
----------------
Trial ``i`` of an experiment with master seed ``s`` owns two independent
streams, ``trial_generator(s, i, CLICK_STREAM)`` and
``trial_generator(s, i, EXPLORE_STREAM)``.  Each is a PCG64 generator seeded
with ``SeedSequence(entropy=s, spawn_key=(i, stream))``.  The click stream
yields exactly one uniform ``z_k`` per step and ``c_k = 1{z_k < gamma_k}``;
the exploration stream is consumed only at platform exploration steps.
Trajectories are therefore a pure function of ``(s, i)`` and independent of
how trials are scheduled.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import analytics
from .analytics import ScenarioParams
from .dynamics import ConfigurationError, RewardSpec, Trajectory, step
from .policies import (AgentPolicyConfig, AgentPolicyState, PlatformPolicyConfig,
                       PlatformPolicyState, agent_click_probability, agent_policy_advance,
                       platform_observe, platform_recommend)

GENERATOR_ID = "numpy.random.PCG64 via SeedSequence(entropy=master_seed, spawn_key=(index, stream)); v1"
CLICK_STREAM = 0
EXPLORE_STREAM = 1
ENUMERATION_CAP = 16


def trial_generator(master_seed: int, index: int, stream: int = CLICK_STREAM) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(index), int(stream)))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class ExperimentConfig:
    """Unit of reproducibility.

    ``scenario`` supplies the dynamics, the innate opinion, lambda and the
    horizon; ``agent`` and ``platform`` decide clicks and recommendations.
    """

    scenario: ScenarioParams
    agent: AgentPolicyConfig
    platform: PlatformPolicyConfig
    reward: RewardSpec = field(default_factory=RewardSpec)
    trials: int = 1
    master_seed: int = 0

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigurationError("trials must be >= 1")
        if self.scenario.horizon < 1:
            raise ConfigurationError("horizon must be >= 1")
        if not (0 <= int(self.master_seed) < 2**64):
            raise ConfigurationError("master seed must be an unsigned 64-bit integer")
        self.agent.check_horizon(self.scenario.horizon)

    @property
    def horizon(self) -> int:
        return self.scenario.horizon

    def with_agent(self, agent: AgentPolicyConfig) -> "ExperimentConfig":
        return replace(self, agent=agent)

    def to_dict(self) -> dict:
        return {"scenario": self.scenario.to_dict(), "agent": self.agent.to_dict(),
                "platform": self.platform.to_dict(), "reward": {"d": self.reward.d},
                "trials": self.trials, "master_seed": int(self.master_seed)}


def make_experiment(scenario: ScenarioParams, agent_kind: str = "fixed", *, d: float = 0.0,
                    trials: int = 1, seed: int = 0, platform: PlatformPolicyConfig | None = None,
                    schedule=()) -> ExperimentConfig:
    """Build an experiment whose agent policy takes gamma0, kappa, delta from ``scenario``."""
    agent = AgentPolicyConfig(kind=agent_kind, gamma0=scenario.gamma0, kappa=scenario.kappa,
                              delta=scenario.delta, schedule=tuple(schedule))
    if platform is None:
        platform = PlatformPolicyConfig(kind="fixed", u0=scenario.u0)
    return ExperimentConfig(scenario, agent, platform, RewardSpec(d), trials, seed)


# --------------------------------------------------------------------------
# scalar reference path


def run_trial(config: ExperimentConfig, trial_index: int) -> Trajectory:
    """Execute one closed-loop run through the policy state machines."""
    s = config.scenario
    K = s.horizon
    clicks_rng = trial_generator(config.master_seed, trial_index, CLICK_STREAM)
    explore_rng = trial_generator(config.master_seed, trial_index, EXPLORE_STREAM)
    z = clicks_rng.random(K)

    agent = AgentPolicyState.initial(config.agent)
    platform = PlatformPolicyState()
    x = np.empty(K + 1)
    u = np.empty(K)
    c = np.zeros(K, dtype=np.int8)
    g = np.empty(K + 1)
    x[0] = s.x0
    for k in range(K):
        u[k] = platform_recommend(platform, k, config.platform, explore_rng)
        g[k] = agent_click_probability(agent)
        c[k] = 1 if z[k] < g[k] else 0
        x[k + 1] = step(x[k], s.x0, u[k], int(c[k]), s.params)
        agent = agent_policy_advance(agent, x[k + 1], s.x0, k + 1, config.agent)
        reward = 1.0 - config.reward.d * abs(x[k] - u[k])
        platform_observe(platform, u[k], int(c[k]), reward)
    g[K] = agent_click_probability(agent)
    return Trajectory(x, u, c, g[:K], final_gamma=float(g[K]))


# --------------------------------------------------------------------------
# vectorised engine (trials along axis 0, identical arithmetic to run_trial)


@dataclass
class Batch:
    """Trajectories of several trials stacked along axis 0."""

    x0: np.ndarray           # (n,)
    opinions: np.ndarray     # (n, K+1)
    recommendations: np.ndarray  # (n, K)
    clicks: np.ndarray       # (n, K) int8
    gammas: np.ndarray       # (n, K+1); gammas[:, K] is the probability after the last update

    @property
    def horizon(self) -> int:
        return self.recommendations.shape[1]

    def trajectory(self, i: int) -> Trajectory:
        return Trajectory(self.opinions[i], self.recommendations[i], self.clicks[i],
                          self.gammas[i, :-1], final_gamma=float(self.gammas[i, -1]))

    def click_rewards(self, d: float) -> np.ndarray:
        dist = np.abs(self.opinions[:, :-1] - self.recommendations)
        return self.clicks * (1.0 - d * dist)

    def payoff_series(self, d: float) -> np.ndarray:
        """Prefix averages of click rewards; column k-1 holds the payoff over k steps."""
        K = self.horizon
        return np.cumsum(self.click_rewards(d), axis=1) / np.arange(1, K + 1)

    def utility_series(self, lam: float, d: float) -> np.ndarray:
        drift = np.abs(self.opinions[:, 1:] - self.x0[:, None])
        return lam * self.payoff_series(d) - (1.0 - lam) * drift

    @staticmethod
    def concat(parts: list["Batch"]) -> "Batch":
        return Batch(*(np.concatenate([getattr(p, f) for p in parts])
                       for f in ("x0", "opinions", "recommendations", "clicks", "gammas")))


def _exploration_draws(config: ExperimentConfig, indices) -> np.ndarray:
    pc = config.platform
    K = config.horizon
    steps = [k for k in range(K) if k % pc.period == 0 and not (k == 0 and pc.u0 is not None)]
    out = np.empty((len(indices), len(steps)))
    for row, i in enumerate(indices):
        rng = trial_generator(config.master_seed, i, EXPLORE_STREAM)
        for j in range(len(steps)):
            out[row, j] = pc.exploration.sample(rng, 1)[0]
    return out


def simulate_batch(config: ExperimentConfig, indices, x0=None, u0=None, z=None) -> Batch:
    """Simulate trials ``indices`` together.

    ``x0``/``u0`` optionally override the scenario per trial (population
    runs); ``z`` optionally supplies the click uniforms directly, shape
    ``(n, K)``.
    """
    indices = np.asarray(list(indices), dtype=np.int64)
    n = len(indices)
    s = config.scenario
    p = s.params
    K = s.horizon
    ac, pc = config.agent, config.platform
    x0 = np.full(n, s.x0) if x0 is None else np.asarray(x0, dtype=float)
    if z is None:
        z = np.empty((n, K))
        for row, i in enumerate(indices):
            z[row] = trial_generator(config.master_seed, i, CLICK_STREAM).random(K)
    explore = pc.kind == "explore"
    if explore:
        draws = _exploration_draws(config, indices)
        best_u = np.zeros(n)
        best_r = np.full(n, -np.inf)
        last_u = np.zeros(n)
        j = 0
    else:
        u_fixed = np.full(n, pc.u0) if u0 is None else np.asarray(u0, dtype=float)
    schedule = set(ac.schedule)

    x = np.empty((n, K + 1))
    u = np.empty((n, K))
    c = np.zeros((n, K), dtype=np.int8)
    g = np.empty((n, K + 1))
    x[:, 0] = x0
    gamma = np.full(n, float(ac.gamma0))
    red = np.zeros(n, dtype=np.int64)
    # same scalar arithmetic as agent_policy_advance, so both paths agree bit for bit
    levels = np.array([ac.gamma0 / ac.kappa ** r for r in range(K + 1)])
    for k in range(K):
        if not explore:
            uk = u_fixed
        elif k % pc.period == 0:
            if k == 0 and pc.u0 is not None:
                uk = np.full(n, float(pc.u0))
            else:
                uk = draws[:, j].copy()
                j += 1
        else:
            uk = np.where(best_r > -np.inf, best_u, last_u)
        u[:, k] = uk
        g[:, k] = gamma
        ck = z[:, k] < gamma
        c[:, k] = ck
        xk = x[:, k]
        x[:, k + 1] = np.where(ck, p.alpha * x0 + p.beta * xk + (1.0 - p.zeta) * uk,
                               (1.0 - p.b) * x0 + p.b * xk)
        if ac.kind == "adaptive":
            trig = np.abs(x[:, k + 1] - x0) >= ac.delta
        elif ac.kind == "forced":
            trig = np.full(n, (k + 1) in schedule)
        else:
            trig = None
        if trig is not None and trig.any():
            red = red + trig
            gamma = np.where(trig, levels[red], gamma)
        if explore:
            stored = ck * (1.0 - config.reward.d * np.abs(xk - uk))
            better = ck & (stored > best_r)
            best_u = np.where(better, uk, best_u)
            best_r = np.where(better, stored, best_r)
            last_u = uk
    g[:, K] = gamma
    return Batch(x0, x, u, c, g)


def _simulate_chunk(args):
    config, indices = args
    return simulate_batch(config, indices)


def simulate_trials(config: ExperimentConfig, workers: int = 1, chunk: int | None = None) -> Batch:
    """All trials of ``config`` in trial-index order, optionally across processes."""
    n = config.trials
    if workers <= 1:
        return simulate_batch(config, range(n))
    if chunk is None:
        chunk = max(1, -(-n // (4 * workers)))
    jobs = [(config, range(a, min(n, a + chunk))) for a in range(0, n, chunk)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_simulate_chunk, jobs))
    return Batch.concat(parts)


# --------------------------------------------------------------------------
# estimators


def mean_se(values: np.ndarray, axis: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Sample mean and standard error (0 for a single sample or zero variance)."""
    values = np.asarray(values, dtype=float)
    n = values.shape[axis]
    mean = values.mean(axis=axis)
    if n < 2:
        return mean, np.zeros_like(mean)
    se = values.std(axis=axis, ddof=1) / np.sqrt(n)
    # constant columns: report the value itself and exactly zero spread
    with np.errstate(invalid="ignore"):
        const = np.ptp(values, axis=axis) == 0
    first = np.take(values, 0, axis=axis)
    mean = np.where(const, first, mean)
    se = np.where(const, 0.0, se)
    return mean, se


@dataclass
class SeriesEstimate:
    """Per-step means and standard errors for k = 0..K.

    Utility and payoff are undefined at k = 0 and stored as NaN there.
    """

    n: int
    mean_opinion: np.ndarray
    se_opinion: np.ndarray
    mean_utility: np.ndarray
    se_utility: np.ndarray
    mean_payoff: np.ndarray
    se_payoff: np.ndarray
    mean_gamma: np.ndarray
    se_gamma: np.ndarray

    @property
    def horizon(self) -> int:
        return len(self.mean_opinion) - 1


def _pad_nan(a):
    return np.concatenate([[np.nan], a])


def estimate_series(batch: Batch, lam: float, d: float) -> SeriesEstimate:
    mo, so = mean_se(batch.opinions)
    mu, su = mean_se(batch.utility_series(lam, d))
    mp, sp = mean_se(batch.payoff_series(d))
    mg, sg = mean_se(batch.gammas)
    return SeriesEstimate(batch.opinions.shape[0], mo, so, _pad_nan(mu), _pad_nan(su),
                          _pad_nan(mp), _pad_nan(sp), mg, sg)


def run_experiment(config: ExperimentConfig, workers: int = 1) -> SeriesEstimate:
    batch = simulate_trials(config, workers)
    return estimate_series(batch, config.scenario.lam, config.reward.d)


def utility_difference(config: ExperimentConfig, workers: int = 1) -> tuple[float, float]:
    """Mean and standard error of ``U_adaptive(K) - U_fixed(K)`` over paired trials.

    Both policies see the same click uniforms for a given trial index.
    """
    s = config.scenario
    adaptive = config.with_agent(replace(config.agent, kind="adaptive"))
    fixed = config.with_agent(replace(config.agent, kind="fixed"))
    ua = simulate_trials(adaptive, workers).utility_series(s.lam, config.reward.d)[:, -1]
    uf = simulate_trials(fixed, workers).utility_series(s.lam, config.reward.d)[:, -1]
    m, se = mean_se(ua - uf)
    return float(m), float(se)


# --------------------------------------------------------------------------
# coupling


def _forced(config: ExperimentConfig, schedule) -> ExperimentConfig:
    agent = AgentPolicyConfig(kind="forced", gamma0=config.agent.gamma0,
                              kappa=config.agent.kappa, delta=config.agent.delta,
                              schedule=tuple(sorted(schedule)))
    return config.with_agent(agent)


def _check_nested(schedule_a, schedule_b):
    if not set(schedule_a) <= set(schedule_b):
        raise ConfigurationError("coupled schedules must be nested: schedule_a must be a subset of schedule_b")


def run_coupled_pair(config: ExperimentConfig, schedule_a, schedule_b,
                     trial_index: int) -> tuple[Trajectory, Trajectory]:
    """Two forced-reduction runs driven by the same click uniforms.

    ``schedule_b`` must contain ``schedule_a``; then on every path the clicks
    under ``b`` never exceed those under ``a`` and neither does the terminal
    drift.
    """
    _check_nested(schedule_a, schedule_b)
    return (run_trial(_forced(config, schedule_a), trial_index),
            run_trial(_forced(config, schedule_b), trial_index))


@dataclass
class CouplingReport:
    trials: int
    click_violations: int
    drift_violations: int
    G_a: float
    G_b: float
    D_a: float
    D_b: float


def run_coupled_batch(config: ExperimentConfig, schedule_a, schedule_b,
                      workers: int = 1) -> CouplingReport:
    _check_nested(schedule_a, schedule_b)
    a = simulate_trials(_forced(config, schedule_a), workers)
    b = simulate_trials(_forced(config, schedule_b), workers)
    x0 = config.scenario.x0
    da = np.abs(a.opinions[:, -1] - x0)
    db = np.abs(b.opinions[:, -1] - x0)
    click_bad = int(np.any(b.clicks > a.clicks, axis=1).sum())
    drift_bad = int(np.sum(db > da))
    return CouplingReport(config.trials, click_bad, drift_bad,
                          float(a.clicks.mean()), float(b.clicks.mean()),
                          float(da.mean()), float(db.mean()))


# --------------------------------------------------------------------------
# exact enumeration


@dataclass
class ExactSeries:
    """Exact expectations for k = 0..K (utility/payoff NaN at k = 0)."""

    opinion: np.ndarray
    utility: np.ndarray
    payoff: np.ndarray
    gamma: np.ndarray
    total_probability: float


def enumerate_exact(config: ExperimentConfig) -> ExactSeries:
    """Sum over every click path, weighting each by its probability under the agent policy.

    Walks the binary tree of click prefixes depth-first with the scalar
    ``step`` and policy state machine, so shared prefixes are evaluated once.
    """
    s = config.scenario
    K = s.horizon
    if K > ENUMERATION_CAP:
        raise ConfigurationError(f"enumeration horizon capped at {ENUMERATION_CAP}, got {K}")
    if config.platform.kind != "fixed":
        raise ConfigurationError("enumeration requires the fixed-recommendation platform")
    u0 = float(config.platform.u0)
    d = config.reward.d
    lam = s.lam
    opinion = np.zeros(K + 1)
    utility = np.zeros(K + 1)
    payoff = np.zeros(K + 1)
    gamma = np.zeros(K + 1)
    total = 0.0

    stack = [(0, s.x0, AgentPolicyState.initial(config.agent), 1.0, 0.0)]
    while stack:
        k, x, state, prob, cum = stack.pop()
        opinion[k] += prob * x
        gamma[k] += prob * state.gamma
        if k > 0:
            avg = cum / k
            payoff[k] += prob * avg
            utility[k] += prob * (lam * avg - (1.0 - lam) * abs(x - s.x0))
        if k == K:
            total += prob
            continue
        g = agent_click_probability(state)
        for click, pc in ((1, g), (0, 1.0 - g)):
            if pc == 0.0:
                continue
            nx = step(x, s.x0, u0, click, s.params)
            ns = agent_policy_advance(state, nx, s.x0, k + 1, config.agent)
            r = click * (1.0 - d * abs(x - u0))
            stack.append((k + 1, nx, ns, prob * pc, cum + r))
    utility[0] = payoff[0] = np.nan
    return ExactSeries(opinion, utility, payoff, gamma, total)


def enumeration_discrepancy(config: ExperimentConfig) -> float:
    """Max over k of |exact E[X_k] - closed-form fixed-policy expectation|."""
    exact = enumerate_exact(config)
    s = replace(config.scenario, gamma0=config.agent.gamma0, u0=float(config.platform.u0))
    closed = np.array([analytics.expected_opinion_fixed(k, s) for k in range(s.horizon + 1)])
    return float(np.max(np.abs(exact.opinion - closed)))

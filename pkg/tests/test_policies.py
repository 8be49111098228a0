import numpy as np
import pytest
from hypothesis import given, strategies as st

from reactive_drift.dynamics import ConfigurationError
from reactive_drift.policies import (AgentPolicyConfig, AgentPolicyState, Distribution,
                                     PlatformPolicyConfig, PlatformPolicyState,
                                     agent_click_probability, agent_policy_advance,
                                     platform_observe, platform_recommend)

ADAPTIVE = AgentPolicyConfig("adaptive", gamma0=0.9, kappa=1.2, delta=0.3)


def test_fixed_probability_constant():
    cfg = AgentPolicyConfig("fixed", gamma0=0.6)
    s = AgentPolicyState.initial(cfg)
    for k, x in enumerate(np.linspace(-1, 1, 11), start=1):
        s = agent_policy_advance(s, x, -1.0, k, cfg)
        assert agent_click_probability(s) == 0.6


def test_adaptive_initial_and_reductions():
    s = AgentPolicyState.initial(ADAPTIVE)
    assert agent_click_probability(s) == 0.9
    s = agent_policy_advance(s, -0.6, -1.0, 1, ADAPTIVE)
    assert s.gamma == pytest.approx(0.75)
    s = agent_policy_advance(s, -0.6, -1.0, 2, ADAPTIVE)
    assert s.gamma == pytest.approx(0.625)
    assert s.reductions == 2


def test_adaptive_below_threshold():
    s = AgentPolicyState.initial(ADAPTIVE)
    assert agent_policy_advance(s, -0.9, -1.0, 1, ADAPTIVE) == s


def test_threshold_is_inclusive():
    cfg = AgentPolicyConfig("adaptive", gamma0=1.0, kappa=2.0, delta=0.5)
    s = agent_policy_advance(AgentPolicyState.initial(cfg), 0.5, 0.0, 1, cfg)
    assert s.gamma == 0.5


@given(st.lists(st.booleans(), max_size=50))
def test_gamma_matches_trigger_count(triggers):
    s = AgentPolicyState.initial(ADAPTIVE)
    prev = s.gamma
    for k, t in enumerate(triggers, start=1):
        s = agent_policy_advance(s, -0.5 if t else -1.0, -1.0, k, ADAPTIVE)
        assert s.gamma <= prev
        prev = s.gamma
    assert s.reductions == sum(triggers)
    assert s.gamma == 0.9 / 1.2 ** sum(triggers)


def test_forced_schedule():
    cfg = AgentPolicyConfig("forced", gamma0=0.8, kappa=2.0, schedule=(2, 5))
    s = AgentPolicyState.initial(cfg)
    gammas = []
    for k in range(1, 7):
        s = agent_policy_advance(s, 0.0, 0.0, k, cfg)
        gammas.append(s.gamma)
    assert gammas == [0.8, 0.4, 0.4, 0.4, 0.2, 0.2]


@pytest.mark.parametrize("kwargs", [
    dict(kind="adaptive", kappa=1.0, delta=0.3),
    dict(kind="adaptive", kappa=1.2, delta=0.0),
    dict(kind="forced", schedule=(3, 3)),
    dict(kind="forced", schedule=(0, 2)),
    dict(kind="sometimes"),
    dict(kind="fixed", gamma0=1.5),
])
def test_agent_config_rejects(kwargs):
    with pytest.raises(ConfigurationError):
        AgentPolicyConfig(**kwargs)


def test_fixed_platform():
    cfg = PlatformPolicyConfig("fixed", u0=0.4)
    st_ = PlatformPolicyState()
    for k in range(10):
        assert platform_recommend(st_, k, cfg) == 0.4


def test_explore_samples_on_period():
    cfg = PlatformPolicyConfig("explore", u0=None, period=5)
    state = PlatformPolicyState()
    rng = np.random.default_rng(1)
    u = platform_recommend(state, 0, cfg, rng)
    assert -1 <= u <= 1
    platform_observe(state, u, 0, 0.9)
    for k in range(1, 5):
        # nothing clicked yet: repeat the latest recommendation
        assert platform_recommend(state, k, cfg, rng) == u
        platform_observe(state, u, 0, 0.9)
    want = np.random.default_rng(1)
    want.uniform(-1, 1, size=1)
    assert platform_recommend(state, 5, cfg, rng) == want.uniform(-1, 1, size=1)[0]


def test_explore_exploits_argmax():
    cfg = PlatformPolicyConfig("explore", u0=None, period=5)
    state = PlatformPolicyState()
    for u, c, r in [(0.1, 1, 0.8), (0.2, 0, 1.0), (0.3, 1, 0.9)]:
        platform_observe(state, u, c, r)
    stored = [c * r for _, c, r in state.history]
    assert state.history[int(np.argmax(stored))][0] == 0.3
    assert platform_recommend(state, 3, cfg) == 0.3


def test_observe_ties_and_unclicked():
    state = PlatformPolicyState()
    platform_observe(state, 0.5, 1, 0.9)
    assert state.best_index == 0
    platform_observe(state, 0.6, 1, 0.9)
    assert state.best_index == 0
    platform_observe(state, 0.7, 0, 1.0)
    assert state.best_index == 0
    assert state.history[-1] == (0.7, 0, 0.0)


def test_explore_uses_configured_first_recommendation():
    cfg = PlatformPolicyConfig("explore", u0=-0.25, period=3)
    assert platform_recommend(PlatformPolicyState(), 0, cfg) == -0.25


@given(st.lists(st.tuples(st.floats(-1, 1), st.sampled_from([0, 1]), st.floats(0, 1)),
                min_size=1, max_size=30))
def test_exploit_attains_max(records):
    cfg = PlatformPolicyConfig("explore", u0=None, period=1000)
    state = PlatformPolicyState()
    for rec in records:
        platform_observe(state, *rec)
    u = platform_recommend(state, len(records), cfg)
    clicked = [(c * r, i) for i, (_, c, r) in enumerate(records) if c]
    if clicked:
        best = max(v for v, _ in clicked)
        first = min(i for v, i in clicked if v == best)
        assert u == records[first][0]
    else:
        assert u == records[-1][0]


@pytest.mark.parametrize("dist", [
    Distribution("uniform"),
    Distribution("normal", scale=2.0),
    Distribution("normal", scale=2.0, truncation="reject"),
    Distribution("point", value=-0.3),
])
def test_distribution_in_range(dist):
    x = dist.sample(np.random.default_rng(0), 2000)
    assert x.shape == (2000,)
    assert np.all((x >= -1) & (x <= 1))


def test_clip_piles_up_at_edges_reject_does_not():
    rng = np.random.default_rng(0)
    clip = Distribution("normal", scale=2.0).sample(rng, 2000)
    rej = Distribution("normal", scale=2.0, truncation="reject").sample(rng, 2000)
    assert np.mean(np.abs(clip) == 1) > 0.3
    assert np.mean(np.abs(rej) == 1) == 0


def test_platform_config_rejects():
    with pytest.raises(ConfigurationError):
        PlatformPolicyConfig("explore", period=0)
    with pytest.raises(ConfigurationError):
        PlatformPolicyConfig("fixed", u0=None)
    with pytest.raises(ConfigurationError):
        Distribution("uniform", low=-2)

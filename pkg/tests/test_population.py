import numpy as np
import pytest
from hypothesis import given, strategies as st

from reactive_drift.dynamics import ConfigurationError, DynamicsParams
from reactive_drift.policies import Distribution
from reactive_drift.population import (PopulationConfig, histogram, run_population,
                                       unreachable_mask, wasserstein1)

FIG1 = dict(params=DynamicsParams(0.3, 0.2), gamma0=0.6, kappa=1.2, delta=0.2)


def test_point_masses_adaptive_closer():
    gaps = []
    for seed in range(200):
        cfg = PopulationConfig(1, horizon=100, innate=Distribution("point", value=-1.0),
                               recommendation=Distribution("point", value=1.0),
                               master_seed=seed, **FIG1)
        r = run_population(cfg)
        gaps.append(abs(r.final_fixed[0] + 1) - abs(r.final_adaptive[0] + 1))
    assert np.mean(gaps) > 0
    assert min(gaps) >= 0


def test_recommendation_equals_opinion():
    cfg = PopulationConfig(50, horizon=30, innate=Distribution("point", value=0.4),
                           recommendation=Distribution("point", value=0.4), **FIG1)
    r = run_population(cfg)
    assert np.allclose(r.final_fixed, 0.4) and np.allclose(r.final_adaptive, 0.4)


def test_zero_horizon():
    r = run_population(PopulationConfig(20, horizon=0, **FIG1))
    assert np.array_equal(r.final_fixed, r.innate)
    assert np.array_equal(r.final_adaptive, r.innate)


def test_agents_keyed_by_index_and_parallel_safe():
    cfg = PopulationConfig(300, horizon=20, master_seed=3, **FIG1)
    a = run_population(cfg)
    b = run_population(cfg, workers=4)
    for f in ("innate", "recommendations", "final_fixed", "final_adaptive"):
        assert np.array_equal(getattr(a, f), getattr(b, f))
    small = run_population(PopulationConfig(10, horizon=20, master_seed=3, **FIG1))
    assert np.array_equal(small.final_adaptive, a.final_adaptive[:10])


def test_unreachable_agents_identical():
    cfg = PopulationConfig(2000, horizon=50, master_seed=1, **FIG1)
    r = run_population(cfg)
    m = unreachable_mask(cfg, r)
    assert 0 < m.sum() < 2000
    assert np.array_equal(r.final_fixed[m], r.final_adaptive[m])


def test_samples_in_range():
    cfg = PopulationConfig(1000, horizon=5, **FIG1,
                           recommendation=Distribution("normal", scale=3.0, truncation="reject"))
    r = run_population(cfg)
    assert np.all(np.abs(r.recommendations) <= 1)
    assert np.all(np.abs(r.innate) <= 1)


def test_config_rejects():
    with pytest.raises(ConfigurationError):
        PopulationConfig(0, horizon=5, **FIG1)
    with pytest.raises(ConfigurationError):
        PopulationConfig(10, horizon=5, params=DynamicsParams(0.3, 0.2), gamma0=2.0, kappa=1.2,
                         delta=0.2)


class TestWasserstein:
    def test_identical(self):
        a = np.random.default_rng(0).uniform(-1, 1, 100)
        assert wasserstein1(a, a[::-1]) == 0

    def test_translation(self):
        a = np.random.default_rng(0).uniform(-1, 0.5, 100)
        assert wasserstein1(a, a + 0.3) == pytest.approx(0.3)

    def test_small(self):
        assert wasserstein1([0, 1], [0, 0]) == 0.5

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            wasserstein1([0, 1], [0])

    @given(st.lists(st.floats(-1, 1), min_size=1, max_size=40), st.data())
    def test_matches_quantile_integral(self, a, data):
        b = data.draw(st.lists(st.floats(-1, 1), min_size=len(a), max_size=len(a)))
        # W1 = integral of |F_a - F_b| over the real line, by brute force on the merged grid
        grid = np.sort(np.concatenate([a, b]))
        Fa = np.searchsorted(np.sort(a), grid[:-1], side="right") / len(a)
        Fb = np.searchsorted(np.sort(b), grid[:-1], side="right") / len(b)
        want = float(np.sum(np.abs(Fa - Fb) * np.diff(grid)))
        assert wasserstein1(a, b) == pytest.approx(want, abs=1e-12)


class TestHistogram:
    def test_boundary(self):
        assert histogram([0, 0, 0], 2).tolist() == [0, 3]

    def test_empty(self):
        assert histogram([], 4).tolist() == [0, 0, 0, 0]

    def test_small(self):
        assert histogram([-1, -0.5, 0.5], 2).tolist() == [2, 1]

    def test_right_edge_inclusive_and_out_of_range(self):
        assert histogram([1.0, 1.5, -1.2], 4).tolist() == [0, 0, 0, 1]

    def test_bins(self):
        with pytest.raises(ValueError):
            histogram([0.1], 0)

"""A platform that explores every few steps and otherwise exploits.

Run with ``python3 demos/05_exploring_platform.py``.
"""
# %%
from reactive_drift.analytics import ScenarioParams
from reactive_drift.dynamics import DynamicsParams
from reactive_drift.montecarlo import make_experiment, run_experiment, run_trial
from reactive_drift.policies import PlatformPolicyConfig

platform = PlatformPolicyConfig("explore", u0=None, period=5)
s = ScenarioParams(DynamicsParams(0.4, 0.2), x0=-1.0, u0=1.0, gamma0=0.9, kappa=1.05,
                   delta=0.3, lam=0.2, horizon=40)

# %% one trajectory: recommendations change only at exploration steps or new best clicks
t = run_trial(make_experiment(s, "adaptive", d=0.1, seed=3, platform=platform), 0)
for k in range(0, 15):
    print(f"k={k:2d} u={t.recommendations[k]:+.3f} click={t.clicks[k]} x={t.opinions[k + 1]:+.3f}")

# %% averages over many trials
for kind in ("fixed", "adaptive"):
    est = run_experiment(make_experiment(s, kind, d=0.1, trials=1000, seed=0, platform=platform))
    print(f"{kind:>8}: payoff_40={est.mean_payoff[-1]:.4f}  utility_40={est.mean_utility[-1]:+.4f}"
          f"  gamma_40={est.mean_gamma[-1]:.4f}")

"""Closed-form expectations and how well simulation tracks them.

Run with ``python3 demos/02_closed_forms.py``.
"""
# %%
from reactive_drift import analytics as an
from reactive_drift.dynamics import DynamicsParams
from reactive_drift.montecarlo import enumerate_exact, make_experiment, run_experiment

s = an.ScenarioParams(DynamicsParams(0.4, 0.2), x0=-1.0, u0=1.0, gamma0=0.9, kappa=1.2,
                      delta=0.3, lam=0.5, horizon=200)

# %% expected opinion of a passive agent converges geometrically
print(f"decay ratio r = {an.decay_ratio(s):.4f}")
for k in (1, 2, 5, 10, 200):
    print(f"E[x_{k}] = {an.expected_opinion_fixed(k, s):+.6f}")
print(f"limit    = {an.limit_opinion_fixed(s):+.6f}")

# %% Monte Carlo agrees within a few standard errors
est = run_experiment(make_experiment(s, "fixed", trials=2000, seed=0))
for k in (1, 10, 200):
    print(f"k={k:3d}: MC {est.mean_opinion[k]:+.4f} +/- {est.se_opinion[k]:.4f}")

# %% small horizons can be enumerated exactly, for either policy
small = an.ScenarioParams(s.params, -1.0, 1.0, 0.9, 1.2, 0.3, 0.5, horizon=10)
for kind in ("fixed", "adaptive"):
    ex = enumerate_exact(make_experiment(small, kind, d=0.1))
    print(f"{kind:>8}: exact E[x_10] = {ex.opinion[-1]:+.6f}, E[U_10] = {ex.utility[-1]:+.6f}")

# %% long-run utilities and the weight at which passivity stops losing
fixed_u, adaptive_u = an.limit_utilities(s)
print(f"long-run utility: passive {fixed_u:+.5f}, reactive {adaptive_u:+.5f}")
print(f"passive agent breaks even at lambda = {an.longrun_lambda_threshold(s):.4f}")

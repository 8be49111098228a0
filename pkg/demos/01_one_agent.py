"""One agent, one recommendation, a few hundred steps.

Walks through the opinion update, the click-dependent weight of a realised
click sequence, and what a reactive agent does differently from a passive one.
Run with ``python3 demos/01_one_agent.py``.
"""
# %%
import numpy as np

from reactive_drift import DynamicsParams, ex_post_opinion, step
from reactive_drift.analytics import ScenarioParams
from reactive_drift.montecarlo import make_experiment, run_trial

params = DynamicsParams(alpha=0.4, beta=0.2)
print(f"zeta = {params.zeta:.3f}, b = {params.b:.3f}")

# %% a click pulls the opinion toward the recommendation, a skip pulls it home
x0, u = -1.0, 1.0
x1 = step(x0, x0, u, 1, params)
x2 = step(x1, x0, u, 0, params)
print(f"after a click: {x1:+.4f}, after a skip: {x2:+.4f}")

# %% the whole path collapses to one weight on the recommendation
clicks = [1, 1, 0, 1, 0, 0, 1]
x, weight = ex_post_opinion(x0, u, clicks, params)
print(f"clicks {clicks} -> x = {x:+.4f} (weight {weight:.4f} on u)")

# %% passive vs reactive agent on the same random numbers
scenario = ScenarioParams(params, x0=-1.0, u0=1.0, gamma0=0.9, kappa=1.2, delta=0.3, horizon=300)
for kind in ("fixed", "adaptive"):
    t = run_trial(make_experiment(scenario, kind, seed=42), 0)
    print(f"{kind:>8}: clicks={int(t.clicks.sum()):3d}  final x={t.opinions[-1]:+.4f}  "
          f"final gamma={t.final_gamma:.4f}  mean drift={np.abs(t.opinions + 1).mean():.3f}")

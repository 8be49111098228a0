"""A population of agents fed random recommendations.

Compares the final opinion distributions of passive and reactive agents with
the innate distribution, as text histograms and Wasserstein distances.
Run with ``python3 demos/04_population.py``.
"""
# %%
import numpy as np

from reactive_drift.dynamics import DynamicsParams
from reactive_drift.population import (PopulationConfig, histogram, run_population,
                                       unreachable_mask, wasserstein1)

cfg = PopulationConfig(10000, DynamicsParams(0.3, 0.2), gamma0=0.6, kappa=1.2, delta=0.2,
                       horizon=100)
res = run_population(cfg)


def bars(samples, bins=10):
    counts = histogram(samples, bins)
    return " ".join(f"{c:5d}" for c in counts)


# %%
print("innate    ", bars(res.innate))
print("passive   ", bars(res.final_fixed))
print("reactive  ", bars(res.final_adaptive))
print(f"W1 to innate: passive {wasserstein1(res.final_fixed, res.innate):.4f}, "
      f"reactive {wasserstein1(res.final_adaptive, res.innate):.4f}")

# %% agents whose recommendation is too close to trigger a reduction behave identically
mask = unreachable_mask(cfg, res)
print(f"{mask.sum()} agents can never react; identical finals: "
      f"{np.array_equal(res.final_fixed[mask], res.final_adaptive[mask])}")

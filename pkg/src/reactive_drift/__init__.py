"""Opinion drift of reactive users facing a recommendation platform.

Simulation engine, exact enumeration and closed-form oracles for a single
agent whose opinion is pulled toward the content it clicks on, and who may
cut its click probability once its opinion strays too far from its innate
value.
"""

__version__ = "0.1.0"

from .dynamics import (ConfigurationError, DynamicsParams, RewardSpec, Trajectory,
                       agent_utility, ex_post_opinion, platform_payoff, reward_value, step)
from .policies import (AgentPolicyConfig, AgentPolicyState, Distribution, PlatformPolicyConfig,
                       PlatformPolicyState, agent_click_probability, agent_policy_advance,
                       platform_observe, platform_recommend)
from .analytics import (ApplicabilityError, Prop3Bound, ScenarioParams, expected_opinion_fixed,
                        limit_opinion_adaptive, limit_opinion_fixed, limit_utilities,
                        longrun_lambda_threshold, min_clicks_to_deviate, min_skips_to_return,
                        prop3_bound)
from .montecarlo import (ExperimentConfig, SeriesEstimate, enumerate_exact, make_experiment,
                         run_coupled_pair, run_experiment, run_trial)
from .population import (PopulationConfig, PopulationResult, histogram, run_population,
                         wasserstein1)

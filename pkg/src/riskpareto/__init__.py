"""Pareto-front identification of risk measures under input uncertainty.

A Gaussian-process surrogate over the joint (design, environment) grid turns
pointwise credible bands into per-design risk-measure intervals and bounding
boxes; the optimizer picks the design whose optimistic corner is farthest
from the pessimistic Pareto front, stops once that distance drops below the
target accuracy, and reports the estimated Pareto set with its guarantee.
"""

from .env import EnvModel, uniform_env
from .gp import (GPFactorizationError, GPState, JointGrid, JointPoint, KernelSpec,
                 NoiseModel, posterior, posterior_many, prior_state,
                 realized_information_gain, sample_paths, update)
from .optimizer import (BetaSchedule, BoundMethod, ErrorParams, GPConfig, Objective,
                        ProblemSpec, RunHistory, beta_sqrts, compute_box_table,
                        guarantee_report, run, run_baseline, select_design,
                        select_env, step, termination_bound)
from .pareto import (BoxTable, build_box_table, dist_to_dominated, dist_to_front,
                     dominates, hypervolume, inference_discrepancy,
                     pareto_front_indices, phv_regret)
from .risk import (AmbiguitySet, Band, RiskInterval, RiskSpec, UnsupportedRiskError,
                   bound_decomposition, bound_sampling, box_width_bound_check,
                   exact_risk, q_function)
from .benchmarks import (TruthTable, build_truth, discretized_normal, eval_synthetic,
                         neg_std_risk, replicate_experiment)
from .config import ConfigError, RunConfig, parse_config, serialize_config

__version__ = "0.1.0"

"""intermit: sparse multi-robot sensing schedules for slowly evolving fields.

Plans when and where a heterogeneous robot team should sense a space-time
process by maximizing Gaussian-process mutual information under matroid
and budget constraints, and validates the greedy planner against an exact
enumeration baseline on small instances.
"""

from .constraints import (ConstraintSystem, KnapsackSpec, MatroidSpec, feasible,
                          is_independent, verify_matroid_axioms, within_budget)
from .groundset import (DeploymentSet, GridSpec, GroundElement, GroundSet, RobotSpec,
                        WeightedTravelCost, build_ground_set, element_cost,
                        slice_deployment)
from .oracle import (EnumerationBudget, OracleBudgetExceeded, OracleResult,
                     count_combinations, enumerate_optimal, optimality_ratio)
from .problem import ProblemInstance, mi_evaluator
from .solver import (SolverConfig, SolverResult, count_oracle_calls, optimality_bound,
                     threshold_greedy)
from .stgp import (GpModel, KernelParams, MutualInfoEvaluator, NumericalError,
                   PosteriorCov, TrainingSet, composite_kernel, entropy, fit_gp,
                   fit_hyperparameters, kernel_se, marginal_gain, mutual_information,
                   posterior)

__version__ = "0.1.0"

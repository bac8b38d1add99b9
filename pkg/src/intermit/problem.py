"""Problem bundle: one candidate pool, its trained process, and the feasibility rules."""

from __future__ import annotations

from dataclasses import dataclass

from .constraints import ConstraintSystem
from .groundset import GroundSet
from .stgp import GpModel, MutualInfoEvaluator, ground_covariance

__all__ = ["ProblemInstance", "mi_evaluator"]


@dataclass(frozen=True)
class ProblemInstance:
    ground: GroundSet
    model: GpModel
    constraints: ConstraintSystem


def mi_evaluator(instance: ProblemInstance, max_jitter: float = 1e-6) -> MutualInfoEvaluator:
    """Build the shared mutual-information evaluator for one instance."""
    return MutualInfoEvaluator(ground_covariance(instance.model, instance.ground), max_jitter)

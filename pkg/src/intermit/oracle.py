"""Exact baseline: depth-first enumeration of every feasible selection.

Feasibility of all supported rules is downward closed, so a subtree rooted
at an infeasible selection can never contain a feasible one and the search
prunes it whole.  Selection values update incrementally along the DFS path,
so each visited feasible set costs O(depth * |V|).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .groundset import DeploymentSet
from .problem import ProblemInstance, mi_evaluator
from .solver import SolverResult
from .stgp import IncrementalMI, MutualInfoEvaluator

__all__ = [
    "EnumerationBudget",
    "OracleBudgetExceeded",
    "OracleResult",
    "enumerate_optimal",
    "count_combinations",
    "optimality_ratio",
]


@dataclass(frozen=True)
class EnumerationBudget:
    """Caps on the exhaustive search; ``max_seconds=None`` disables the wall clock."""

    max_sets: int = 200_000
    max_seconds: float | None = None
    max_elements: int = 64

    def __post_init__(self):
        if self.max_sets < 1 or self.max_elements < 1:
            raise ValueError("budget caps must be positive")
        if self.max_seconds is not None and self.max_seconds <= 0:
            raise ValueError("max_seconds must be positive when set")


@dataclass(frozen=True)
class OracleResult:
    best: DeploymentSet
    value: float
    sets_visited: int
    elapsed: float
    complete: bool


class OracleBudgetExceeded(RuntimeError):
    """Search ran out of budget; ``partial`` carries the best-so-far, marked incomplete."""

    def __init__(self, message: str, partial: OracleResult):
        super().__init__(message)
        self.partial = partial


def enumerate_optimal(instance: ProblemInstance, budget: EnumerationBudget | None = None,
                      evaluator: MutualInfoEvaluator | None = None) -> OracleResult:
    """Exact argmax of the objective over all feasible selections.

    Raises OracleBudgetExceeded when a cap is hit; the exception carries the
    best selection found so far.
    """
    budget = budget or EnumerationBudget()
    ground = instance.ground
    n = len(ground)
    if n > budget.max_elements:
        raise ValueError(
            f"pool of {n} elements exceeds the enumeration cap {budget.max_elements}")
    ev = evaluator if evaluator is not None else mi_evaluator(instance)
    tracker = instance.constraints.tracker(ground)
    max_depth = min(tracker.max_cardinality(), n)
    inc = IncrementalMI(ev, max_depth=max_depth)

    start = time.perf_counter()
    deadline = None if budget.max_seconds is None else start + budget.max_seconds

    state = {"visited": 1, "best_idx": (), "best_val": 0.0}
    can_add_suffix = tracker.can_add_suffix

    def overrun() -> str | None:
        if state["visited"] > budget.max_sets:
            return f"visited more than {budget.max_sets} feasible sets"
        if deadline is not None and time.perf_counter() > deadline:
            return f"exceeded {budget.max_seconds} s of wall time"
        return None

    def visit(begin: int) -> None:
        # selections grow in index order, so the candidate tail is a suffix
        mask = can_add_suffix(begin)
        if not mask.any():
            return
        if inc.depth + 1 >= max_depth:
            # children cannot be extended further: evaluate the whole level at once
            values = inc.extension_values(begin, mask)
            state["visited"] += len(values)
            k = int(np.argmax(values))
            if values[k] > state["best_val"]:
                state["best_val"] = float(values[k])
                e = int(begin + np.flatnonzero(mask)[k])
                state["best_idx"] = inc.indices + (e,)
            reason = overrun()
            if reason is not None:
                raise OracleBudgetExceeded(reason, _result(False))
            return
        for e in begin + np.flatnonzero(mask):
            e = int(e)
            tracker.add(e)
            val = inc.push(e)
            state["visited"] += 1
            if val > state["best_val"]:
                state["best_val"] = val
                state["best_idx"] = inc.indices
            reason = overrun()
            if reason is not None:
                raise OracleBudgetExceeded(reason, _result(False))
            visit(e + 1)
            inc.pop()
            tracker.remove(e)

    def _result(complete: bool) -> OracleResult:
        best = DeploymentSet.from_indices(state["best_idx"], value=state["best_val"],
                                          ground=ground)
        return OracleResult(best, state["best_val"], state["visited"],
                            time.perf_counter() - start, complete)

    if n and max_depth:
        visit(0)
    return _result(True)


def count_combinations(horizon: int, active_limit: int, n_robots: int,
                       n_locations: int) -> int:
    """Closed-form count of deployment patterns with up to ``active_limit`` active times.

    Each active time independently assigns every robot one of the
    n_locations cells or "stay home", giving C(R*(N+1), R) per-time choices;
    summing over how many times are active:

        sum_{l=1..active_limit} C(T, l) * C(R*(N+1), R)^l

    Exact integer arithmetic throughout.  The formula treats idle robots as
    distinguishable assignments, so patterns differing only in which robots
    sit out are counted separately; it strictly upper-bounds the number of
    distinct feasible sets and is kept in this form as the consistency
    reference for the enumerator's visit counts.
    """
    if min(horizon, active_limit, n_robots, n_locations) < 0:
        raise ValueError("all counting arguments must be nonnegative")
    if active_limit > horizon:
        raise ValueError("active_limit cannot exceed the horizon")
    per_time = math.comb(n_robots * (n_locations + 1), n_robots)
    return sum(math.comb(horizon, l) * per_time ** l
               for l in range(1, active_limit + 1))


def optimality_ratio(greedy: SolverResult, exact: OracleResult) -> float:
    """Greedy value over exact value, clamped to [0, 1 + 1e-9] for numerical noise.

    Both results must come from the same instance.  A zero optimum with a
    zero greedy value is defined as ratio 1.
    """
    if not exact.complete:
        raise ValueError("cannot compute a ratio against an incomplete enumeration")
    if abs(exact.value) <= 1e-15:
        if abs(greedy.value) <= 1e-15:
            return 1.0
        raise ValueError(
            f"exact optimum is zero but greedy found {greedy.value}; results are "
            "inconsistent or from different instances")
    ratio = greedy.value / exact.value
    return min(max(ratio, 0.0), 1.0 + 1e-9)

"""Two-threshold greedy for value-per-cost constrained selection.

The outer loop sweeps a density threshold rho over gain-to-cost ratios,
geometrically from d/(p+l) up to 2d|V|/(p+l) where d is the best singleton
value, p the matroid count and l the knapsack count.  Densities use
budget-normalized costs (each budget scaled to 1), the regime the schedule
anchors assume; raw-unit costs would park every density below d/(p+l)
whenever traveling is expensive relative to a nat of information.

For each rho, a gain threshold tau decreases geometrically from the best
qualifying singleton value M_rho down to (eta/|V|) M_rho; each tau pass
scans the pool in a fixed order and appends any element that clears the
matroid oracles, both thresholds, and every budget.  The first budget
violation freezes the running prefix (and the offending element as a
singleton) into the candidate pool and restarts with the next rho.  The
answer is the best candidate by value.

The achievable fraction of the optimum is 1 / ((1+eta) (p + 2l + 1)).
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .constraints import within_budget
from .groundset import DeploymentSet
from .problem import ProblemInstance, mi_evaluator
from .stgp import IncrementalMI, MutualInfoEvaluator

__all__ = [
    "SolverConfig",
    "Candidate",
    "RhoIteration",
    "SolverResult",
    "optimality_bound",
    "count_oracle_calls",
    "threshold_greedy",
]


@dataclass(frozen=True)
class SolverConfig:
    """Tunables: eta controls both threshold schedules; scan_order overrides the
    deterministic index order (must be a permutation of the pool)."""

    eta: float = 0.1
    max_jitter: float = 1e-6
    scan_order: tuple[int, ...] | None = None

    def __post_init__(self):
        if not 0.0 < self.eta <= 1.0:
            raise ValueError(f"eta must lie in (0, 1], got {self.eta}")


@dataclass(frozen=True)
class Candidate:
    """One entry of the candidate pool."""

    indices: tuple[int, ...]
    value: float
    kind: str  # "empty" | "prefix" | "singleton" | "final"


@dataclass
class RhoIteration:
    """Trace of one outer-loop iteration."""

    rho: float
    anchor: float | None = None
    skipped: bool = False
    restarted: bool = False
    n_tau_steps: int = 0
    gains_accepted: list[float] = field(default_factory=list)
    candidate_values: list[float] = field(default_factory=list)


@dataclass(frozen=True)
class SolverResult:
    chosen: DeploymentSet
    value: float
    pool: tuple[Candidate, ...]
    trace: tuple[RhoIteration, ...]
    oracle_calls: int
    wall_time: float
    knapsack_feasible: bool
    monotonicity_warning: bool
    eta: float
    n_matroids: int
    n_knapsacks: int

    @property
    def bound(self) -> float:
        return optimality_bound(self.n_matroids, self.n_knapsacks, self.eta)


def optimality_bound(n_matroids: int, n_knapsacks: int, eta: float) -> float:
    """Guaranteed fraction of the optimum: 1 / ((1+eta) (p + 2l + 1))."""
    if n_matroids < 0 or n_knapsacks < 0:
        raise ValueError("constraint counts must be nonnegative")
    if not 0.0 < eta <= 1.0:
        raise ValueError(f"eta must lie in (0, 1], got {eta}")
    return 1.0 / ((1.0 + eta) * (n_matroids + 2 * n_knapsacks + 1))


def count_oracle_calls(result: SolverResult) -> int:
    """Number of marginal-gain queries the run issued."""
    return result.oracle_calls


def threshold_greedy(instance: ProblemInstance, config: SolverConfig | None = None,
                     evaluator: MutualInfoEvaluator | None = None) -> SolverResult:
    """Run the two-threshold greedy on one instance.

    Deterministic: identical instance, config, and scan order give an
    identical result.  ``evaluator`` may be shared with other consumers of
    the same instance (it is read-only here).
    """
    cfg = config or SolverConfig()
    ground = instance.ground
    cons = instance.constraints
    n = len(ground)
    ev = evaluator if evaluator is not None else mi_evaluator(instance, cfg.max_jitter)
    eta = cfg.eta

    if cfg.scan_order is None:
        order = np.arange(n, dtype=np.int64)
    else:
        order = np.asarray(cfg.scan_order, dtype=np.int64)
        if sorted(order.tolist()) != list(range(n)):
            raise ValueError("scan_order must be a permutation of the pool indices")

    start = time.perf_counter()
    probe = cons.tracker(ground)
    max_card = probe.max_cardinality()
    warn = max_card > n / 2
    if warn:
        warnings.warn(
            f"constraints admit selections of up to {max_card} of {n} elements; the "
            "objective may decrease beyond half the pool", RuntimeWarning, stacklevel=2)

    # Elements whose own cost breaks a budget can never join a feasible set;
    # discarding them from candidacy up front is the regime the bound's
    # analysis assumes.  They still count toward the information objective
    # as part of the unselected remainder.
    affordable = np.ones(n, dtype=bool)
    for spec in cons.knapsacks:
        affordable &= spec.costs(ground) <= spec.budget
    order = order[affordable[order]]

    singles = ev.singleton_values()
    oracle_calls = len(order)
    # Density thresholds work on budget-normalized costs (every budget scaled
    # to 1): the rho sweep's anchor d/(p+l) only lands among the densities in
    # that scale.  Feasibility checks stay in raw units.
    cost_sum = np.zeros(n)
    for spec in cons.knapsacks:
        c = spec.costs(ground)
        if spec.budget > 0:
            cost_sum += c / spec.budget
        else:
            cost_sum += np.where(c == 0.0, 0.0, np.inf)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv_cost = np.where(cost_sum > 0, 1.0 / cost_sum, np.inf)
    inv_cost[np.isinf(cost_sum)] = 0.0
    single_density = _density(singles, inv_cost)

    pool: list[Candidate] = [Candidate((), 0.0, "empty")]
    trace: list[RhoIteration] = []

    n_afford = len(order)
    d = float(singles[order].max()) if n_afford else 0.0
    if n_afford == 0 or d <= 0.0:
        return _finish(instance, cfg, ev, pool, trace, oracle_calls, start, warn)

    denom = max(cons.n_matroids + cons.n_knapsacks, 1)
    rho = d / denom
    rho_max = 2.0 * d * n_afford / denom
    inc = IncrementalMI(ev, max_depth=min(max_card + 1, n))

    while rho <= rho_max * (1.0 + 1e-12):
        it = RhoIteration(rho=rho)
        qualifying = order[single_density[order] >= rho]
        anchor = float(singles[qualifying].max()) if len(qualifying) else 0.0
        if anchor <= 0.0:
            it.skipped = True
            trace.append(it)
            rho *= 1.0 + eta
            continue
        it.anchor = anchor

        tracker = cons.tracker(ground)
        inc.reset()
        selected = np.zeros(n, dtype=bool)
        chosen: list[int] = []
        gains: np.ndarray | None = None
        restarted = False

        tau = anchor
        tau_min = anchor * eta / n_afford
        while tau >= tau_min * (1.0 - 1e-12) and not restarted:
            it.n_tau_steps += 1
            pos = 0
            while pos < n_afford:
                cand = order[pos:]
                if gains is None:
                    gains = inc.gains()
                allowed = tracker.matroid_can_add_mask(cand) & ~selected[cand]
                g = gains[cand]
                with np.errstate(invalid="ignore"):
                    eligible = allowed & (g >= tau) & (_density(g, inv_cost[cand]) >= rho)
                if not eligible.any():
                    oracle_calls += int(allowed.sum())
                    break
                k = int(np.argmax(eligible))
                oracle_calls += int(allowed[:k + 1].sum())
                e = int(cand[k])
                if tracker.knapsack_can_add(e):
                    gain = float(gains[e])
                    tracker.add(e)
                    inc.push(e)
                    selected[e] = True
                    chosen.append(e)
                    it.gains_accepted.append(gain)
                    gains = None
                    pos += k + 1
                else:
                    # the offending element is affordable alone (unaffordable
                    # ones were pruned), so both recorded candidates are feasible
                    pool.append(Candidate((e,), float(singles[e]), "singleton"))
                    it.candidate_values.append(float(singles[e]))
                    pool.append(Candidate(tuple(sorted(chosen)), inc.value, "prefix"))
                    it.candidate_values.append(inc.value)
                    it.restarted = True
                    restarted = True
                    break
            tau /= 1.0 + eta

        if not restarted:
            pool.append(Candidate(tuple(sorted(chosen)), inc.value, "final"))
            it.candidate_values.append(inc.value)
        trace.append(it)
        rho *= 1.0 + eta

    return _finish(instance, cfg, ev, pool, trace, oracle_calls, start, warn)


def _density(gains: np.ndarray, inv_cost: np.ndarray) -> np.ndarray:
    # zero-cost elements always pass the density test; 0 * inf would be NaN
    with np.errstate(invalid="ignore"):
        dens = gains * inv_cost
    dens[np.isinf(inv_cost)] = np.inf
    return dens


def _finish(instance: ProblemInstance, cfg: SolverConfig, ev: MutualInfoEvaluator,
            pool: list[Candidate], trace: list[RhoIteration], oracle_calls: int,
            start: float, warned: bool) -> SolverResult:
    best = sorted(pool, key=lambda c: (-c.value, c.indices))[0]
    value = ev.value(best.indices)
    chosen = DeploymentSet.from_indices(best.indices, value=value, ground=instance.ground)
    knap_ok = all(within_budget(spec, chosen, instance.ground)
                  for spec in instance.constraints.knapsacks)
    return SolverResult(
        chosen=chosen,
        value=value,
        pool=tuple(pool),
        trace=tuple(trace),
        oracle_calls=oracle_calls,
        wall_time=time.perf_counter() - start,
        knapsack_feasible=knap_ok,
        monotonicity_warning=warned,
        eta=cfg.eta,
        n_matroids=instance.constraints.n_matroids,
        n_knapsacks=instance.constraints.n_knapsacks,
    )

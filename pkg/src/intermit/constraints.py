"""Feasibility rules for deployment sets.

Matroid-style rules cap deployment counts or deployment status per time
step, per robot, or across the horizon; knapsack rules cap summed element
cost per robot, per time step, or per location.  Everything is exposed as
membership predicates plus O(1) incremental trackers, so solvers never see
the internal counting.

Variant codes (the config-file vocabulary):

    I21  per-time deployment count             |S ∩ V_t| <= L(t)
    I22  per-time deployment status            1(|S ∩ V_t|) <= L(t),  L(t) in {0,1}
    I23  number of active times                sum_t 1(|S ∩ V_t|) <= L
    I31  per-robot per-time deployment count   |S_r ∩ V_t| <= L_r(t)
    I32  per-robot availability window         1(|S_r ∩ V_t|) <= L_r(t), L_r(t) in {0,1}
    I33  per-robot number of active times      sum_t 1(|S_r ∩ V_t|) <= L_r
    X1   per-robot cost budget
    X2   per-time cost budget
    X3   per-location cost budget

``verify_matroid_axioms`` checks the three matroid axioms exhaustively on
small pools and reports a concrete counterexample when one fails.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .groundset import DeploymentSet, GroundSet

__all__ = [
    "MATROID_VARIANTS",
    "KNAPSACK_VARIANTS",
    "MatroidSpec",
    "KnapsackSpec",
    "ConstraintSystem",
    "is_independent",
    "within_budget",
    "feasible",
    "MatroidTracker",
    "KnapsackTracker",
    "FeasibilityTracker",
    "AxiomReport",
    "verify_matroid_axioms",
    "verify_independence_predicate",
]

MATROID_VARIANTS = ("I21", "I22", "I23", "I31", "I32", "I33")
KNAPSACK_VARIANTS = ("X1", "X2", "X3")

_STATUS_VARIANTS = ("I22", "I32")


@dataclass(frozen=True)
class MatroidSpec:
    """One counting rule.  ``limit`` broadcasts:

    I21/I22: scalar or per-time vector (length T)
    I23:     scalar
    I31/I32: scalar, per-time vector, or (R, T) matrix
    I33:     scalar or per-robot vector (length R)
    """

    variant: str
    limit: object

    def __post_init__(self):
        if self.variant not in MATROID_VARIANTS:
            raise ValueError(f"unknown matroid variant {self.variant!r}")

    def limit_per_time(self, ground: GroundSet) -> np.ndarray:
        lim = np.broadcast_to(np.asarray(self.limit, dtype=np.int64),
                              (ground.horizon,)).copy()
        self._check(lim)
        return lim

    def limit_scalar(self) -> int:
        lim = int(np.asarray(self.limit))
        if lim < 0:
            raise ValueError("matroid limit must be a nonnegative integer")
        return lim

    def limit_per_robot_time(self, ground: GroundSet) -> np.ndarray:
        arr = np.asarray(self.limit, dtype=np.int64)
        if arr.ndim <= 1:
            lim = np.broadcast_to(arr, (ground.n_robots, ground.horizon)).copy()
        else:
            if arr.shape != (ground.n_robots, ground.horizon):
                raise ValueError(
                    f"limit matrix {arr.shape} does not match (robots, horizon) "
                    f"({ground.n_robots}, {ground.horizon})")
            lim = arr.copy()
        self._check(lim)
        return lim

    def limit_per_robot(self, ground: GroundSet) -> np.ndarray:
        lim = np.broadcast_to(np.asarray(self.limit, dtype=np.int64),
                              (ground.n_robots,)).copy()
        self._check(lim)
        return lim

    def _check(self, lim: np.ndarray) -> None:
        if np.any(lim < 0):
            raise ValueError("matroid limits must be nonnegative integers")
        if self.variant in _STATUS_VARIANTS and np.any(lim > 1):
            raise ValueError(f"{self.variant} limits are deployment statuses in {{0,1}}")


@dataclass(frozen=True)
class KnapsackSpec:
    """Budget ``budget`` applied to every group's summed cost.

    Groups are robots (X1), times (X2) or locations (X3).  ``cost_fn``
    overrides the per-element cost (defaults to the ground-set costs).
    """

    variant: str
    budget: float
    cost_fn: Callable[[GroundSet], np.ndarray] | None = None

    def __post_init__(self):
        if self.variant not in KNAPSACK_VARIANTS:
            raise ValueError(f"unknown knapsack variant {self.variant!r}")
        if self.budget < 0:
            raise ValueError("budget must be >= 0")

    def costs(self, ground: GroundSet) -> np.ndarray:
        if self.cost_fn is None:
            return ground.cost
        c = np.asarray(self.cost_fn(ground), dtype=float)
        if c.shape != (len(ground),):
            raise ValueError("cost accessor must return one cost per element")
        if np.any(c < 0):
            raise ValueError("knapsack costs must be nonnegative")
        return c

    def group_of(self, ground: GroundSet) -> np.ndarray:
        if self.variant == "X1":
            return ground.r_of - 1
        if self.variant == "X2":
            return ground.t_of - 1
        return ground.loc_of - 1

    def n_groups(self, ground: GroundSet) -> int:
        if self.variant == "X1":
            return ground.n_robots
        if self.variant == "X2":
            return ground.horizon
        return ground.n_locations


def _selection_indices(selection) -> np.ndarray:
    idx = selection.indices if isinstance(selection, DeploymentSet) else tuple(selection)
    return np.asarray(idx, dtype=np.int64)


def is_independent(spec: MatroidSpec, selection, ground: GroundSet) -> bool:
    """From-scratch membership test of one matroid-style rule."""
    idx = _selection_indices(selection)
    if len(idx) == 0:
        return True
    t = ground.t_of[idx] - 1
    r = ground.r_of[idx] - 1
    if spec.variant == "I21":
        counts = np.bincount(t, minlength=ground.horizon)
        return bool(np.all(counts <= spec.limit_per_time(ground)))
    if spec.variant == "I22":
        counts = np.bincount(t, minlength=ground.horizon)
        return bool(np.all((counts > 0).astype(np.int64) <= spec.limit_per_time(ground)))
    if spec.variant == "I23":
        return len(np.unique(t)) <= spec.limit_scalar()
    flat = r * ground.horizon + t
    counts = np.bincount(flat, minlength=ground.n_robots * ground.horizon)
    counts = counts.reshape(ground.n_robots, ground.horizon)
    if spec.variant == "I31":
        return bool(np.all(counts <= spec.limit_per_robot_time(ground)))
    if spec.variant == "I32":
        return bool(np.all((counts > 0).astype(np.int64) <= spec.limit_per_robot_time(ground)))
    # I33
    active = (counts > 0).sum(axis=1)
    return bool(np.all(active <= spec.limit_per_robot(ground)))


def within_budget(spec: KnapsackSpec, selection, ground: GroundSet) -> bool:
    """From-scratch budget test: every group's summed cost stays under the budget."""
    idx = _selection_indices(selection)
    if len(idx) == 0:
        return True
    groups = spec.group_of(ground)[idx]
    sums = np.bincount(groups, weights=spec.costs(ground)[idx], minlength=spec.n_groups(ground))
    return bool(np.all(sums <= spec.budget))


@dataclass(frozen=True)
class ConstraintSystem:
    """Conjunction of matroid-style rules and knapsack budgets."""

    matroids: tuple[MatroidSpec, ...] = ()
    knapsacks: tuple[KnapsackSpec, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "matroids", tuple(self.matroids))
        object.__setattr__(self, "knapsacks", tuple(self.knapsacks))

    @property
    def n_matroids(self) -> int:
        return len(self.matroids)

    @property
    def n_knapsacks(self) -> int:
        return len(self.knapsacks)

    def feasible(self, selection, ground: GroundSet) -> bool:
        return (all(is_independent(m, selection, ground) for m in self.matroids)
                and all(within_budget(k, selection, ground) for k in self.knapsacks))

    def tracker(self, ground: GroundSet) -> "FeasibilityTracker":
        return FeasibilityTracker(self, ground)


def feasible(system: ConstraintSystem, selection, ground: GroundSet) -> bool:
    return system.feasible(selection, ground)


class MatroidTracker:
    """Incremental counters for one matroid-style rule; O(1) per query."""

    def __init__(self, spec: MatroidSpec, ground: GroundSet):
        self.spec = spec
        self.ground = ground
        v = spec.variant
        self._t = ground.t_of - 1
        self._r = ground.r_of - 1
        if v in ("I21", "I22"):
            self._limit_t = spec.limit_per_time(ground)
            self._count_t = np.zeros(ground.horizon, dtype=np.int64)
        elif v == "I23":
            self._limit = spec.limit_scalar()
            self._count_t = np.zeros(ground.horizon, dtype=np.int64)
            self._active = 0
        elif v in ("I31", "I32"):
            self._limit_rt = spec.limit_per_robot_time(ground)
            self._count_rt = np.zeros((ground.n_robots, ground.horizon), dtype=np.int64)
        else:  # I33
            self._limit_r = spec.limit_per_robot(ground)
            self._count_rt = np.zeros((ground.n_robots, ground.horizon), dtype=np.int64)
            self._active_r = np.zeros(ground.n_robots, dtype=np.int64)

    def can_add(self, e: int) -> bool:
        v = self.spec.variant
        t = self._t[e]
        if v == "I21":
            return self._count_t[t] + 1 <= self._limit_t[t]
        if v == "I22":
            return self._limit_t[t] >= 1
        if v == "I23":
            return self._count_t[t] > 0 or self._active + 1 <= self._limit
        r = self._r[e]
        if v == "I31":
            return self._count_rt[r, t] + 1 <= self._limit_rt[r, t]
        if v == "I32":
            return self._limit_rt[r, t] >= 1
        return self._count_rt[r, t] > 0 or self._active_r[r] + 1 <= self._limit_r[r]

    def can_add_mask(self, candidates: np.ndarray) -> np.ndarray:
        return self._mask(self._t[candidates], self._r[candidates])

    def can_add_suffix(self, begin: int) -> np.ndarray:
        return self._mask(self._t[begin:], self._r[begin:])

    def _mask(self, t: np.ndarray, r: np.ndarray) -> np.ndarray:
        v = self.spec.variant
        if v == "I21":
            return self._count_t[t] + 1 <= self._limit_t[t]
        if v == "I22":
            return self._limit_t[t] >= 1
        if v == "I23":
            return (self._count_t[t] > 0) | (self._active + 1 <= self._limit)
        if v == "I31":
            return self._count_rt[r, t] + 1 <= self._limit_rt[r, t]
        if v == "I32":
            return self._limit_rt[r, t] >= 1
        return (self._count_rt[r, t] > 0) | (self._active_r[r] + 1 <= self._limit_r[r])

    def add(self, e: int) -> None:
        v = self.spec.variant
        t = self._t[e]
        if v in ("I21", "I22"):
            self._count_t[t] += 1
        elif v == "I23":
            if self._count_t[t] == 0:
                self._active += 1
            self._count_t[t] += 1
        else:
            r = self._r[e]
            if v == "I33" and self._count_rt[r, t] == 0:
                self._active_r[r] += 1
            self._count_rt[r, t] += 1

    def remove(self, e: int) -> None:
        v = self.spec.variant
        t = self._t[e]
        if v in ("I21", "I22"):
            self._count_t[t] -= 1
        elif v == "I23":
            self._count_t[t] -= 1
            if self._count_t[t] == 0:
                self._active -= 1
        else:
            r = self._r[e]
            self._count_rt[r, t] -= 1
            if v == "I33" and self._count_rt[r, t] == 0:
                self._active_r[r] -= 1

    def max_cardinality(self) -> int:
        """Upper bound on the size of any independent set (for buffer sizing and warnings)."""
        g = self.ground
        v = self.spec.variant
        per_time = np.bincount(self._t, minlength=g.horizon)
        if v == "I21":
            return int(np.minimum(self._limit_t, per_time).sum())
        if v == "I22":
            return int(per_time[self._limit_t >= 1].sum())
        if v == "I23":
            top = np.sort(per_time)[::-1][:self._limit]
            return int(top.sum())
        per_rt = np.zeros((g.n_robots, g.horizon), dtype=np.int64)
        np.add.at(per_rt, (self._r, self._t), 1)
        if v == "I31":
            return int(np.minimum(self._limit_rt, per_rt).sum())
        if v == "I32":
            return int(per_rt[self._limit_rt >= 1].sum())
        sorted_rt = np.sort(per_rt, axis=1)[:, ::-1]
        take = np.minimum(self._limit_r, g.horizon)
        return int(sum(sorted_rt[r, :take[r]].sum() for r in range(g.n_robots)))


class KnapsackTracker:
    """Incremental per-group cost sums for one knapsack rule."""

    def __init__(self, spec: KnapsackSpec, ground: GroundSet):
        self.spec = spec
        self._group = spec.group_of(ground)
        self._cost = spec.costs(ground)
        self._sums = np.zeros(spec.n_groups(ground))

    def can_add(self, e: int) -> bool:
        return self._sums[self._group[e]] + self._cost[e] <= self.spec.budget

    def can_add_mask(self, candidates: np.ndarray) -> np.ndarray:
        g = self._group[candidates]
        return self._sums[g] + self._cost[candidates] <= self.spec.budget

    def can_add_suffix(self, begin: int) -> np.ndarray:
        g = self._group[begin:]
        return self._sums[g] + self._cost[begin:] <= self.spec.budget

    def add(self, e: int) -> None:
        self._sums[self._group[e]] += self._cost[e]

    def remove(self, e: int) -> None:
        self._sums[self._group[e]] -= self._cost[e]


class FeasibilityTracker:
    """Bundled trackers with matroid-only and knapsack-only views for the solver."""

    def __init__(self, system: ConstraintSystem, ground: GroundSet):
        self.system = system
        self.ground = ground
        self.matroids = [MatroidTracker(m, ground) for m in system.matroids]
        self.knapsacks = [KnapsackTracker(k, ground) for k in system.knapsacks]

    def matroid_can_add(self, e: int) -> bool:
        return all(m.can_add(e) for m in self.matroids)

    def knapsack_can_add(self, e: int) -> bool:
        return all(k.can_add(e) for k in self.knapsacks)

    def can_add(self, e: int) -> bool:
        return self.matroid_can_add(e) and self.knapsack_can_add(e)

    def matroid_can_add_mask(self, candidates: np.ndarray) -> np.ndarray:
        mask = np.ones(len(candidates), dtype=bool)
        for m in self.matroids:
            mask &= m.can_add_mask(candidates)
        return mask

    def can_add_mask(self, candidates: np.ndarray) -> np.ndarray:
        mask = self.matroid_can_add_mask(candidates)
        for k in self.knapsacks:
            mask &= k.can_add_mask(candidates)
        return mask

    def can_add_suffix(self, begin: int) -> np.ndarray:
        mask = np.ones(len(self.ground) - begin, dtype=bool)
        for m in self.matroids:
            mask &= m.can_add_suffix(begin)
        for k in self.knapsacks:
            mask &= k.can_add_suffix(begin)
        return mask

    def add(self, e: int) -> None:
        for m in self.matroids:
            m.add(e)
        for k in self.knapsacks:
            k.add(e)

    def remove(self, e: int) -> None:
        for m in self.matroids:
            m.remove(e)
        for k in self.knapsacks:
            k.remove(e)

    def max_cardinality(self) -> int:
        """Upper bound on any jointly independent set's size.

        Combines the per-(robot, time) capacities left by I31/I32, the
        per-time caps of I21/I22 with the active-time limits of I23 (time
        view), and the per-robot active-time limits of I33 (robot view);
        both views are valid bounds for the intersection, so the minimum is
        too.
        """
        g = self.ground
        n = len(g)
        if not self.matroids:
            return n
        per_rt = np.zeros((g.n_robots, g.horizon), dtype=np.int64)
        np.add.at(per_rt, (g.r_of - 1, g.t_of - 1), 1)
        for m in self.matroids:
            v = m.spec.variant
            if v == "I31":
                per_rt = np.minimum(per_rt, m._limit_rt)
            elif v == "I32":
                per_rt = np.where(m._limit_rt >= 1, per_rt, 0)

        cap_t = per_rt.sum(axis=0)
        for m in self.matroids:
            v = m.spec.variant
            if v == "I21":
                cap_t = np.minimum(cap_t, m._limit_t)
            elif v == "I22":
                cap_t = np.where(m._limit_t >= 1, cap_t, 0)
        time_bound = int(cap_t.sum())
        for m in self.matroids:
            if m.spec.variant == "I23":
                top = np.sort(cap_t)[::-1][:m._limit]
                time_bound = min(time_bound, int(top.sum()))

        robot_bound = int(per_rt.sum())
        for m in self.matroids:
            if m.spec.variant == "I33":
                rows = np.sort(per_rt, axis=1)[:, ::-1]
                total = sum(int(rows[r, :min(m._limit_r[r], g.horizon)].sum())
                            for r in range(g.n_robots))
                robot_bound = min(robot_bound, total)

        bound = min(n, time_bound, robot_bound,
                    min(m.max_cardinality() for m in self.matroids))
        return bound


@dataclass(frozen=True)
class AxiomReport:
    """Outcome of an exhaustive matroid-axiom check."""

    passed: bool
    axiom: int | None = None
    witness: tuple = ()
    n_subsets: int = 0
    n_independent: int = 0
    message: str = ""


def _bits(mask: int, n: int) -> tuple[int, ...]:
    return tuple(i for i in range(n) if mask >> i & 1)


def verify_independence_predicate(pred: Callable[[tuple[int, ...]], bool], n: int,
                                  cap: int = 16) -> AxiomReport:
    """Exhaustively check the three matroid axioms for an arbitrary predicate.

    ``pred`` maps a tuple of element indices to independent-or-not.  The
    exchange axiom is only checked for |A| = |B| + 1, which is equivalent
    under downward closure.
    """
    if n > cap:
        raise ValueError(f"{n} elements exceeds the exhaustive-check cap {cap}; sample instead")
    total = 1 << n
    ind = np.zeros(total, dtype=bool)
    for mask in range(total):
        ind[mask] = bool(pred(_bits(mask, n)))

    if not ind[0]:
        return AxiomReport(False, 1, ((),), total, int(ind.sum()),
                           "the empty set is not independent")

    for mask in range(total):
        if not ind[mask]:
            continue
        m = mask
        while m:
            bit = m & -m
            if not ind[mask ^ bit]:
                return AxiomReport(
                    False, 2, (_bits(mask, n), _bits(mask ^ bit, n)), total, int(ind.sum()),
                    f"independent {_bits(mask, n)} has a dependent subset {_bits(mask ^ bit, n)}")
            m ^= bit

    by_card: dict[int, list[int]] = {}
    aug = np.zeros(total, dtype=np.int64)
    for mask in range(total):
        if not ind[mask]:
            continue
        by_card.setdefault(bin(mask).count("1"), []).append(mask)
        a = 0
        for e in range(n):
            bit = 1 << e
            if not mask & bit and ind[mask | bit]:
                a |= bit
        aug[mask] = a

    for k in sorted(by_card):
        larger = by_card.get(k + 1)
        if not larger:
            continue
        arr = np.asarray(larger, dtype=np.int64)
        for b in by_card[k]:
            bad = arr[(arr & ~b & aug[b]) == 0]
            if len(bad):
                a = int(bad[0])
                return AxiomReport(
                    False, 3, (_bits(a, n), _bits(b, n)), total, int(ind.sum()),
                    f"no element of {_bits(a, n)} \\ {_bits(b, n)} can extend {_bits(b, n)}")

    return AxiomReport(True, None, (), total, int(ind.sum()), "all three axioms hold")


def verify_matroid_axioms(spec: MatroidSpec, ground: GroundSet, cap: int = 16) -> AxiomReport:
    """Exhaustive three-axiom check of one rule over every subset of a small pool."""
    return verify_independence_predicate(
        lambda subset: is_independent(spec, subset, ground), len(ground), cap)

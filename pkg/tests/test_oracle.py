import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from intermit.constraints import ConstraintSystem, KnapsackSpec, MatroidSpec
from intermit.groundset import GridSpec, RobotSpec, build_ground_set
from intermit.oracle import (EnumerationBudget, OracleBudgetExceeded, count_combinations,
                             enumerate_optimal, optimality_ratio)
from intermit.problem import ProblemInstance, mi_evaluator
from intermit.solver import optimality_bound, threshold_greedy
from intermit.stgp import KernelParams, TrainingSet, fit_gp

PARAMS = KernelParams(2.0, 60.0, 1.0, 2.5, 1e-4)


def make_instance(seed=0, p=2, q=2, r=2, t=2, budget=150.0, active_limit=2):
    rng = np.random.default_rng(seed)
    robots = [RobotSpec(id=i + 1, noise_var=float(rng.uniform(0.05, 0.4)),
                        cost_weight=float(rng.uniform(0.2, 0.9))) for i in range(r)]
    ground = build_ground_set(GridSpec(p, q, 200.0, 200.0), t, robots)
    n = 8
    x = np.column_stack([rng.uniform(0, 200, n), rng.uniform(0, 200, n),
                         rng.uniform(0, t, n)])
    z = rng.normal(0, 1, n)
    model = fit_gp(PARAMS, TrainingSet(x, z, np.full(n, 0.01)))
    cons = ConstraintSystem(
        matroids=(MatroidSpec("I21", r), MatroidSpec("I23", active_limit)),
        knapsacks=(KnapsackSpec("X2", budget),))
    return ProblemInstance(ground, model, cons)


def comb_pascal(n, k):
    """Independent binomial oracle via Pascal's rule."""
    if k < 0 or k > n:
        return 0
    row = [1]
    for _ in range(n):
        row = [1] + [row[i] + row[i + 1] for i in range(len(row) - 1)] + [1]
    return row[k]


class TestCountCombinations:
    def test_reference_tuple(self):
        # T=4, L=2, R=2, N=9: 4*C(20,2) + 6*C(20,2)^2
        assert count_combinations(4, 2, 2, 9) == 217_360

    def test_zero_active_limit_empty_sum(self):
        assert count_combinations(5, 0, 3, 4) == 0

    def test_minimal_case(self):
        assert count_combinations(1, 1, 1, 1) == 2

    def test_against_independent_pascal_oracle(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            t = int(rng.integers(1, 7))
            limit = int(rng.integers(0, t + 1))
            r = int(rng.integers(1, 4))
            n = int(rng.integers(1, 10))
            per_time = comb_pascal(r * (n + 1), r)
            expected = sum(comb_pascal(t, l) * per_time ** l for l in range(1, limit + 1))
            assert count_combinations(t, limit, r, n) == expected

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            count_combinations(2, 3, 1, 1)
        with pytest.raises(ValueError):
            count_combinations(-1, 0, 1, 1)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 8), st.integers(1, 8), st.integers(1, 5), st.integers(1, 12))
    def test_monotone_in_active_limit(self, t, limit, r, n):
        limit = min(limit, t)
        if limit >= 2:
            assert count_combinations(t, limit, r, n) > count_combinations(t, limit - 1, r, n)


class TestEnumerateOptimal:
    def test_zero_budget_gives_empty(self):
        inst = make_instance(budget=0.0)
        res = enumerate_optimal(inst)
        assert res.best.indices == ()
        assert res.value == 0.0
        assert res.complete

    def test_matches_power_set_filter(self):
        # unpruned oracle: filter the whole power set, evaluate everything
        inst = make_instance(seed=3, p=2, q=1, r=2, t=2, budget=100.0)
        ground, cons = inst.ground, inst.constraints
        n = len(ground)
        assert n == 8
        ev = mi_evaluator(inst)
        visited = 0
        best_val, best_set = 0.0, ()
        for size in range(n + 1):
            for sub in itertools.combinations(range(n), size):
                if cons.feasible(sub, ground):
                    visited += 1
                    v = ev.value(sub)
                    if v > best_val:
                        best_val, best_set = v, sub
        res = enumerate_optimal(inst, evaluator=ev)
        assert res.sets_visited == visited
        assert res.value == pytest.approx(best_val, abs=1e-10)
        assert set(res.best.indices) == set(best_set)

    def test_greedy_is_optimal_on_tiny_instance(self):
        # 1 robot, T=2, 2x2 grid, generous budget: the greedy lands exactly
        # on the optimum here (verified by enumeration)
        inst = make_instance(seed=1, p=2, q=2, r=1, t=2, budget=400.0)
        ev = mi_evaluator(inst)
        greedy = threshold_greedy(inst, evaluator=ev)
        exact = enumerate_optimal(inst, evaluator=ev)
        assert optimality_ratio(greedy, exact) == pytest.approx(1.0, abs=1e-9)

    def test_ratio_within_guarantee_on_random_instances(self):
        for seed in range(8):
            inst = make_instance(seed=seed, budget=float(60 + 30 * seed))
            ev = mi_evaluator(inst)
            greedy = threshold_greedy(inst, evaluator=ev)
            exact = enumerate_optimal(inst, evaluator=ev)
            ratio = optimality_ratio(greedy, exact)
            bound = optimality_bound(2, 1, 0.1)
            assert bound <= ratio <= 1.0 + 1e-9

    def test_oracle_dominates_greedy(self):
        for seed in (2, 9):
            inst = make_instance(seed=seed)
            ev = mi_evaluator(inst)
            greedy = threshold_greedy(inst, evaluator=ev)
            exact = enumerate_optimal(inst, evaluator=ev)
            assert exact.value >= greedy.value - 1e-12

    def test_budget_exceeded_carries_partial(self):
        inst = make_instance(seed=4)
        with pytest.raises(OracleBudgetExceeded) as err:
            enumerate_optimal(inst, EnumerationBudget(max_sets=10))
        partial = err.value.partial
        assert not partial.complete
        assert partial.sets_visited >= 10
        assert partial.value >= 0.0

    def test_refuses_oversized_pool(self):
        inst = make_instance(p=3, q=3, r=2, t=4)  # 72 elements
        with pytest.raises(ValueError):
            enumerate_optimal(inst, EnumerationBudget(max_elements=64))

    def test_visited_bounded_by_counting_formula(self):
        # the pattern count upper-bounds the feasible sets the search walks
        # under the per-time-count + active-times constraint pair
        for seed, (p, q, r, t) in enumerate([(2, 1, 1, 2), (2, 1, 2, 2), (2, 2, 2, 2)]):
            inst = make_instance(seed=seed, p=p, q=q, r=r, t=t, budget=1e9)
            res = enumerate_optimal(inst, EnumerationBudget(max_sets=5_000_000))
            formula = count_combinations(t, 2, r, p * q)
            assert res.sets_visited <= formula

    def test_deterministic(self):
        inst = make_instance(seed=5)
        a = enumerate_optimal(inst)
        b = enumerate_optimal(inst)
        assert a.best.indices == b.best.indices
        assert a.value == b.value
        assert a.sets_visited == b.sets_visited


class TestOptimalityRatio:
    def test_identical_sets_give_one(self):
        inst = make_instance(seed=6)
        ev = mi_evaluator(inst)
        greedy = threshold_greedy(inst, evaluator=ev)
        exact = enumerate_optimal(inst, evaluator=ev)
        forced = optimality_ratio(greedy, exact)
        assert 0.0 <= forced <= 1.0 + 1e-9

    def test_zero_over_zero_is_one(self):
        inst = make_instance(budget=0.0)
        ev = mi_evaluator(inst)
        greedy = threshold_greedy(inst, evaluator=ev)
        exact = enumerate_optimal(inst, evaluator=ev)
        assert optimality_ratio(greedy, exact) == 1.0

    def test_incomplete_oracle_rejected(self):
        inst = make_instance(seed=4)
        ev = mi_evaluator(inst)
        greedy = threshold_greedy(inst, evaluator=ev)
        try:
            enumerate_optimal(inst, EnumerationBudget(max_sets=5), evaluator=ev)
        except OracleBudgetExceeded as err:
            with pytest.raises(ValueError):
                optimality_ratio(greedy, err.partial)

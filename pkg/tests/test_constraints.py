import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from intermit.constraints import (ConstraintSystem, KnapsackSpec,
                                  MatroidSpec, feasible, is_independent,
                                  verify_independence_predicate, verify_matroid_axioms,
                                  within_budget)
from intermit.groundset import GridSpec, RobotSpec, build_ground_set


def make_pool(p=1, q=1, r=2, t=3, weight=0.5):
    robots = [RobotSpec(id=i + 1, noise_var=0.1, cost_weight=weight) for i in range(r)]
    return build_ground_set(GridSpec(p, q, 200.0, 200.0), t, robots)


ALL_VARIANTS = ("I21", "I22", "I23", "I31", "I32", "I33")


class TestIsIndependent:
    @pytest.mark.parametrize("variant,limit", [
        ("I21", 1), ("I22", 1), ("I23", 2), ("I31", 1), ("I32", 1), ("I33", 2)])
    def test_empty_set_always_independent(self, variant, limit):
        ground = make_pool()
        assert is_independent(MatroidSpec(variant, limit), (), ground)

    def test_i21_counts_per_time(self):
        ground = make_pool(p=2, r=2, t=2)
        spec = MatroidSpec("I21", 1)
        one_per_time = [ground.index_of(1, 1, 1), ground.index_of(2, 1, 2)]
        assert is_independent(spec, one_per_time, ground)
        two_at_t1 = [ground.index_of(1, 1, 1), ground.index_of(2, 1, 1)]
        assert not is_independent(spec, two_at_t1, ground)

    def test_i21_per_time_vector(self):
        ground = make_pool(p=2, r=2, t=2)
        spec = MatroidSpec("I21", [2, 0])
        both_at_t1 = [ground.index_of(1, 1, 1), ground.index_of(2, 2, 1)]
        assert is_independent(spec, both_at_t1, ground)
        assert not is_independent(spec, [ground.index_of(1, 1, 2)], ground)

    def test_i22_gates_times(self):
        ground = make_pool(p=2, r=2, t=3)
        spec = MatroidSpec("I22", [1, 0, 1])
        many_at_open_times = [ground.index_of(1, 1, 1), ground.index_of(2, 2, 1),
                              ground.index_of(1, 2, 3)]
        assert is_independent(spec, many_at_open_times, ground)
        assert not is_independent(spec, [ground.index_of(1, 1, 2)], ground)

    def test_i22_rejects_non_binary_limits(self):
        ground = make_pool()
        with pytest.raises(ValueError):
            is_independent(MatroidSpec("I22", 2), [0], ground)

    def test_i23_two_active_times_exceed_limit_one(self):
        ground = make_pool(p=2, r=1, t=2)
        spec = MatroidSpec("I23", 1)
        assert not is_independent(
            spec, [ground.index_of(1, 1, 1), ground.index_of(1, 1, 2)], ground)
        # any number of deployments at one time is fine
        assert is_independent(
            spec, [ground.index_of(1, 1, 2), ground.index_of(1, 2, 2)], ground)

    def test_i31_per_robot_per_time(self):
        ground = make_pool(p=2, r=2, t=2)
        spec = MatroidSpec("I31", 1)
        assert is_independent(
            spec, [ground.index_of(1, 1, 1), ground.index_of(2, 1, 1)], ground)
        assert not is_independent(
            spec, [ground.index_of(1, 1, 1), ground.index_of(1, 2, 1)], ground)

    def test_i32_availability_window(self):
        # robot available only at t=1: L_r(1)=1, zero elsewhere
        ground = make_pool(p=1, r=1, t=3)
        spec = MatroidSpec("I32", [[1, 0, 0]])
        assert is_independent(spec, [ground.index_of(1, 1, 1)], ground)
        assert not is_independent(spec, [ground.index_of(1, 1, 3)], ground)

    def test_i33_per_robot_active_times(self):
        ground = make_pool(p=2, r=2, t=3)
        spec = MatroidSpec("I33", [1, 2])
        sel = [ground.index_of(1, 1, 1), ground.index_of(1, 2, 1),
               ground.index_of(2, 1, 1), ground.index_of(2, 1, 2)]
        assert is_independent(spec, sel, ground)
        assert not is_independent(spec, sel + [ground.index_of(1, 1, 2)], ground)


class TestWithinBudget:
    def test_zero_budget_admits_only_empty(self):
        ground = make_pool(p=2, r=2, t=2)
        spec = KnapsackSpec("X2", 0.0)
        assert within_budget(spec, (), ground)
        assert all(not within_budget(spec, [e.index], ground)
                   for e in ground if e.cost > 0)

    def test_x2_sums_per_time(self):
        ground = make_pool(p=2, r=1, t=2)
        costs = {i: c for i, c in enumerate(ground.cost)}
        spec = KnapsackSpec("X2", budget=float(max(costs.values()) * 2 + 1),
                            cost_fn=lambda g: np.where(g.t_of == 1, 4.0, 7.0))
        sel = [ground.index_of(1, 1, 1), ground.index_of(1, 1, 2)]
        assert within_budget(KnapsackSpec("X2", 7.0, cost_fn=spec.cost_fn), sel, ground)
        assert not within_budget(KnapsackSpec("X2", 6.5, cost_fn=spec.cost_fn), sel, ground)

    def test_x1_single_robot_violation_fails_all(self):
        ground = make_pool(p=2, r=2, t=1, weight=0.5)
        # robot 1 picks two cells, robot 2 one: budget between them
        sel = [ground.index_of(1, 1, 1), ground.index_of(1, 2, 1), ground.index_of(2, 1, 1)]
        r1_cost = ground.cost[sel[0]] + ground.cost[sel[1]]
        r2_cost = ground.cost[sel[2]]
        budget = (r2_cost + r1_cost) / 2
        assert r2_cost <= budget < r1_cost
        assert not within_budget(KnapsackSpec("X1", float(budget)), sel, ground)

    def test_x3_groups_by_location(self):
        ground = make_pool(p=2, r=2, t=2)
        spec = KnapsackSpec("X3", budget=float(ground.cost.max()) + 0.1)
        one_per_loc = [ground.index_of(1, 1, 1), ground.index_of(1, 2, 1)]
        assert within_budget(spec, one_per_loc, ground)
        same_loc = [ground.index_of(1, 1, 1), ground.index_of(2, 1, 1),
                    ground.index_of(1, 1, 2)]
        assert not within_budget(spec, same_loc, ground)


class TestFeasible:
    def system(self, ground):
        return ConstraintSystem(
            matroids=(MatroidSpec("I21", ground.n_robots), MatroidSpec("I23", 2)),
            knapsacks=(KnapsackSpec("X2", 200.0),))

    def test_empty_feasible(self):
        ground = make_pool(p=2, r=2, t=3)
        assert feasible(self.system(ground), (), ground)

    def test_conjunction(self):
        ground = make_pool(p=2, r=2, t=3)
        sys_ = self.system(ground)
        ok = [ground.index_of(1, 1, 1), ground.index_of(2, 1, 1)]
        assert feasible(sys_, ok, ground)
        # three active times violate the I23 part only
        bad = [ground.index_of(1, 1, 1), ground.index_of(1, 1, 2), ground.index_of(1, 1, 3)]
        assert all(within_budget(k, bad, ground) for k in sys_.knapsacks)
        assert not feasible(sys_, bad, ground)

    def test_downward_closure_of_feasible(self):
        rng = np.random.default_rng(4)
        ground = make_pool(p=2, r=2, t=3)
        sys_ = self.system(ground)
        for _ in range(50):
            size = int(rng.integers(1, 6))
            sel = list(rng.choice(len(ground), size=size, replace=False))
            if feasible(sys_, sel, ground):
                drop = int(rng.integers(0, len(sel)))
                sub = sel[:drop] + sel[drop + 1:]
                assert feasible(sys_, sub, ground)

    def test_i22_weaker_than_i21_at_unit_limits(self):
        # statuses allow many deployments at a time; counts do not
        ground = make_pool(p=2, r=2, t=2)
        status = MatroidSpec("I22", 1)
        count = MatroidSpec("I21", 1)
        sel = [ground.index_of(1, 1, 1), ground.index_of(2, 1, 1)]
        assert is_independent(status, sel, ground)
        assert not is_independent(count, sel, ground)


class TestTrackers:
    def random_system(self, ground, rng):
        from intermit.harness import random_matroid_spec
        variants = list(rng.choice(ALL_VARIANTS, size=2, replace=False))
        matroids = tuple(random_matroid_spec(v, ground, rng) for v in variants)
        knap = KnapsackSpec(str(rng.choice(("X1", "X2", "X3"))),
                            float(rng.uniform(50, 200)))
        return ConstraintSystem(matroids, (knap,))

    def test_incremental_matches_from_scratch(self):
        rng = np.random.default_rng(9)
        for trial in range(20):
            ground = make_pool(p=2, r=2, t=3)
            sys_ = self.random_system(ground, rng)
            tracker = sys_.tracker(ground)
            selected: list[int] = []
            for _ in range(30):
                e = int(rng.integers(0, len(ground)))
                if e in selected:
                    continue
                expected = sys_.feasible(selected + [e], ground)
                got = tracker.can_add(e)
                mask_got = tracker.can_add_mask(np.array([e]))[0]
                suffix_got = tracker.can_add_suffix(e)[0]
                assert got == expected == bool(mask_got) == bool(suffix_got)
                if expected and rng.random() < 0.7:
                    tracker.add(e)
                    selected.append(e)
                elif selected and rng.random() < 0.3:
                    victim = selected.pop(int(rng.integers(0, len(selected))))
                    tracker.remove(victim)

    def test_max_cardinality_bounds_feasible_sizes(self):
        rng = np.random.default_rng(21)
        for trial in range(10):
            ground = make_pool(p=2, r=2, t=2)
            sys_ = ConstraintSystem(
                matroids=(MatroidSpec("I21", int(rng.integers(1, 3))),
                          MatroidSpec("I23", int(rng.integers(1, 3)))))
            bound = sys_.tracker(ground).max_cardinality()
            biggest = 0
            n = len(ground)
            for size in range(n, 0, -1):
                if size <= bound:
                    break
                for sub in itertools.combinations(range(n), size):
                    assert not sys_.feasible(sub, ground), \
                        f"feasible set of size {size} exceeds bound {bound}"

    def test_joint_bound_tighter_than_individuals(self):
        ground = make_pool(p=3, q=3, r=2, t=4)
        sys_ = ConstraintSystem(matroids=(MatroidSpec("I21", 2), MatroidSpec("I23", 2)))
        assert sys_.tracker(ground).max_cardinality() == 4


class TestVerifier:
    def test_i21_passes_exhaustively(self):
        ground = make_pool(p=2, r=2, t=2)  # 8 elements
        report = verify_matroid_axioms(MatroidSpec("I21", 1), ground)
        assert report.passed
        assert report.n_subsets == 256

    def test_i23_passes_on_pure_time_pool(self):
        # with one robot and one cell the rule reduces to a uniform matroid
        ground = make_pool(p=1, q=1, r=1, t=12)
        report = verify_matroid_axioms(MatroidSpec("I23", 2), ground)
        assert report.passed

    def test_i22_i31_i32_pass(self):
        rng = np.random.default_rng(2)
        from intermit.harness import random_matroid_spec
        for variant in ("I22", "I31", "I32"):
            for _ in range(3):
                ground = make_pool(p=2, r=2, t=2)
                spec = random_matroid_spec(variant, ground, rng)
                assert verify_matroid_axioms(spec, ground).passed

    def test_i23_exchange_counterexample_on_generic_pool(self):
        # two robots (or two cells) at one time break the exchange axiom:
        # A = two elements at one time, B = one element at another time,
        # B cannot absorb anything from A without opening a second time.
        ground = make_pool(p=1, q=1, r=2, t=2)
        report = verify_matroid_axioms(MatroidSpec("I23", 1), ground)
        assert not report.passed
        assert report.axiom == 3
        a, b = report.witness
        # machine-check the returned counterexample
        spec = MatroidSpec("I23", 1)
        assert is_independent(spec, a, ground)
        assert is_independent(spec, b, ground)
        assert len(b) < len(a)
        assert all(not is_independent(spec, tuple(b) + (e,), ground)
                   for e in set(a) - set(b))

    def test_i33_exchange_counterexample_on_generic_pool(self):
        ground = make_pool(p=2, q=1, r=1, t=2)
        report = verify_matroid_axioms(MatroidSpec("I33", 1), ground)
        assert not report.passed
        assert report.axiom == 3

    def test_corrupted_rule_reports_downward_closure(self):
        # "independent iff size != 1" violates downward closure at every singleton
        report = verify_independence_predicate(lambda s: len(s) != 1, 4)
        assert not report.passed
        assert report.axiom == 2
        bigger, smaller = report.witness
        assert len(bigger) == 2 and len(smaller) == 1

    def test_missing_empty_set_reported(self):
        report = verify_independence_predicate(lambda s: len(s) == 1, 3)
        assert not report.passed
        assert report.axiom == 1

    def test_refuses_oversized_pool(self):
        ground = make_pool(p=3, q=3, r=2, t=1)  # 18 elements
        with pytest.raises(ValueError):
            verify_matroid_axioms(MatroidSpec("I21", 1), ground)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(min_value=0, max_value=4))
    def test_uniform_rule_is_matroid(self, k):
        report = verify_independence_predicate(lambda s: len(s) <= k, 5)
        assert report.passed

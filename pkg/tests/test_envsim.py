import math

import numpy as np
import pytest

from intermit.envsim import (FieldState, GmmConfig, basis_matrix, basis_value,
                             field_value, field_values, generate_training_set,
                             sample_measurement, simulate_and_sample, simulate_weights,
                             step_weights)


def default_cfg(**overrides):
    return GmmConfig(**overrides)


class TestBasis:
    def test_peak_at_center(self):
        assert basis_value((50.0, 50.0), 30.0, (50.0, 50.0)) == 1.0

    def test_one_width_away(self):
        assert basis_value((0.0, 0.0), 25.0, (25.0, 0.0)) == pytest.approx(math.exp(-0.5))

    def test_far_field_vanishes(self):
        assert basis_value((0.0, 0.0), 10.0, (1000.0, 1000.0)) == pytest.approx(0.0, abs=1e-300)

    def test_rejects_bad_width(self):
        with pytest.raises(ValueError):
            basis_value((0, 0), 0.0, (1, 1))

    def test_matrix_matches_scalar(self):
        cfg = default_cfg()
        pts = np.array([[10.0, 20.0], [150.0, 90.0]])
        mat = basis_matrix(cfg, pts)
        for j, (c, w) in enumerate(zip(cfg.centers, cfg.widths)):
            assert mat[0, j] == pytest.approx(basis_value(c, w, pts[0]))
            assert mat[1, j] == pytest.approx(basis_value(c, w, pts[1]))


class TestStepWeights:
    def test_zero_stays_zero_without_noise(self):
        cfg = default_cfg(noise_scale=0.0)
        state = FieldState(np.zeros(5), 0.0)
        out = step_weights(state, cfg, np.random.default_rng(0))
        assert np.allclose(out.weights, 0.0)
        assert out.t == pytest.approx(cfg.dt)

    def test_unit_step_zeroes_weights(self):
        # dt=1 with pure decay dynamics collapses in one step: too coarse,
        # which is why the default dt is 0.1
        cfg = default_cfg(noise_scale=0.0, dt=1.0, weights0=(5.0,) * 5)
        out = step_weights(FieldState(cfg.weights0, 0.0), cfg, np.random.default_rng(0))
        assert np.allclose(out.weights, 0.0)

    def test_decay_preserves_ordering(self):
        cfg = default_cfg(noise_scale=0.0)
        state = FieldState(cfg.weights0, 0.0)
        rng = np.random.default_rng(0)
        for _ in range(30):
            state = step_weights(state, cfg, rng)
        order = np.argsort(cfg.weights0)
        assert np.array_equal(np.argsort(state.weights), order)

    def test_monotone_decay_toward_zero(self):
        cfg = default_cfg(noise_scale=0.0)
        state = FieldState(cfg.weights0, 0.0)
        rng = np.random.default_rng(0)
        prev = np.asarray(cfg.weights0)
        for _ in range(50):
            state = step_weights(state, cfg, rng)
            assert np.all(state.weights <= prev + 1e-12)
            assert np.all(state.weights >= 0)
            prev = state.weights

    def test_noise_draw_stream_consumed_even_when_silent(self):
        cfg_silent = default_cfg(noise_scale=0.0)
        rng = np.random.default_rng(5)
        step_weights(FieldState(cfg_silent.weights0, 0.0), cfg_silent, rng)
        after_silent = rng.standard_normal()
        rng = np.random.default_rng(5)
        cfg_loud = default_cfg(noise_scale=0.3)
        step_weights(FieldState(cfg_loud.weights0, 0.0), cfg_loud, rng)
        assert rng.standard_normal() == after_silent


class TestFieldValue:
    def test_zero_weights_zero_everywhere(self):
        cfg = default_cfg()
        state = FieldState(np.zeros(cfg.n_bases), 0.0)
        for pt in [(0, 0), (100, 100), (199, 3)]:
            assert field_value(state, cfg, pt) == 0.0

    def test_single_bump(self):
        cfg = default_cfg()
        w = np.zeros(cfg.n_bases)
        w[2] = 3.0
        state = FieldState(w, 0.0)
        pt = (55.0, 40.0)
        expected = 3.0 * basis_value(cfg.centers[2], cfg.widths[2], pt)
        assert field_value(state, cfg, pt) == pytest.approx(expected)

    def test_hand_summed_initial_field(self):
        cfg = default_cfg()
        state = FieldState(cfg.weights0, 0.0)
        pt = (100.0, 100.0)
        expected = sum(w * basis_value(c, width, pt)
                       for w, c, width in zip(cfg.weights0, cfg.centers, cfg.widths))
        assert field_value(state, cfg, pt) == pytest.approx(expected)
        assert field_values(state, cfg, np.array([pt]))[0] == pytest.approx(expected)

    def test_linear_in_weights(self):
        cfg = default_cfg()
        w = np.asarray(cfg.weights0)
        pt = (80.0, 120.0)
        v1 = field_value(FieldState(w, 0.0), cfg, pt)
        v2 = field_value(FieldState(2.5 * w, 0.0), cfg, pt)
        assert v2 == pytest.approx(2.5 * v1)


class TestSampleMeasurement:
    def test_noise_free_is_exact(self):
        cfg = default_cfg()
        state = FieldState(cfg.weights0, 0.0)
        pt = (60.0, 80.0)
        rng = np.random.default_rng(0)
        assert sample_measurement(state, cfg, pt, 0.0, rng) == field_value(state, cfg, pt)

    def test_seeded_reproducibility(self):
        cfg = default_cfg()
        state = FieldState(cfg.weights0, 0.0)
        a = sample_measurement(state, cfg, (10, 10), 0.5, np.random.default_rng(42))
        b = sample_measurement(state, cfg, (10, 10), 0.5, np.random.default_rng(42))
        assert a == b

    def test_empirical_variance(self):
        cfg = default_cfg()
        state = FieldState(cfg.weights0, 0.0)
        rng = np.random.default_rng(7)
        noise_var = 0.8
        draws = np.array([sample_measurement(state, cfg, (50, 50), noise_var, rng)
                          for _ in range(10_000)])
        assert np.var(draws) == pytest.approx(noise_var, rel=0.05)

    def test_rejects_negative_variance(self):
        cfg = default_cfg()
        with pytest.raises(ValueError):
            sample_measurement(FieldState(cfg.weights0, 0.0), cfg, (0, 0), -1.0,
                               np.random.default_rng(0))


class TestSimulateWeights:
    def test_records_requested_times_exactly(self):
        cfg = default_cfg(noise_scale=0.0)
        traj = simulate_weights(cfg, [0.35, 1.0, 2.5], np.random.default_rng(0))
        for t in (0.0, 0.35, 1.0, 2.5):
            assert traj.state_at(t).t == pytest.approx(t)
        with pytest.raises(ValueError):
            traj.state_at(0.7)

    def test_noise_free_matches_euler_product(self):
        cfg = default_cfg(noise_scale=0.0, dt=0.1)
        traj = simulate_weights(cfg, [1.0], np.random.default_rng(0))
        w1 = traj.state_at(1.0).weights
        expected = np.asarray(cfg.weights0) * (1 - 0.1) ** 10
        assert np.allclose(w1, expected)


class TestGenerateTrainingSet:
    def test_empty_schedule(self):
        cfg = default_cfg()
        train = generate_training_set(cfg, np.zeros((0, 3)), np.random.default_rng(0))
        assert len(train) == 0

    def test_single_probe_zero_noise(self):
        cfg = default_cfg(noise_scale=0.0)
        probes = np.array([[100.0, 100.0, 0.0]])
        train = generate_training_set(cfg, probes, np.random.default_rng(0))
        state = FieldState(cfg.weights0, 0.0)
        assert train.z[0] == pytest.approx(field_value(state, cfg, (100.0, 100.0)))

    def test_out_of_field_probe_rejected(self):
        cfg = default_cfg()
        with pytest.raises(ValueError):
            generate_training_set(cfg, np.array([[250.0, 10.0, 0.0]]),
                                  np.random.default_rng(0))
        with pytest.raises(ValueError):
            generate_training_set(cfg, np.array([[10.0, 10.0, 9.0]]),
                                  np.random.default_rng(0), horizon=4)

    def test_probe_order_preserved(self):
        cfg = default_cfg(noise_scale=0.0)
        probes = np.array([[10.0, 10.0, 2.0], [20.0, 20.0, 0.5]])
        train = generate_training_set(cfg, probes, np.random.default_rng(0))
        assert np.allclose(train.x, probes)

    def test_gp_recovers_field_from_dense_probes(self):
        # end to end: sample a dense probe grid, train, and check the posterior
        # mean reproduces the field far better than the field's dynamic range
        from intermit.stgp import KernelParams, fit_gp, posterior

        cfg = default_cfg(noise_scale=0.0)
        rng = np.random.default_rng(3)
        gx, gy = np.meshgrid(np.linspace(5, 195, 10), np.linspace(5, 195, 10))
        probes = np.column_stack([gx.ravel(), gy.ravel(), np.zeros(gx.size)])
        train, traj = simulate_and_sample(cfg, probes, rng, noise_var=1e-4)
        params = KernelParams(4.0, 40.0, 1.0, 2.0, 1e-6)
        model = fit_gp(params, train)
        test = np.column_stack([rng.uniform(20, 180, 40), rng.uniform(20, 180, 40),
                                np.zeros(40)])
        mu, _ = posterior(model, test)
        state = traj.state_at(0.0)
        truth = field_values(state, cfg, test[:, :2])
        rmse = float(np.sqrt(np.mean((mu - truth) ** 2)))
        dynamic_range = float(truth.max() - truth.min())
        assert rmse < 0.05 * dynamic_range


class TestGmmConfigValidation:
    def test_misaligned_arrays_rejected(self):
        with pytest.raises(ValueError):
            GmmConfig(widths=(40.0,) * 4)

    def test_nonpositive_width_rejected(self):
        with pytest.raises(ValueError):
            GmmConfig(widths=(40.0, 40.0, 0.0, 40.0, 40.0))

    def test_bad_dynamics_shape_rejected(self):
        with pytest.raises(ValueError):
            GmmConfig(dynamics=((1.0, 0.0),))

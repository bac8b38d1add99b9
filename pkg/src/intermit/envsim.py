"""Synthetic ground truth: a Gaussian-bump mixture with decaying stochastic weights.

The field is phi(x, y, t) = w(t) . b(x, y) where b stacks fixed isotropic
Gaussian bumps and the weights follow dw/dt = A w + noise, integrated with
explicit Euler steps.  With the default A = -I and no noise every weight
decays monotonically toward zero, i.e. the process evolves slowly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .stgp import TrainingSet

__all__ = [
    "GmmConfig",
    "FieldState",
    "WeightTrajectory",
    "basis_value",
    "basis_matrix",
    "step_weights",
    "field_value",
    "field_values",
    "sample_measurement",
    "simulate_weights",
    "simulate_and_sample",
    "generate_training_set",
]

DEFAULT_CENTERS = ((100.0, 100.0), (60.0, 80.0), (40.0, 30.0), (160.0, 160.0), (160.0, 30.0))
DEFAULT_WEIGHTS = (5.0, 5.0, 3.0, 8.0, 4.0)
DEFAULT_WIDTH = 40.0


@dataclass(frozen=True)
class GmmConfig:
    """Basis layout and weight dynamics of the synthetic field."""

    centers: tuple[tuple[float, float], ...] = DEFAULT_CENTERS
    widths: tuple[float, ...] = (DEFAULT_WIDTH,) * len(DEFAULT_CENTERS)
    weights0: tuple[float, ...] = DEFAULT_WEIGHTS
    dynamics: tuple[tuple[float, ...], ...] | None = None  # None means -identity
    noise_scale: float = 0.05
    dt: float = 0.1

    def __post_init__(self):
        centers = tuple((float(x), float(y)) for x, y in self.centers)
        k = len(centers)
        widths = tuple(float(w) for w in self.widths)
        weights0 = tuple(float(w) for w in self.weights0)
        if len(widths) != k or len(weights0) != k:
            raise ValueError("centers, widths, and initial weights must align")
        if any(w <= 0 for w in widths):
            raise ValueError("basis widths must be positive")
        if self.dynamics is not None:
            dyn = tuple(tuple(float(v) for v in row) for row in self.dynamics)
            if len(dyn) != k or any(len(row) != k for row in dyn):
                raise ValueError(f"dynamics matrix must be {k}x{k}")
            object.__setattr__(self, "dynamics", dyn)
        if self.noise_scale < 0:
            raise ValueError("noise scale must be >= 0")
        if self.dt <= 0:
            raise ValueError("integration step must be positive")
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "widths", widths)
        object.__setattr__(self, "weights0", weights0)

    @property
    def n_bases(self) -> int:
        return len(self.centers)

    def dynamics_matrix(self) -> np.ndarray:
        if self.dynamics is None:
            return -np.eye(self.n_bases)
        return np.asarray(self.dynamics, dtype=float)

    def centers_array(self) -> np.ndarray:
        return np.asarray(self.centers, dtype=float)

    def widths_array(self) -> np.ndarray:
        return np.asarray(self.widths, dtype=float)


@dataclass(frozen=True)
class FieldState:
    """Weight vector at one instant."""

    weights: np.ndarray
    t: float

    def __post_init__(self):
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float).ravel())
        object.__setattr__(self, "t", float(self.t))


def basis_value(center, width: float, point) -> float:
    """Single isotropic bump exp(-|p - c|^2 / (2 width^2)); peaks at 1 on the center."""
    if width <= 0:
        raise ValueError("basis width must be positive")
    dx = float(point[0]) - float(center[0])
    dy = float(point[1]) - float(center[1])
    return math.exp(-(dx * dx + dy * dy) / (2.0 * width * width))


def basis_matrix(cfg: GmmConfig, points: np.ndarray) -> np.ndarray:
    """(m, k) bump activations for m points."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    centers = cfg.centers_array()
    widths = cfg.widths_array()
    d2 = ((pts[:, None, :2] - centers[None, :, :]) ** 2).sum(axis=2)
    return np.exp(-d2 / (2.0 * widths ** 2))


def step_weights(state: FieldState, cfg: GmmConfig, rng: np.random.Generator,
                 dt: float | None = None) -> FieldState:
    """One explicit Euler step w <- w + dt A w + sqrt(dt) * noise.

    Always consumes one normal draw per basis so the stream stays aligned
    whether or not the noise scale is zero.
    """
    h = cfg.dt if dt is None else float(dt)
    if h <= 0:
        raise ValueError("step size must be positive")
    a = cfg.dynamics_matrix()
    noise = cfg.noise_scale * rng.standard_normal(cfg.n_bases)
    w = state.weights + h * (a @ state.weights) + math.sqrt(h) * noise
    return FieldState(w, state.t + h)


def field_value(state: FieldState, cfg: GmmConfig, point) -> float:
    """phi(x, y, t) = w(t) . b(x, y)."""
    b = np.array([basis_value(c, w, point) for c, w in zip(cfg.centers, cfg.widths)])
    return float(state.weights @ b)


def field_values(state: FieldState, cfg: GmmConfig, points: np.ndarray) -> np.ndarray:
    """Vectorized field evaluation at (m, 2) points."""
    return basis_matrix(cfg, points) @ state.weights


def sample_measurement(state: FieldState, cfg: GmmConfig, point, noise_var: float,
                       rng: np.random.Generator) -> float:
    """Field value plus zero-mean Gaussian sensing noise of the given variance."""
    if noise_var < 0:
        raise ValueError("noise variance must be >= 0")
    return field_value(state, cfg, point) + math.sqrt(noise_var) * rng.standard_normal()


@dataclass(frozen=True)
class WeightTrajectory:
    """Weight states recorded at requested times (always including t=0)."""

    times: np.ndarray
    weights: np.ndarray  # (len(times), k)

    def state_at(self, t: float) -> FieldState:
        hits = np.flatnonzero(np.abs(self.times - t) <= 1e-9)
        if not len(hits):
            raise ValueError(f"time {t} was not recorded on this trajectory")
        return FieldState(self.weights[hits[0]], float(self.times[hits[0]]))


def simulate_weights(cfg: GmmConfig, times, rng: np.random.Generator) -> WeightTrajectory:
    """Integrate the weight dynamics from t=0, recording every requested time.

    Marches on the configured dt lattice with exact partial steps onto each
    requested time, so arbitrary (nonnegative) times are hit exactly.
    """
    wanted = np.unique(np.asarray(list(times), dtype=float))
    if len(wanted) and wanted[0] < 0:
        raise ValueError("requested times must be >= 0")
    record_times = [0.0]
    record_weights = [np.asarray(cfg.weights0, dtype=float)]
    state = FieldState(cfg.weights0, 0.0)
    for target in wanted:
        while target - state.t > 1e-9:
            h = min(cfg.dt, target - state.t)
            state = step_weights(state, cfg, rng, dt=h)
        if target > 0.0:
            record_times.append(state.t)
            record_weights.append(state.weights)
    return WeightTrajectory(np.asarray(record_times), np.vstack(record_weights))


def simulate_and_sample(cfg: GmmConfig, probes, rng: np.random.Generator,
                        noise_var: float = 0.0,
                        field_size: tuple[float, float] = (200.0, 200.0),
                        horizon: float | None = None,
                        extra_times=()) -> tuple[TrainingSet, WeightTrajectory]:
    """Simulate one weight trajectory and sample noisy probe measurements from it.

    Probes are (x, y, t) rows; all must lie inside the field and, when a
    horizon is given, inside [0, horizon].  Draw order: all dynamics noise
    first, then one measurement draw per probe in input order.
    """
    probes = np.atleast_2d(np.asarray(probes, dtype=float))
    if probes.size == 0:
        probes = probes.reshape(0, 3)
    if probes.shape[1] != 3:
        raise ValueError(f"probes must be (m, 3) rows of (x, y, t), got {probes.shape}")
    width, height = field_size
    for x, y, t in probes:
        if not (0.0 <= x <= width and 0.0 <= y <= height):
            raise ValueError(f"probe ({x}, {y}) outside the {width}x{height} field")
        if t < 0 or (horizon is not None and t > horizon):
            raise ValueError(f"probe time {t} outside [0, {horizon}]")
    times = list(probes[:, 2]) + [float(t) for t in extra_times]
    if horizon is not None:
        times += list(range(1, int(horizon) + 1))
    trajectory = simulate_weights(cfg, times, rng)
    z = np.empty(len(probes))
    for j, (x, y, t) in enumerate(probes):
        state = trajectory.state_at(t)
        z[j] = sample_measurement(state, cfg, (x, y), noise_var, rng)
    noise = np.full(len(probes), float(noise_var))
    return TrainingSet(probes, z, noise), trajectory


def generate_training_set(cfg: GmmConfig, probes, rng: np.random.Generator,
                          noise_var: float = 0.0,
                          field_size: tuple[float, float] = (200.0, 200.0),
                          horizon: float | None = None) -> TrainingSet:
    """Simulate the field and package noisy probe measurements for GP training."""
    train, _ = simulate_and_sample(cfg, probes, rng, noise_var, field_size, horizon)
    return train

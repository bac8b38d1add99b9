"""Deployment ground set: who senses where, and when.

Every candidate decision is a triple (robot r, grid cell i, time t); the
full pool enumerates all of them over a uniform grid, a robot roster and
a discrete horizon, in a fixed t-major order so downstream scans and
tie-breaks are reproducible.  Elements carry the travel cost and the
sensing-noise variance of the robot that would execute them.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "GridSpec",
    "RobotSpec",
    "WeightedTravelCost",
    "GroundElement",
    "GroundSet",
    "DeploymentSet",
    "build_ground_set",
    "element_cost",
    "slice_deployment",
    "export_csv",
]


@dataclass(frozen=True)
class GridSpec:
    """Uniform P x Q discretization of a rectangular field."""

    p: int
    q: int
    width: float = 200.0
    height: float = 200.0

    def __post_init__(self):
        if self.p < 1 or self.q < 1:
            raise ValueError(f"grid needs at least one cell, got {self.p}x{self.q}")
        if self.width <= 0 or self.height <= 0:
            raise ValueError("field extent must be positive")

    @property
    def n_cells(self) -> int:
        return self.p * self.q

    def cell_center(self, i: int) -> tuple[float, float]:
        """Center of cell i for i in 1..P*Q, row-major with x varying fastest."""
        if not 1 <= i <= self.n_cells:
            raise ValueError(f"location index {i} outside 1..{self.n_cells}")
        ix = (i - 1) % self.p
        iy = (i - 1) // self.p
        return ((ix + 0.5) * self.width / self.p, (iy + 0.5) * self.height / self.q)


@dataclass(frozen=True)
class RobotSpec:
    """One robot: sensing quality, travel-cost weight, home position.

    ``noise_var`` is either one variance used at every time or a sequence
    with one entry per deployment time (index t-1).
    """

    id: int
    noise_var: float | tuple[float, ...] = 0.1
    cost_weight: float = 0.5
    depot: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.id < 1:
            raise ValueError("robot ids are 1-based")
        if not 0.0 < self.cost_weight < 1.0:
            raise ValueError(f"cost_weight must lie in (0,1), got {self.cost_weight}")
        if isinstance(self.noise_var, (list, tuple, np.ndarray)):
            object.__setattr__(self, "noise_var", tuple(float(v) for v in self.noise_var))
            noises: Iterable[float] = self.noise_var
        else:
            object.__setattr__(self, "noise_var", float(self.noise_var))
            noises = (self.noise_var,)
        if any(v <= 0 for v in noises):
            raise ValueError("sensing noise variances must be positive")
        object.__setattr__(self, "depot", (float(self.depot[0]), float(self.depot[1])))

    def noise_at(self, t: int) -> float:
        if isinstance(self.noise_var, tuple):
            if not 1 <= t <= len(self.noise_var):
                raise ValueError(f"no noise variance configured for t={t}")
            return self.noise_var[t - 1]
        return self.noise_var


class WeightedTravelCost:
    """Cost of one sensing decision: w_r * distance from the robot's depot.

    The time argument is part of the signature so a model may price repeat
    visits differently; this default is time-invariant.
    """

    def __call__(self, robot: RobotSpec, position: tuple[float, float], t: int) -> float:
        dx = position[0] - robot.depot[0]
        dy = position[1] - robot.depot[1]
        return robot.cost_weight * math.hypot(dx, dy)


@dataclass(frozen=True)
class GroundElement:
    """One candidate decision: robot ``robot.id`` senses cell ``location`` at time ``t``."""

    index: int
    robot: RobotSpec
    location: int
    t: int
    position: tuple[float, float]
    cost: float
    noise_var: float

    @property
    def r(self) -> int:
        return self.robot.id


def element_cost(element: GroundElement, model) -> float:
    """Recompute an element's cost under ``model`` (deterministic)."""
    return float(model(element.robot, element.position, element.t))


class GroundSet:
    """All candidate decisions for one problem, ordered t-major, then robot, then cell.

    Immutable after construction; exposes flat numpy views used by the
    solver and the enumerator as well as per-time/robot/location index
    partitions.
    """

    def __init__(self, grid: GridSpec, horizon: int, robots: Sequence[RobotSpec],
                 elements: Sequence[GroundElement]):
        self.grid = grid
        self.horizon = int(horizon)
        self.robots = tuple(robots)
        self.elements = tuple(elements)
        n = len(self.elements)
        self.t_of = np.fromiter((e.t for e in self.elements), dtype=np.int64, count=n)
        self.r_of = np.fromiter((e.r for e in self.elements), dtype=np.int64, count=n)
        self.loc_of = np.fromiter((e.location for e in self.elements), dtype=np.int64, count=n)
        self.x = np.fromiter((e.position[0] for e in self.elements), dtype=float, count=n)
        self.y = np.fromiter((e.position[1] for e in self.elements), dtype=float, count=n)
        self.cost = np.fromiter((e.cost for e in self.elements), dtype=float, count=n)
        self.noise_var = np.fromiter((e.noise_var for e in self.elements), dtype=float, count=n)
        self._by_key = {(e.r, e.location, e.t): e.index for e in self.elements}

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __getitem__(self, index: int) -> GroundElement:
        return self.elements[index]

    @property
    def n_robots(self) -> int:
        return len(self.robots)

    @property
    def n_locations(self) -> int:
        return self.grid.n_cells

    def index_of(self, r: int, i: int, t: int) -> int:
        return self._by_key[(r, i, t)]

    def time_slice(self, t: int) -> np.ndarray:
        return np.flatnonzero(self.t_of == t)

    def robot_slice(self, r: int) -> np.ndarray:
        return np.flatnonzero(self.r_of == r)

    def location_slice(self, i: int) -> np.ndarray:
        return np.flatnonzero(self.loc_of == i)

    def inputs(self) -> np.ndarray:
        """(n, 3) array of (x, y, t) rows, one per element."""
        return np.column_stack([self.x, self.y, self.t_of.astype(float)])


def build_ground_set(grid: GridSpec, horizon: int, robots: Sequence[RobotSpec],
                     cost_model=None) -> GroundSet:
    """Enumerate all P*Q*R*T candidate decisions in deterministic order."""
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    robots = tuple(robots)
    if not robots:
        raise ValueError("robot roster is empty")
    ids = sorted(r.id for r in robots)
    if ids != list(range(1, len(robots) + 1)):
        raise ValueError(f"robot ids must be exactly 1..{len(robots)}, got {ids}")
    if cost_model is None:
        cost_model = WeightedTravelCost()
    by_id = {r.id: r for r in robots}
    elements = []
    index = 0
    for t in range(1, horizon + 1):
        for rid in range(1, len(robots) + 1):
            robot = by_id[rid]
            for i in range(1, grid.n_cells + 1):
                pos = grid.cell_center(i)
                elements.append(GroundElement(
                    index=index,
                    robot=robot,
                    location=i,
                    t=t,
                    position=pos,
                    cost=float(cost_model(robot, pos, t)),
                    noise_var=robot.noise_at(t),
                ))
                index += 1
    return GroundSet(grid, horizon, robots, elements)


@dataclass(frozen=True)
class DeploymentSet:
    """A candidate solution: sorted element indices plus an optional cached objective."""

    indices: tuple[int, ...] = ()
    value: float | None = None

    @classmethod
    def from_indices(cls, indices: Iterable[int], value: float | None = None,
                     ground: GroundSet | None = None) -> "DeploymentSet":
        idx = tuple(sorted(int(i) for i in indices))
        if len(set(idx)) != len(idx):
            raise ValueError("deployment set contains duplicate elements")
        if idx and idx[0] < 0:
            raise ValueError("negative element index")
        if ground is not None and idx and idx[-1] >= len(ground):
            raise ValueError(f"element index {idx[-1]} outside ground set of size {len(ground)}")
        return cls(idx, value)

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __contains__(self, index: int) -> bool:
        return index in self.indices


def slice_deployment(selection: DeploymentSet, ground: GroundSet, *,
                     robot: int | None = None, time: int | None = None,
                     location: int | None = None) -> DeploymentSet:
    """Sub-selection matching the given selector(s); at least one is required."""
    if robot is None and time is None and location is None:
        raise ValueError("need at least one of robot=, time=, location=")
    kept = []
    for idx in selection:
        e = ground[idx]
        if robot is not None and e.r != robot:
            continue
        if time is not None and e.t != time:
            continue
        if location is not None and e.location != location:
            continue
        kept.append(idx)
    return DeploymentSet.from_indices(kept)


def export_csv(ground: GroundSet, path) -> None:
    """Dump the pool as CSV with columns r,i,t,x,y,cost,noise_var."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["r", "i", "t", "x", "y", "cost", "noise_var"])
        for e in ground:
            writer.writerow([e.r, e.location, e.t, repr(e.position[0]),
                             repr(e.position[1]), repr(e.cost), repr(e.noise_var)])

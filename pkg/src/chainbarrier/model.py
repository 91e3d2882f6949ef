"""Domain types, deployment generation, and displacement metrics.

Everything downstream (solver, chain bookkeeping, checker, baseline, harness)
works in terms of these value types. Positions are double-precision points in
meters; a deployment is canonically ordered by sensor id.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import ParameterError

Point = tuple[float, float]


@dataclass(frozen=True)
class BeltRegion:
    """Rectangular region of given length (x extent) and width (y extent).

    The intended regime is length much larger than width; that is not
    enforced, only the positivity of both dimensions is.
    """

    length: float
    width: float

    def __post_init__(self):
        if not (self.length > 0 and self.width > 0):
            raise ParameterError(f"belt dimensions must be positive, got {self.length}x{self.width}")

    def contains(self, p: Point, slack: float = 0.0) -> bool:
        return -slack <= p[0] <= self.length + slack and -slack <= p[1] <= self.width + slack


@dataclass(frozen=True)
class SensorRecord:
    """One mobile sensor: identity, where it started, where it is now."""

    id: int
    initial_pos: Point
    current_pos: Point
    sensing_radius: float

    def __post_init__(self):
        if self.id < 0:
            raise ParameterError(f"sensor id must be non-negative, got {self.id}")
        if not self.sensing_radius > 0:
            raise ParameterError(f"sensing radius must be positive, got {self.sensing_radius}")


@dataclass(frozen=True)
class Deployment:
    """A belt plus a non-empty, id-sorted collection of sensors.

    All sensors share one sensing radius; initial positions must lie inside
    the belt.
    """

    belt: BeltRegion
    sensors: tuple[SensorRecord, ...]

    def __post_init__(self):
        if not self.sensors:
            raise ParameterError("deployment needs at least one sensor")
        ids = [s.id for s in self.sensors]
        if len(set(ids)) != len(ids):
            raise ParameterError("sensor ids must be unique")
        if ids != sorted(ids):
            object.__setattr__(self, "sensors", tuple(sorted(self.sensors, key=lambda s: s.id)))
        radii = {s.sensing_radius for s in self.sensors}
        if len(radii) != 1:
            raise ParameterError(f"all sensors must share one sensing radius, got {sorted(radii)}")
        for s in self.sensors:
            if not self.belt.contains(s.initial_pos):
                raise ParameterError(f"sensor {s.id} initial position {s.initial_pos} outside belt")

    @property
    def rs(self) -> float:
        return self.sensors[0].sensing_radius

    @property
    def n(self) -> int:
        return len(self.sensors)

    @property
    def ids(self) -> tuple[int, ...]:
        return tuple(s.id for s in self.sensors)

    def initial_positions(self) -> dict[int, Point]:
        return {s.id: s.initial_pos for s in self.sensors}

    def min_sensors_to_span(self) -> int:
        """Number of tangent disks needed to cover the belt length."""
        return math.ceil(self.belt.length / (2.0 * self.rs))


@dataclass(frozen=True)
class AlgoConfig:
    """Tunable knobs of the formation algorithm and its solver.

    The force scale ``alpha``, branch-pull fraction ``beta``, and step
    duration ``tau`` are the model parameters; the rest control numerical
    behavior. Tolerances are absolute (meters); use :meth:`defaults` to get
    values scaled to a sensing radius.
    """

    alpha: float = 1.0
    beta: float = 0.05
    tau: float = 0.1
    mobility: float = 1.0
    constraint_tol: float = 5e-7
    touch_tol: float = 5e-5
    max_iterations: int = 200_000
    projection_iters: int = 16
    min_dist_clamp: float = 5e-4
    rng_seed: int = 0
    # Extensions beyond the core knob set: in-loop coverage-check cadence,
    # dominant-pair staleness refresh (pairs are otherwise fixed between
    # merges, which can deadlock on a pair that drifted out of reach), and
    # trajectory frame recording (None disables frames).
    coverage_check_every: int = 8
    pair_refresh_every: int = 64
    frame_every: int | None = None

    def __post_init__(self):
        if not self.alpha > 0:
            raise ParameterError("alpha must be positive")
        if not 0 < self.beta <= 0.1:
            raise ParameterError("beta must satisfy 0 < beta <= 0.1 (much smaller than 1)")
        for name in ("tau", "mobility", "constraint_tol", "touch_tol", "min_dist_clamp"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"{name} must be positive")
        for name in ("max_iterations", "projection_iters", "coverage_check_every", "pair_refresh_every"):
            if getattr(self, name) < 1:
                raise ParameterError(f"{name} must be a positive integer")
        if self.frame_every is not None and self.frame_every < 1:
            raise ParameterError("frame_every must be a positive integer when set")

    @classmethod
    def defaults(cls, rs: float, rng_seed: int = 0, **overrides) -> "AlgoConfig":
        """Default configuration with tolerances scaled to the sensing radius."""
        if not rs > 0:
            raise ParameterError("rs must be positive")
        base = dict(
            alpha=1.0,
            beta=0.05,
            tau=0.1,
            mobility=1.0,
            constraint_tol=1e-6 * rs,
            touch_tol=1e-4 * rs,
            max_iterations=200_000,
            projection_iters=16,
            min_dist_clamp=1e-3 * rs,
            rng_seed=rng_seed,
        )
        base.update(overrides)
        return cls(**base)

    def with_seed(self, rng_seed: int) -> "AlgoConfig":
        return replace(self, rng_seed=rng_seed)


@dataclass(frozen=True)
class Frame:
    """Snapshot of one recorded iteration: positions plus chain structure."""

    iteration: int
    positions: dict[int, Point]
    tree_edges: tuple[tuple[int, int], ...] = ()
    dominant_ids: tuple[int, ...] = ()
    flatten_ids: tuple[int, ...] = ()


@dataclass(frozen=True)
class RunResult:
    """Outcome of a formation run: final geometry and movement cost."""

    final_positions: dict[int, Point]
    displacements: dict[int, float]
    avg_displacement: float
    max_displacement: float
    iterations_used: int
    barrier_formed: bool
    frames: tuple[Frame, ...] | None = None


def uniform_random_deployment(seed: int, n: int, belt: BeltRegion, rs: float) -> Deployment:
    """Draw ``n`` sensor positions i.i.d. uniform over the belt.

    Deterministic: the same seed yields a bit-identical deployment. Sensor
    ids are 0..n-1 in draw order.
    """
    if n < 1:
        raise ParameterError(f"n must be at least 1, got {n}")
    if not rs > 0:
        raise ParameterError(f"rs must be positive, got {rs}")
    rng = np.random.default_rng(seed)
    xs = rng.uniform(0.0, belt.length, size=n)
    ys = rng.uniform(0.0, belt.width, size=n)
    sensors = tuple(
        SensorRecord(id=i, initial_pos=(float(xs[i]), float(ys[i])),
                     current_pos=(float(xs[i]), float(ys[i])), sensing_radius=rs)
        for i in range(n)
    )
    return Deployment(belt=belt, sensors=sensors)


def displacement_metrics(
    deployment: Deployment, final_positions: Mapping[int, Point]
) -> tuple[float, float, list[float]]:
    """Per-sensor Euclidean displacement plus its mean and maximum.

    ``final_positions`` must cover exactly the deployment's sensor ids; the
    per-sensor list follows the deployment's id order.
    """
    if set(final_positions.keys()) != set(deployment.ids):
        raise ParameterError("final positions must cover exactly the deployed sensor ids")
    per_sensor = []
    for s in deployment.sensors:
        fx, fy = final_positions[s.id]
        per_sensor.append(math.hypot(fx - s.initial_pos[0], fy - s.initial_pos[1]))
    return sum(per_sensor) / len(per_sensor), max(per_sensor), per_sensor


def make_run_result(
    deployment: Deployment,
    final_positions: Mapping[int, Point],
    iterations_used: int,
    barrier_formed: bool,
    frames: Sequence[Frame] | None = None,
) -> RunResult:
    avg, mx, per = displacement_metrics(deployment, final_positions)
    return RunResult(
        final_positions={i: tuple(final_positions[i]) for i in deployment.ids},
        displacements=dict(zip(deployment.ids, per)),
        avg_displacement=avg,
        max_displacement=mx,
        iterations_used=iterations_used,
        barrier_formed=barrier_formed,
        frames=tuple(frames) if frames is not None else None,
    )


# ---------------------------------------------------------------------------
# Deployment file format: a single JSON document with belt, radius, and the
# id-sorted sensor list. Round-trips losslessly (floats serialize via repr).
# ---------------------------------------------------------------------------

def deployment_to_json(dep: Deployment) -> str:
    doc = {
        "belt": {"length": dep.belt.length, "width": dep.belt.width},
        "rs": dep.rs,
        "sensors": [
            {"id": s.id, "x": s.initial_pos[0], "y": s.initial_pos[1]} for s in dep.sensors
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def deployment_from_json(text: str) -> Deployment:
    try:
        doc = json.loads(text)
        belt = BeltRegion(length=float(doc["belt"]["length"]), width=float(doc["belt"]["width"]))
        rs = float(doc["rs"])
        sensors = tuple(
            SensorRecord(
                id=int(rec["id"]),
                initial_pos=(float(rec["x"]), float(rec["y"])),
                current_pos=(float(rec["x"]), float(rec["y"])),
                sensing_radius=rs,
            )
            for rec in sorted(doc["sensors"], key=lambda r: int(r["id"]))
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ParameterError):
            raise
        raise ParameterError(f"malformed deployment document: {exc}") from exc
    return Deployment(belt=belt, sensors=sensors)


def write_deployment(dep: Deployment, path: str | Path) -> None:
    Path(path).write_text(deployment_to_json(dep))


def read_deployment(path: str | Path) -> Deployment:
    return deployment_from_json(Path(path).read_text())

"""Deterministic quasi-static solver for chained point bodies.

Bodies are inertia-free points: one step displaces each body by
mobility * force * tau, then enforces constraints by sequential position
projection. Two constraint kinds exist: distance caps (a pair may come as
close as it likes but never farther than a maximum) and vertical line
anchors (a body slides on x = c). Anchored bodies are immovable in x but
keep their normal mass in y, so chain tension can slide them along their
line. Projection sweeps run until every constraint holds within the
configured tolerance, so the post-step guarantees are hard, not best-effort.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from . import _kernels
from .errors import NumericalFailureError, ParameterError
from .model import AlgoConfig, Point

# Safety bound on projection sweeps; reaching it means the constraint system
# is effectively infeasible and the step fails loudly.
HARD_SWEEP_CAP = 100_000


@dataclass(frozen=True)
class StepReport:
    moved_ids: tuple[int, ...]
    max_constraint_violation: float
    sweeps: int


class PhysicsWorld:
    """Point bodies plus distance caps and line anchors, stepped in place."""

    def __init__(self, bodies: Mapping[int, Point], config: AlgoConfig):
        if not bodies:
            raise ParameterError("world needs at least one body")
        self.config = config
        self.ids: tuple[int, ...] = tuple(sorted(bodies))
        self.row_index = {b: i for i, b in enumerate(self.ids)}
        self.pos = np.array([bodies[b] for b in self.ids], dtype=np.float64)
        self.force = np.zeros_like(self.pos)
        self._caps: dict[tuple[int, int], float] = {}
        self._anchors: dict[int, float] = {}
        self._packed = None

    # -- accessors ---------------------------------------------------------

    def position(self, body_id: int) -> Point:
        r = self._require(body_id)
        return (float(self.pos[r, 0]), float(self.pos[r, 1]))

    def positions(self) -> dict[int, Point]:
        return {b: (float(self.pos[i, 0]), float(self.pos[i, 1])) for i, b in enumerate(self.ids)}

    def positions_array(self) -> np.ndarray:
        return self.pos.copy()

    @property
    def distance_caps(self) -> dict[tuple[int, int], float]:
        return dict(self._caps)

    @property
    def line_anchors(self) -> dict[int, float]:
        return dict(self._anchors)

    def _require(self, body_id: int) -> int:
        try:
            return self.row_index[body_id]
        except KeyError:
            raise ParameterError(f"unknown body id {body_id}") from None

    # -- forces ------------------------------------------------------------

    def apply_pull(self, body_id: int, target: Point, magnitude: float) -> None:
        """Accumulate a force of given magnitude on a body, aimed at target.

        A pull toward the body's own position is a documented no-op.
        """
        r = self._require(body_id)
        if magnitude < 0:
            raise ParameterError("pull magnitude must be non-negative")
        dx = target[0] - self.pos[r, 0]
        dy = target[1] - self.pos[r, 1]
        d = math.hypot(dx, dy)
        if d == 0.0 or magnitude == 0.0:
            return
        self.force[r, 0] += magnitude * dx / d
        self.force[r, 1] += magnitude * dy / d

    # -- constraint lifecycle ------------------------------------------------

    @staticmethod
    def _key(a: int, b: int) -> tuple[int, int]:
        return (a, b) if a < b else (b, a)

    def add_distance_cap(self, a: int, b: int, max_length: float) -> None:
        self._require(a)
        self._require(b)
        if a == b:
            raise ParameterError("distance cap endpoints must differ")
        if not max_length > 0:
            raise ParameterError("cap length must be positive")
        key = self._key(a, b)
        if key in self._caps:
            raise ParameterError(f"distance cap {key} already present")
        self._caps[key] = float(max_length)
        self._packed = None

    def remove_distance_cap(self, a: int, b: int) -> None:
        key = self._key(a, b)
        if key not in self._caps:
            raise ParameterError(f"no distance cap {key} to remove")
        del self._caps[key]
        self._packed = None

    def has_distance_cap(self, a: int, b: int) -> bool:
        return self._key(a, b) in self._caps

    def add_line_anchor(self, body_id: int, line_x: float) -> None:
        self._require(body_id)
        if body_id in self._anchors:
            raise ParameterError(f"body {body_id} already has a line anchor")
        self._anchors[body_id] = float(line_x)
        self._packed = None

    # -- stepping ------------------------------------------------------------

    def _pack(self):
        if self._packed is None:
            anchor_ids = sorted(self._anchors)
            cap_keys = sorted(self._caps)
            wx = np.ones(len(self.ids), dtype=np.float64)
            for b in anchor_ids:
                wx[self.row_index[b]] = 0.0
            self._packed = (
                wx,
                np.array([self.row_index[b] for b in anchor_ids], dtype=np.int64),
                np.array([self._anchors[b] for b in anchor_ids], dtype=np.float64),
                np.array([self.row_index[k[0]] for k in cap_keys], dtype=np.int64),
                np.array([self.row_index[k[1]] for k in cap_keys], dtype=np.int64),
                np.array([self._caps[k] for k in cap_keys], dtype=np.float64),
            )
        return self._packed

    def _check_finite(self):
        bad = _kernels.all_finite(self.pos)
        if bad >= 0:
            raise NumericalFailureError(
                f"body {self.ids[bad]} reached a non-finite position", body_id=self.ids[bad]
            )

    def step(self, tau: float) -> StepReport:
        """Advance by tau: integrate accumulated forces, project constraints.

        Forces are cleared afterwards. Raises NumericalFailureError when a
        position turns non-finite or constraints cannot be met.
        """
        if tau < 0:
            raise ParameterError("tau must be non-negative")
        before = self.pos.copy()
        wx, a_idx, a_line, c_a, c_b, c_len = self._pack()
        _kernels.integrate(self.pos, self.force, self.config.mobility, tau)
        worst, sweeps = _kernels.project(
            self.pos, wx, a_idx, a_line, c_a, c_b, c_len,
            self.config.projection_iters, self.config.constraint_tol, HARD_SWEEP_CAP,
        )
        self.force[:] = 0.0
        self._check_finite()
        if worst > self.config.constraint_tol:
            raise NumericalFailureError(
                f"constraints not satisfiable: residual {worst:.3e} after {sweeps} sweeps"
            )
        changed = np.flatnonzero((self.pos != before).any(axis=1))
        return StepReport(
            moved_ids=tuple(self.ids[i] for i in changed),
            max_constraint_violation=float(worst),
            sweeps=int(sweeps),
        )

    def settle(self) -> float:
        """Project constraints without integrating; returns the residual."""
        wx, a_idx, a_line, c_a, c_b, c_len = self._pack()
        worst, sweeps = _kernels.project(
            self.pos, wx, a_idx, a_line, c_a, c_b, c_len,
            1, self.config.constraint_tol, HARD_SWEEP_CAP,
        )
        self._check_finite()
        if worst > self.config.constraint_tol:
            raise NumericalFailureError(
                f"constraints not satisfiable: residual {worst:.3e} after {sweeps} sweeps"
            )
        return float(worst)

    def clamp(self, xmin: float, xmax: float, ymin: float, ymax: float) -> None:
        """Clamp all bodies into a box.

        Clamping is non-expansive, so satisfied distance caps stay satisfied;
        anchor lines must lie inside the box.
        """
        for line_x in self._anchors.values():
            if not xmin <= line_x <= xmax:
                raise ParameterError("anchor line outside clamp box")
        np.clip(self.pos[:, 0], xmin, xmax, out=self.pos[:, 0])
        np.clip(self.pos[:, 1], ymin, ymax, out=self.pos[:, 1])

    def max_violation(self) -> float:
        wx, a_idx, a_line, c_a, c_b, c_len = self._pack()
        return float(_kernels.residual(self.pos, a_idx, a_line, c_a, c_b, c_len))

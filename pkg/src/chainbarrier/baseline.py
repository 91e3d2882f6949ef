"""Straight-line barrier baseline: the comparison yardstick.

Places m = ceil(L / 2 Rs) tangent disk slots on one horizontal line and
assigns sensors to them at minimum movement cost. Candidate line heights are
the sensor y-coordinates plus the belt midline; for each candidate the
assignment itself is solved exactly (Hungarian for total movement, threshold
matching for the bottleneck), so the reported cost is the true optimum over
the candidate grid. The candidate grid is a heuristic: results stand in for
published near-optimal linear-barrier planners, they are not a
reimplementation of any of them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .coverage import strong_barrier_covered
from .errors import InsufficientSensorsError, ParameterError
from .model import Deployment, RunResult, make_run_result


@dataclass(frozen=True)
class LinearPlan:
    """A chosen barrier line, its slot x-positions, and who moves where.

    ``assignment`` maps sensor id to slot index; unassigned sensors stay
    put. ``cost`` is the optimized objective over assigned sensors (total
    distance for min_avg, largest distance for min_max).
    """

    barrier_y: float
    slots: tuple[float, ...]
    assignment: dict[int, int]
    objective: str
    cost: float


def barrier_slots(length: float, rs: float) -> tuple[float, ...]:
    """Slot centers (2i-1)*Rs for i=1..m: tangent disks covering the length."""
    m = math.ceil(length / (2.0 * rs))
    return tuple((2 * i - 1) * rs for i in range(1, m + 1))


def _bottleneck_assignment(cost: np.ndarray) -> tuple[np.ndarray, float]:
    """Exact min-max assignment of all columns via threshold + matching.

    Returns (row index per column, bottleneck value). Deterministic:
    augmenting paths scan rows in ascending order.
    """
    n, m = cost.shape

    def feasible(limit: float) -> np.ndarray | None:
        allow = cost <= limit
        match_of_col = np.full(m, -1, dtype=np.int64)
        match_of_row = np.full(n, -1, dtype=np.int64)

        def augment(col: int, seen: np.ndarray) -> bool:
            for r in range(n):
                if allow[r, col] and not seen[r]:
                    seen[r] = True
                    if match_of_row[r] == -1 or augment(match_of_row[r], seen):
                        match_of_row[r] = col
                        match_of_col[col] = r
                        return True
            return False

        for c in range(m):
            if not augment(c, np.zeros(n, dtype=bool)):
                return None
        return match_of_col

    values = np.unique(cost)
    lo, hi = 0, len(values) - 1
    if feasible(values[hi]) is None:
        raise ParameterError("no feasible assignment")  # unreachable when n >= m
    best = None
    while lo <= hi:
        mid = (lo + hi) // 2
        res = feasible(values[mid])
        if res is not None:
            best = (res, float(values[mid]))
            hi = mid - 1
        else:
            lo = mid + 1
    return best


def assignment_cost(cost: np.ndarray, objective: str) -> tuple[dict[int, int], float]:
    """Optimal assignment of slots (columns) to sensor rows for one line.

    Returns {row: column} covering every column, plus the objective value.
    """
    if objective == "min_avg":
        rows, cols = linear_sum_assignment(cost)
        return dict(zip(rows.tolist(), cols.tolist())), float(cost[rows, cols].sum())
    if objective == "min_max":
        match_of_col, value = _bottleneck_assignment(cost)
        return {int(match_of_col[c]): c for c in range(cost.shape[1])}, value
    raise ParameterError(f"unknown objective {objective!r}, use min_avg or min_max")


def plan_linear_barrier(
    deployment: Deployment, objective: str = "min_avg"
) -> tuple[LinearPlan, RunResult]:
    """Best linear barrier over the candidate line heights.

    Assigned sensors move straight to their slots; everyone else stays.
    The result always passes the coverage checker by construction.
    """
    if objective not in ("min_avg", "min_max"):
        raise ParameterError(f"unknown objective {objective!r}, use min_avg or min_max")
    slots = barrier_slots(deployment.belt.length, deployment.rs)
    m = len(slots)
    if deployment.n < m:
        raise InsufficientSensorsError(deployment.n, m)

    initial = np.array([s.initial_pos for s in deployment.sensors], dtype=np.float64)
    slot_x = np.asarray(slots, dtype=np.float64)
    candidates = sorted({s.initial_pos[1] for s in deployment.sensors} | {deployment.belt.width / 2.0})

    best = None
    for y in candidates:
        dx = initial[:, 0:1] - slot_x[None, :]
        dy = initial[:, 1:2] - y
        cost = np.sqrt(dx * dx + dy * dy)
        mapping, value = assignment_cost(cost, objective)
        if best is None or value < best[0]:
            best = (value, y, mapping)

    value, barrier_y, mapping = best
    ids = deployment.ids
    assignment = {ids[r]: c for r, c in sorted(mapping.items())}
    final = {s.id: s.initial_pos for s in deployment.sensors}
    for sensor_id, slot_idx in assignment.items():
        final[sensor_id] = (float(slot_x[slot_idx]), float(barrier_y))

    plan = LinearPlan(
        barrier_y=float(barrier_y),
        slots=slots,
        assignment=assignment,
        objective=objective,
        cost=float(value),
    )
    report = strong_barrier_covered(final, deployment.rs, deployment.belt)
    result = make_run_result(deployment, final, iterations_used=0, barrier_formed=report.covered)
    return plan, result

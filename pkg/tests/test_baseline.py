import itertools
import math

import numpy as np
import pytest

from chainbarrier import (
    BeltRegion,
    Deployment,
    InsufficientSensorsError,
    ParameterError,
    SensorRecord,
    plan_linear_barrier,
    strong_barrier_covered,
    uniform_random_deployment,
)
from chainbarrier.baseline import assignment_cost, barrier_slots

RS = 0.5


def make_dep(points, belt, rs=RS, ids=None):
    ids = ids if ids is not None else range(len(points))
    sensors = tuple(
        SensorRecord(id=i, initial_pos=(float(x), float(y)), current_pos=(float(x), float(y)),
                     sensing_radius=rs)
        for i, (x, y) in zip(ids, points)
    )
    return Deployment(belt=belt, sensors=sensors)


def brute_force_best(dep, objective):
    """Exhaustive optimum over all subset-assignments at each candidate y."""
    slots = barrier_slots(dep.belt.length, dep.rs)
    candidates = sorted({s.initial_pos[1] for s in dep.sensors} | {dep.belt.width / 2.0})
    best = math.inf
    per_candidate = {}
    for y in candidates:
        best_y = math.inf
        for perm in itertools.permutations(range(dep.n), len(slots)):
            costs = [
                math.dist(dep.sensors[perm[j]].initial_pos, (slots[j], y))
                for j in range(len(slots))
            ]
            value = sum(costs) if objective == "min_avg" else max(costs)
            best_y = min(best_y, value)
        per_candidate[y] = best_y
        best = min(best, best_y)
    return best, per_candidate


def test_slots_layout():
    assert barrier_slots(50.0, 0.5) == tuple((2 * i - 1) * 0.5 for i in range(1, 51))
    assert barrier_slots(3.0, 0.5) == (0.5, 1.5, 2.5)
    assert barrier_slots(2.7, 0.5) == (0.5, 1.5, 2.5)


def test_sensors_already_on_slots_cost_zero():
    belt = BeltRegion(4.0, 6.0)
    pts = [(x, 3.0) for x in barrier_slots(4.0, RS)]
    plan, result = plan_linear_barrier(make_dep(pts, belt), "min_avg")
    assert plan.barrier_y == 3.0
    assert plan.cost == 0.0
    assert result.avg_displacement == 0.0
    assert result.max_displacement == 0.0


def test_single_sensor_single_slot():
    belt = BeltRegion(1.0, 4.0)
    plan, result = plan_linear_barrier(make_dep([(0.9, 2.0)], belt), "min_avg")
    assert plan.slots == (0.5,)
    assert plan.barrier_y == 2.0
    assert result.max_displacement == pytest.approx(0.4)


def test_insufficient_sensors():
    belt = BeltRegion(4.0, 2.0)
    with pytest.raises(InsufficientSensorsError):
        plan_linear_barrier(make_dep([(1.0, 1.0), (2.0, 1.0)], belt), "min_avg")


def test_unknown_objective():
    belt = BeltRegion(1.0, 2.0)
    with pytest.raises(ParameterError):
        plan_linear_barrier(make_dep([(0.5, 1.0)], belt), "min_sum")


@pytest.mark.parametrize("objective", ["min_avg", "min_max"])
def test_matches_exhaustive_brute_force(objective):
    belt = BeltRegion(2.0, 2.0)  # m = 2 slots
    for seed in range(25):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 7))
        pts = [(float(x), float(y)) for x, y in rng.uniform((0, 0), (2, 2), size=(n, 2))]
        dep = make_dep(pts, belt)
        plan, _ = plan_linear_barrier(dep, objective)
        best, _ = brute_force_best(dep, objective)
        assert plan.cost == pytest.approx(best, rel=1e-9)


@pytest.mark.parametrize("objective", ["min_avg", "min_max"])
def test_per_candidate_assignment_is_optimal(objective):
    # The inner solver must be exact for every fixed line height.
    belt = BeltRegion(3.0, 2.0)  # m = 3
    slots = np.array(barrier_slots(3.0, RS))
    for seed in range(15):
        rng = np.random.default_rng(100 + seed)
        n = int(rng.integers(3, 7))
        pts = rng.uniform((0, 0), (3, 2), size=(n, 2))
        y = float(rng.uniform(0, 2))
        cost = np.sqrt((pts[:, 0:1] - slots[None, :]) ** 2 + (pts[:, 1:2] - y) ** 2)
        _, value = assignment_cost(cost, objective)
        best = math.inf
        for perm in itertools.permutations(range(n), 3):
            c = [cost[perm[j], j] for j in range(3)]
            best = min(best, sum(c) if objective == "min_avg" else max(c))
        assert value == pytest.approx(best, rel=1e-9)


def test_beats_or_matches_order_preserving():
    # The plan can only be at least as good as sorted order-preserving matching.
    belt = BeltRegion(2.0, 2.0)
    for seed in range(20):
        rng = np.random.default_rng(200 + seed)
        n = int(rng.integers(2, 7))
        pts = [(float(x), float(y)) for x, y in rng.uniform((0, 0), (2, 2), size=(n, 2))]
        dep = make_dep(pts, belt)
        plan, _ = plan_linear_barrier(dep, "min_avg")
        slots = barrier_slots(2.0, RS)
        candidates = sorted({p[1] for p in pts} | {1.0})
        op_best = math.inf
        by_x = sorted(pts)
        for y in candidates:
            for combo in itertools.combinations(range(n), len(slots)):
                value = sum(
                    math.dist(by_x[combo[j]], (slots[j], y)) for j in range(len(slots))
                )
                op_best = min(op_best, value)
        assert plan.cost <= op_best + 1e-9


def test_result_always_covers():
    belt = BeltRegion(10.0, 3.0)
    for seed in range(10):
        dep = uniform_random_deployment(seed, 14, belt, RS)
        for objective in ("min_avg", "min_max"):
            plan, result = plan_linear_barrier(dep, objective)
            assert result.barrier_formed
            final = result.final_positions
            assert strong_barrier_covered(final, RS, belt).covered


def test_unassigned_sensors_do_not_move():
    belt = BeltRegion(2.0, 2.0)
    pts = [(0.4, 1.0), (1.6, 1.0), (0.1, 0.1), (1.9, 1.9)]
    dep = make_dep(pts, belt)
    plan, result = plan_linear_barrier(dep, "min_avg")
    moved = {i for i, d in result.displacements.items() if d > 0}
    assert set(plan.assignment) >= moved
    assert len(plan.assignment) == 2


def test_cost_invariant_under_id_permutation():
    belt = BeltRegion(4.0, 3.0)
    rng = np.random.default_rng(31)
    pts = [(float(x), float(y)) for x, y in rng.uniform((0, 0), (4, 3), size=(9, 2))]
    base_plan, base_res = plan_linear_barrier(make_dep(pts, belt), "min_avg")
    perm = rng.permutation(9)
    shuffled = make_dep([pts[k] for k in perm], belt, ids=range(9))
    plan, res = plan_linear_barrier(shuffled, "min_avg")
    assert plan.cost == pytest.approx(base_plan.cost)
    assert res.avg_displacement == pytest.approx(base_res.avg_displacement)
    assert plan.barrier_y == base_plan.barrier_y

import math

import numpy as np
import pytest

from chainbarrier import AlgoConfig, NumericalFailureError, ParameterError, PhysicsWorld

CFG = AlgoConfig.defaults(0.5)
RS = 0.5
REACH = 2 * RS


def make_world(bodies, cfg=CFG):
    return PhysicsWorld(bodies, cfg)


def test_single_body_first_order_update():
    w = make_world({0: (0.0, 0.0)})
    w.apply_pull(0, (2.0, 0.0), 1.0)
    w.step(0.1)
    assert w.position(0) == (0.1, 0.0)


def test_pull_superposition():
    w = make_world({0: (0.0, 0.0)})
    w.apply_pull(0, (1.0, 0.0), 1.0)
    w.apply_pull(0, (0.0, 1.0), 1.0)
    w.step(0.1)
    assert w.position(0) == (pytest.approx(0.1), pytest.approx(0.1))


def test_pull_at_own_position_is_noop():
    w = make_world({0: (1.0, 1.0)})
    w.apply_pull(0, (1.0, 1.0), 5.0)
    report = w.step(0.1)
    assert w.position(0) == (1.0, 1.0)
    assert report.moved_ids == ()


def test_pull_unknown_body():
    w = make_world({0: (0.0, 0.0)})
    with pytest.raises(ParameterError):
        w.apply_pull(1, (1.0, 0.0), 1.0)


def test_chain_drag_respects_cap():
    # Pull the left body away; the cap must hold and drag the right body.
    w = make_world({0: (0.0, 0.0), 1: (REACH, 0.0)})
    w.add_distance_cap(0, 1, REACH)
    right_x0 = w.position(1)[0]
    for _ in range(30):
        w.apply_pull(0, (-100.0, 0.0), 1.0)
        w.step(0.1)
    assert math.dist(w.position(0), w.position(1)) <= REACH + CFG.constraint_tol
    assert w.position(1)[0] < right_x0


def test_line_anchor_kills_horizontal_motion():
    w = make_world({0: (RS, 2.0)})
    w.add_line_anchor(0, RS)
    w.apply_pull(0, (10.0, 2.0), 1.0)
    w.step(0.1)
    x, y = w.position(0)
    assert abs(x - RS) <= CFG.constraint_tol
    assert y == 2.0


def test_anchor_slides_in_y_under_cap_tension():
    # Cap tension on an anchored body must move it along its line.
    w = make_world({0: (RS, 2.0), 1: (RS + REACH, 2.0)})
    w.add_line_anchor(0, RS)
    w.add_distance_cap(0, 1, REACH)
    for _ in range(50):
        w.apply_pull(1, (RS + REACH, 10.0), 1.0)
        w.step(0.1)
    x, y = w.position(0)
    assert abs(x - RS) <= CFG.constraint_tol
    assert y > 2.0
    assert math.dist(w.position(0), w.position(1)) <= REACH + CFG.constraint_tol


def test_add_remove_cap_restores_world():
    w = make_world({3: (0.0, 0.0), 5: (1.0, 0.0)})
    before = (w.positions(), w.distance_caps, w.line_anchors)
    w.add_distance_cap(3, 5, REACH)
    w.remove_distance_cap(3, 5)
    assert (w.positions(), w.distance_caps, w.line_anchors) == before


def test_cap_is_unordered_pair():
    w = make_world({3: (0.0, 0.0), 5: (1.0, 0.0)})
    w.add_distance_cap(5, 3, REACH)
    assert w.has_distance_cap(3, 5) and w.has_distance_cap(5, 3)
    assert (3, 5) in w.distance_caps
    w.remove_distance_cap(3, 5)
    assert not w.has_distance_cap(5, 3)


def test_duplicate_line_anchor_rejected():
    w = make_world({0: (0.0, 0.0)})
    w.add_line_anchor(0, 0.5)
    with pytest.raises(ParameterError):
        w.add_line_anchor(0, 0.7)


def test_constraint_lifecycle_errors():
    w = make_world({0: (0.0, 0.0), 1: (1.0, 0.0)})
    with pytest.raises(ParameterError):
        w.remove_distance_cap(0, 1)
    w.add_distance_cap(0, 1, REACH)
    with pytest.raises(ParameterError):
        w.add_distance_cap(1, 0, REACH)
    with pytest.raises(ParameterError):
        w.add_distance_cap(0, 0, REACH)


def test_no_spontaneous_motion():
    # Zero forces and exactly satisfied constraints: step is a bitwise no-op.
    w = make_world({0: (RS, 1.0), 1: (RS + REACH, 1.0), 2: (RS + 1.3, 1.6)})
    w.add_line_anchor(0, RS)
    w.add_distance_cap(0, 1, REACH)
    w.add_distance_cap(1, 2, REACH)
    before = w.positions_array()
    report = w.step(0.1)
    assert np.array_equal(w.positions_array(), before)
    assert report.moved_ids == ()
    assert report.max_constraint_violation <= CFG.constraint_tol


def test_step_determinism():
    def run():
        w = make_world({i: (0.9 * i, 0.1 * i) for i in range(6)})
        for i in range(5):
            w.add_distance_cap(i, i + 1, REACH)
        w.add_line_anchor(0, 0.0)
        for k in range(40):
            w.apply_pull(5, (10.0, 3.0), 0.8)
            w.apply_pull(2, (0.0, 4.0), 0.3)
            w.step(0.1)
        return w.positions_array()

    assert np.array_equal(run(), run())


def test_taut_chain_transmits_motion():
    # Pulling one end of a taut chain eventually moves every body.
    n = 6
    w = make_world({i: (REACH * i, 0.0) for i in range(n)})
    for i in range(n - 1):
        w.add_distance_cap(i, i + 1, REACH)
    start = w.positions()
    moved = set()
    for _ in range(80):
        w.apply_pull(n - 1, (100.0, 0.0), 1.0)
        moved.update(w.step(0.1).moved_ids)
    assert moved == set(range(n))
    for i in range(n):
        assert w.position(i)[0] > start[i][0]


@pytest.mark.filterwarnings("ignore:invalid value")
def test_nonfinite_position_raises_with_body():
    w = make_world({0: (0.0, 0.0), 7: (1.0, 0.0)})
    w.apply_pull(7, (2.0, 0.0), float("inf"))
    with pytest.raises(NumericalFailureError) as err:
        w.step(0.1)
    assert err.value.body_id == 7


def _random_world(rng, cfg):
    n = int(rng.integers(2, 12))
    bodies = {i: (float(x), float(y)) for i, (x, y) in enumerate(rng.uniform(0, 6, size=(n, 2)))}
    w = PhysicsWorld(bodies, cfg)
    # put caps on a random spanning tree to mimic chain use; some extra caps
    order = rng.permutation(n)
    for k in range(1, n):
        a = int(order[k])
        b = int(order[int(rng.integers(0, k))])
        if not w.has_distance_cap(a, b):
            w.add_distance_cap(a, b, REACH)
    if rng.random() < 0.5:
        w.add_line_anchor(int(order[0]), float(rng.uniform(0, 6)))
    return w


@pytest.mark.parametrize("seed", range(5))
def test_randomized_worlds_respect_constraints(seed):
    rng = np.random.default_rng(seed)
    cfg = CFG
    for _ in range(40):
        w = _random_world(rng, cfg)
        for _ in range(5):
            for i in w.ids:
                if rng.random() < 0.4:
                    tx, ty = rng.uniform(-2, 8, size=2)
                    w.apply_pull(i, (float(tx), float(ty)), float(rng.uniform(0, 1.5)))
            report = w.step(cfg.tau)
            assert report.max_constraint_violation <= cfg.constraint_tol
            for (a, b), cap in w.distance_caps.items():
                assert math.dist(w.position(a), w.position(b)) <= cap + cfg.constraint_tol
            for body, line in w.line_anchors.items():
                assert abs(w.position(body)[0] - line) <= cfg.constraint_tol


def test_clamp_preserves_constraints():
    w = make_world({0: (0.2, -0.5), 1: (0.9, -0.2)})
    w.add_distance_cap(0, 1, REACH)
    w.clamp(0.0, 10.0, 0.0, 4.0)
    assert w.position(0)[1] == 0.0 and w.position(1)[1] == 0.0
    assert math.dist(w.position(0), w.position(1)) <= REACH

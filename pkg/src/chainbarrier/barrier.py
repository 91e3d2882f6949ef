"""Four-phase barrier formation: initialize, attach both boundary links, then
iteratively merge chain graphs under virtual forces until the coverage
checker confirms a barrier.

One iteration pulls a single randomly selected graph's dominant sensor
toward its co-dominant, applies the flattening pulls to every graph,
advances the solver by one time step, and merges once the selected pair
touches (merging is what ends the pull). The checker is the termination
authority; graph bookkeeping only feeds the forces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from . import chain as chainmod
from .chain import ChainForest, DominantPair, build_chain_forest
from .coverage import strong_barrier_covered
from .errors import (
    InsufficientSensorsError,
    NoConvergenceError,
    ParameterError,
)
from .model import AlgoConfig, Deployment, Frame, Point, RunResult, make_run_result
from .physics import PhysicsWorld

PHASES = ("Init", "LeftAttach", "RightAttach", "Formation", "Done")


class _PositionView(Mapping):
    """Read-only mapping view over the solver's position array."""

    __slots__ = ("_world",)

    def __init__(self, world: PhysicsWorld):
        self._world = world

    def __getitem__(self, body_id: int) -> Point:
        return self._world.position(body_id)

    def __iter__(self):
        return iter(self._world.ids)

    def __len__(self):
        return len(self._world.ids)


class _Pair:
    """Mutable mirror of a DominantPair; force refreshed every iteration."""

    __slots__ = ("graph_id", "dominant_id", "codominant_id", "force")

    def __init__(self, p: DominantPair):
        self.graph_id = p.graph_id
        self.dominant_id = p.dominant_id
        self.codominant_id = p.codominant_id
        self.force = p.force


@dataclass
class FormationState:
    deployment: Deployment
    config: AlgoConfig
    forest: ChainForest
    world: PhysicsWorld
    phase: str = "Init"
    iteration: int = 0
    rng: np.random.Generator | None = None
    pairs: dict[int, _Pair] = field(default_factory=dict)
    frames: list[Frame] = field(default_factory=list)
    _gids: tuple[int, ...] = ()
    _struct_version: int = -1
    _flat: dict = field(default_factory=dict)

    @property
    def positions(self) -> _PositionView:
        return _PositionView(self.world)

    def graph_ids(self) -> tuple[int, ...]:
        if self._struct_version != self.forest.version:
            self._gids = self.forest.graph_ids()
            self._flat.clear()
            self._struct_version = self.forest.version
        return self._gids

    def flatten_info(self, gid: int):
        """Cached flatten path and branch info; recomputed when the tree or
        its root changes."""
        self.graph_ids()
        g = self.forest.graph(gid)
        hit = self._flat.get(gid)
        if hit is not None and hit[0] == g.root:
            return hit[1], hit[2]
        if gid == self.forest.left_graph_id:
            kind = "left"
        elif gid == self.forest.right_graph_id:
            kind = "right"
        else:
            kind = "interior"
        path = chainmod.flatten_path(
            g, self.positions, kind,
            left_id=self.forest.left_link_id, right_id=self.forest.right_link_id,
        )
        info = chainmod.branch_info(g, path)
        self._flat[gid] = (g.root, path, info)
        return path, info


def _require_phase(state: FormationState, expected: str) -> None:
    if state.phase != expected:
        raise ParameterError(f"phase must be {expected}, state is in {state.phase}")


def initialize_phase(deployment: Deployment, config: AlgoConfig) -> FormationState:
    """Build the chain forest from initial positions and mirror its tree
    edges as distance caps in a fresh solver world."""
    forest = build_chain_forest(deployment)
    world = PhysicsWorld(deployment.initial_positions(), config)
    reach = 2.0 * deployment.rs
    for g in forest.graphs.values():
        for u, v in g.edges():
            world.add_distance_cap(u, v, reach)
    return FormationState(
        deployment=deployment,
        config=config,
        forest=forest,
        world=world,
        phase="Init",
        rng=np.random.default_rng(config.rng_seed),
    )


def _attach(state: FormationState, link: int, line_x: float) -> None:
    """Pull one boundary link horizontally to its line, then anchor it there.

    The pull magnitude is alpha / (2 Rs), capped so the link never overshoots
    the line; dragged chain members follow through the caps.
    """
    cfg = state.config
    world = state.world
    belt = state.deployment.belt
    rs = state.deployment.rs
    if link in world.line_anchors:
        return  # single sensor serving as both boundary links
    budget = max(1, cfg.max_iterations // 10)
    base = cfg.alpha / (2.0 * rs)
    for _ in range(budget):
        x, y = world.position(link)
        gap = abs(x - line_x)
        if gap <= cfg.touch_tol:
            world.add_line_anchor(link, line_x)
            world.settle()
            return
        world.apply_pull(link, (line_x, y), min(base, gap / (cfg.mobility * cfg.tau)))
        world.step(cfg.tau)
        world.clamp(0.0, belt.length, 0.0, belt.width)
    raise NoConvergenceError(
        f"boundary link {link} failed to reach x={line_x} within {budget} steps",
        diagnostics=_diagnostics(state),
    )


def left_attach_phase(state: FormationState) -> FormationState:
    _require_phase(state, "Init")
    _attach(state, state.forest.left_link_id, state.deployment.rs)
    state.phase = "LeftAttach"
    return state


def right_attach_phase(state: FormationState) -> FormationState:
    _require_phase(state, "LeftAttach")
    _attach(state, state.forest.right_link_id,
            state.deployment.belt.length - state.deployment.rs)
    state.phase = "RightAttach"
    return state


def _compute_all_pairs(state: FormationState) -> None:
    pairs = chainmod.compute_dominant_pairs(
        state.forest, state.world.ids, state.world.pos, state.config
    )
    state.pairs = {gid: _Pair(p) for gid, p in pairs.items()}


def formation_step(state: FormationState) -> bool:
    """One iteration of the barrier-formation phase; True when graphs merged.

    Picks a graph uniformly at random, pulls its dominant toward its
    co-dominant (stopping at touch), applies flattening to every graph,
    steps the world, then merges and recomputes dominant pairs if the
    selected pair touched.
    """
    _require_phase(state, "Formation")
    cfg = state.config
    world = state.world
    forest = state.forest
    rs = state.deployment.rs
    reach = 2.0 * rs
    gids = state.graph_ids()
    if len(gids) < 2:
        raise ParameterError("formation step needs at least two chain graphs")
    pick = gids[int(state.rng.integers(len(gids)))]

    pos = world.pos
    row = world.row_index
    move_cap = 1.0 / (cfg.mobility * cfg.tau)

    # Refresh every pair's force magnitude from current distances; the pair
    # itself stays fixed until a merge. The selected pull is not throttled
    # near touch: constrained chains need the full tension to straighten,
    # and merging is the absorbing event that ends the pull.
    for gid in gids:
        p = state.pairs[gid]
        a = row[p.dominant_id]
        b = row[p.codominant_id]
        d = math.hypot(pos[b, 0] - pos[a, 0], pos[b, 1] - pos[a, 1])
        p.force = cfg.alpha / max(d, cfg.min_dist_clamp)
        if gid == pick and d > reach:
            world.apply_pull(p.dominant_id, (float(pos[b, 0]), float(pos[b, 1])), p.force)

    # Flattening applies to every graph each iteration.
    view = state.positions
    for gid in gids:
        _, info = state.flatten_info(gid)
        if info is None:
            continue
        action = chainmod.pulls_from_info(info, view, state.pairs[gid].force, cfg, rs)
        for (u, v, mag) in action.pulls:
            a = row[u]
            b = row[v]
            d = math.hypot(pos[b, 0] - pos[a, 0], pos[b, 1] - pos[a, 1])
            gap = d - reach
            if gap > 0.0:
                world.apply_pull(u, (float(pos[b, 0]), float(pos[b, 1])), min(mag, gap * move_cap))
        if action.rewire is not None:
            (c, v), (u, v2) = action.rewire
            forest.rewire(gid, (c, v), (u, v2))
            world.remove_distance_cap(c, v)
            world.add_distance_cap(u, v2, reach)

    world.step(cfg.tau)
    world.clamp(0.0, state.deployment.belt.length, 0.0, state.deployment.belt.width)

    # Merge gate uses the constraint tolerance, not the looser touch
    # tolerance: the new tree edge must satisfy its cap as tightly as every
    # existing edge, otherwise joining two boundary-anchored chains can hand
    # the projection a near-infeasible system that combs out only sublinearly.
    merged = False
    sel = state.pairs[pick]
    a = row[sel.dominant_id]
    b = row[sel.codominant_id]
    d = math.hypot(pos[b, 0] - pos[a, 0], pos[b, 1] - pos[a, 1])
    if d <= reach + cfg.constraint_tol:
        chainmod.merge_graphs(forest, DominantPair(pick, sel.dominant_id, sel.codominant_id, sel.force))
        world.add_distance_cap(sel.dominant_id, sel.codominant_id, reach)
        world.settle()
        if len(forest.graphs) >= 2:
            _compute_all_pairs(state)
        else:
            state.pairs = {}
        merged = True
    state.iteration += 1
    # Heal stale pairs: a pair frozen since the last merge can drift out of
    # geometric reach (for instance onto an anchored sensor); a periodic
    # recompute restores progress without abandoning the fixed-pair rule.
    if not merged and len(forest.graphs) >= 2 and state.iteration % cfg.pair_refresh_every == 0:
        _compute_all_pairs(state)
    return merged


def is_barrier_formed(state: FormationState) -> bool:
    """Authoritative coverage test on the current positions."""
    report = strong_barrier_covered(
        state.world.positions(), state.deployment.rs, state.deployment.belt,
        tol=state.config.constraint_tol,
    )
    return report.covered


def _diagnostics(state: FormationState) -> dict:
    return {
        "phase": state.phase,
        "iteration": state.iteration,
        "graph_count": len(state.forest.graphs),
        "positions": state.world.positions(),
    }


def _record_frame(state: FormationState) -> None:
    edges = []
    flat = []
    doms = []
    for gid in state.graph_ids():
        g = state.forest.graph(gid)
        edges.extend(g.edges())
        if state.pairs:
            doms.append(state.pairs[gid].dominant_id)
            path, _ = state.flatten_info(gid)
            flat.extend(path)
    state.frames.append(
        Frame(
            iteration=state.iteration,
            positions=state.world.positions(),
            tree_edges=tuple(sorted(edges)),
            dominant_ids=tuple(sorted(doms)),
            flatten_ids=tuple(sorted(set(flat))),
        )
    )


def run(
    deployment: Deployment,
    config: AlgoConfig | None = None,
    on_iteration: Callable[[FormationState], None] | None = None,
) -> RunResult:
    """Execute all four phases and return the verified result.

    Requires at least ceil(L / 2 Rs) sensors. Raises NoConvergenceError with
    diagnostics if the iteration budget runs out; never loops silently.
    """
    cfg = config if config is not None else AlgoConfig.defaults(deployment.rs)
    required = deployment.min_sensors_to_span()
    if deployment.n < required:
        raise InsufficientSensorsError(deployment.n, required)
    if not cfg.min_dist_clamp < 2.0 * deployment.rs:
        raise ParameterError("min_dist_clamp must be below the disk reach 2*Rs")

    state = initialize_phase(deployment, cfg)
    state = left_attach_phase(state)
    state = right_attach_phase(state)
    state.phase = "Formation"
    if len(state.forest.graphs) >= 2:
        _compute_all_pairs(state)
    if on_iteration is not None:
        on_iteration(state)

    record = cfg.frame_every is not None
    last_frame_at = None
    if record:
        _record_frame(state)
        last_frame_at = state.iteration

    covered = is_barrier_formed(state)
    while not covered:
        if len(state.forest.graphs) < 2:
            raise NoConvergenceError(
                "single chain graph left without coverage; no forces remain",
                diagnostics=_diagnostics(state),
            )
        if state.iteration >= cfg.max_iterations:
            raise NoConvergenceError(
                f"no barrier after {state.iteration} iterations",
                diagnostics=_diagnostics(state),
            )
        merged = formation_step(state)
        if on_iteration is not None:
            on_iteration(state)
        if record and state.iteration % cfg.frame_every == 0:
            _record_frame(state)
            last_frame_at = state.iteration
        if merged or state.iteration % cfg.coverage_check_every == 0:
            covered = is_barrier_formed(state)

    state.phase = "Done"
    if record and last_frame_at != state.iteration:
        _record_frame(state)
    return make_run_result(
        deployment,
        state.world.positions(),
        iterations_used=state.iteration,
        barrier_formed=True,
        frames=state.frames if record else None,
    )

"""Chain-graph bookkeeping: components, spanning trees, and flattening.

Two sensors are connected when their sensing disks intersect, i.e. centers
at most twice the sensing radius apart. Each connected component is reduced
to a DFS spanning tree; merging and flattening operate on those trees only.
All tie-breaks are by ascending sensor id so a run is fully reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import ParameterError, SingleGraphError
from .model import AlgoConfig, Deployment, Point


def _dist(p: Point, q: Point) -> float:
    return math.hypot(p[0] - q[0], p[1] - q[1])


@dataclass
class ChainGraph:
    """One connected component, kept as a spanning tree of its members."""

    graph_id: int
    members: frozenset[int]
    tree: dict[int, tuple[int, ...]]
    root: int | None = None

    def degree(self, node: int) -> int:
        return len(self.tree[node])

    def edges(self):
        for u in sorted(self.tree):
            for v in self.tree[u]:
                if u < v:
                    yield (u, v)

    def n_edges(self) -> int:
        return sum(len(nbrs) for nbrs in self.tree.values()) // 2


@dataclass
class ChainForest:
    """Partition of all sensors into chain graphs, plus boundary designations."""

    graphs: dict[int, ChainGraph]
    left_link_id: int
    right_link_id: int
    graph_of: dict[int, int] = field(default_factory=dict)
    version: int = 0

    def __post_init__(self):
        if not self.graph_of:
            self.graph_of = {m: g.graph_id for g in self.graphs.values() for m in g.members}

    @property
    def left_graph_id(self) -> int:
        return self.graph_of[self.left_link_id]

    @property
    def right_graph_id(self) -> int:
        return self.graph_of[self.right_link_id]

    def graph_ids(self) -> tuple[int, ...]:
        return tuple(sorted(self.graphs))

    def graph(self, gid: int) -> ChainGraph:
        return self.graphs[gid]

    def graph_containing(self, sensor_id: int) -> ChainGraph:
        return self.graphs[self.graph_of[sensor_id]]

    def merge(self, a_id: int, b_id: int) -> int:
        """Unify the graphs of two sensors by adding the tree edge (a, b).

        The endpoints must live in distinct graphs. Roots are cleared; the
        caller recomputes dominant pairs afterwards. Returns the merged
        graph id (the smaller of the two).
        """
        ga = self.graph_of.get(a_id)
        gb = self.graph_of.get(b_id)
        if ga is None or gb is None:
            raise ParameterError("merge endpoints must be known sensors")
        if ga == gb:
            raise ParameterError(f"sensors {a_id} and {b_id} are already in one graph")
        A, B = self.graphs.pop(ga), self.graphs.pop(gb)
        tree = {**A.tree, **B.tree}
        tree[a_id] = tuple(sorted(tree[a_id] + (b_id,)))
        tree[b_id] = tuple(sorted(tree[b_id] + (a_id,)))
        gid = min(ga, gb)
        merged = ChainGraph(graph_id=gid, members=A.members | B.members, tree=tree, root=None)
        self.graphs[gid] = merged
        for m in merged.members:
            self.graph_of[m] = gid
        self.version += 1
        return gid

    def rewire(self, gid: int, delete_edge: tuple[int, int], add_edge: tuple[int, int]) -> None:
        """Replace one tree edge by another inside a graph (flatten rewiring)."""
        g = self.graphs[gid]
        du, dv = delete_edge
        au, av = add_edge
        if dv not in g.tree.get(du, ()):
            raise ParameterError(f"edge {delete_edge} not in graph {gid}")
        g.tree[du] = tuple(x for x in g.tree[du] if x != dv)
        g.tree[dv] = tuple(x for x in g.tree[dv] if x != du)
        g.tree[au] = tuple(sorted(g.tree[au] + (av,)))
        g.tree[av] = tuple(sorted(g.tree[av] + (au,)))
        self.version += 1


def select_left_right_links(deployment: Deployment) -> tuple[int, int]:
    """Extreme-x sensors; ties go to the lowest id."""
    left = min(deployment.sensors, key=lambda s: (s.initial_pos[0], s.id))
    right = max(deployment.sensors, key=lambda s: (s.initial_pos[0], -s.id))
    return left.id, right.id


def build_chain_forest(deployment: Deployment) -> ChainForest:
    """Components of the disk-intersection graph, each as a DFS spanning tree.

    Edges exist between pairs at center distance <= 2 Rs (inclusive). Each
    component's DFS starts at its lowest id and visits children in ascending
    id order; non-tree edges are dropped.
    """
    ids = list(deployment.ids)
    pts = np.array([s.initial_pos for s in deployment.sensors], dtype=np.float64)
    reach = 2.0 * deployment.rs
    diff = pts[:, None, :] - pts[None, :, :]
    d2 = np.einsum("ijk,ijk->ij", diff, diff)
    close = d2 <= reach * reach
    adj: dict[int, list[int]] = {i: [] for i in ids}
    ii, jj = np.nonzero(np.triu(close, k=1))
    for i, j in zip(ii.tolist(), jj.tolist()):
        adj[ids[i]].append(ids[j])
        adj[ids[j]].append(ids[i])

    graphs: dict[int, ChainGraph] = {}
    visited: set[int] = set()
    for start in ids:
        if start in visited:
            continue
        tree: dict[int, list[int]] = {start: []}
        visited.add(start)
        stack = [(start, iter(sorted(adj[start])))]
        while stack:
            node, it = stack[-1]
            advanced = False
            for nbr in it:
                if nbr in visited:
                    continue
                visited.add(nbr)
                tree[node].append(nbr)
                tree.setdefault(nbr, []).append(node)
                stack.append((nbr, iter(sorted(adj[nbr]))))
                advanced = True
                break
            if not advanced:
                stack.pop()
        members = frozenset(tree)
        graphs[start] = ChainGraph(
            graph_id=start,
            members=members,
            tree={u: tuple(sorted(vs)) for u, vs in tree.items()},
        )

    left_id, right_id = select_left_right_links(deployment)
    return ChainForest(graphs=graphs, left_link_id=left_id, right_link_id=right_id)


def pairwise_force(u_pos: Point, v_pos: Point, alpha: float, min_dist_clamp: float) -> float:
    """Attractive force between two chain links: alpha over their distance.

    The distance is clamped below so coincident points yield a finite force.
    """
    return alpha / max(_dist(u_pos, v_pos), min_dist_clamp)


@dataclass(frozen=True)
class DominantPair:
    graph_id: int
    dominant_id: int
    codominant_id: int
    force: float


def dominant_pair(
    forest: ChainForest, graph_id: int, positions: Mapping[int, Point], config: AlgoConfig
) -> DominantPair:
    """Strongest cross-graph attraction for one graph.

    Equivalent to the closest (member, outsider) pair; ties go to the pair
    containing the lowest id, then to the lower id of the other endpoint.
    Comparisons use squared distances so tie-breaking is exact. Sets the
    graph's root to the dominant sensor.
    """
    if len(forest.graphs) < 2:
        raise SingleGraphError("dominant pair undefined with a single chain graph")
    g = forest.graph(graph_id)
    members = sorted(g.members)
    outside = [i for i in sorted(forest.graph_of) if i not in g.members]
    best = None
    for u in members:
        pu = positions[u]
        for v in outside:
            pv = positions[v]
            d2 = (pu[0] - pv[0]) ** 2 + (pu[1] - pv[1]) ** 2
            key = (d2, min(u, v), max(u, v))
            if best is None or key < best[0]:
                best = (key, u, v)
    _, dom, codom = best
    g.root = dom
    return DominantPair(
        graph_id=graph_id,
        dominant_id=dom,
        codominant_id=codom,
        force=pairwise_force(positions[dom], positions[codom], config.alpha, config.min_dist_clamp),
    )


def compute_dominant_pairs(
    forest: ChainForest,
    ids: tuple[int, ...],
    pos: np.ndarray,
    config: AlgoConfig,
) -> dict[int, DominantPair]:
    """Vectorized dominant pairs for every graph at once.

    ``pos[k]`` is the position of ``ids[k]``. Implements exactly the same
    squared-distance-plus-id tie rule as :func:`dominant_pair`.
    """
    if len(forest.graphs) < 2:
        raise SingleGraphError("dominant pairs undefined with a single chain graph")
    ids_arr = np.asarray(ids, dtype=np.int64)
    gid_of = np.array([forest.graph_of[i] for i in ids], dtype=np.int64)
    out: dict[int, DominantPair] = {}
    for gid in forest.graph_ids():
        mask = gid_of == gid
        mem = np.flatnonzero(mask)
        ext = np.flatnonzero(~mask)
        diff = pos[mem][:, None, :] - pos[ext][None, :, :]
        d2 = np.einsum("ijk,ijk->ij", diff, diff)
        dmin = d2.min()
        ti, tj = np.nonzero(d2 == dmin)
        best = None
        for i, j in zip(ti.tolist(), tj.tolist()):
            u = int(ids_arr[mem[i]])
            v = int(ids_arr[ext[j]])
            key = (min(u, v), max(u, v))
            if best is None or key < best[0]:
                best = (key, u, v)
        _, dom, codom = best
        g = forest.graph(gid)
        g.root = dom
        out[gid] = DominantPair(
            graph_id=gid,
            dominant_id=dom,
            codominant_id=codom,
            force=config.alpha / max(math.sqrt(float(dmin)), config.min_dist_clamp),
        )
    return out


def flatten_path(
    graph: ChainGraph,
    positions: Mapping[int, Point],
    kind: str = "interior",
    left_id: int | None = None,
    right_id: int | None = None,
) -> tuple[int, ...]:
    """Path along which a chain tree is straightened.

    Interior trees use the root-to-leaf path with the most hops (ties:
    lexicographically smallest id sequence); boundary trees use the fixed
    tree path from the root to the left or right chain link.
    """
    root = graph.root
    if root is None or root not in graph.members:
        raise ParameterError(f"graph {graph.graph_id} has no valid root")
    if kind in ("left", "right"):
        target = left_id if kind == "left" else right_id
        if target is None or target not in graph.members:
            raise ParameterError(f"{kind} link not in graph {graph.graph_id}")
        return _tree_path(graph.tree, root, target)
    if kind != "interior":
        raise ParameterError(f"unknown flatten kind {kind!r}")

    # Heights via iterative post-order, then greedy descent: at each node take
    # the smallest child that still reaches the maximum depth.
    height: dict[int, int] = {}
    order: list[tuple[int, int | None]] = []
    stack = [(root, None)]
    while stack:
        node, parent = stack.pop()
        order.append((node, parent))
        for c in graph.tree[node]:
            if c != parent:
                stack.append((c, node))
    for node, parent in reversed(order):
        height[node] = 1 + max(
            (height[c] for c in graph.tree[node] if c != parent), default=0
        )
    path = [root]
    node, parent = root, None
    while True:
        children = [c for c in graph.tree[node] if c != parent]
        if not children:
            return tuple(path)
        want = max(height[c] for c in children)
        nxt = min(c for c in children if height[c] == want)
        path.append(nxt)
        node, parent = nxt, node


def _tree_path(tree: dict[int, tuple[int, ...]], src: int, dst: int) -> tuple[int, ...]:
    parent: dict[int, int | None] = {src: None}
    stack = [src]
    while stack:
        node = stack.pop()
        if node == dst:
            break
        for c in tree[node]:
            if c not in parent:
                parent[c] = node
                stack.append(c)
    path = [dst]
    while parent[path[-1]] is not None:
        path.append(parent[path[-1]])
    return tuple(reversed(path))


@dataclass(frozen=True)
class FlattenAction:
    """Pulls (sensor, target sensor, force magnitude) plus an optional rewire.

    A rewire replaces tree edge (branch_node, path_neighbor) by
    (pulled_sensor, path_neighbor), extending the flatten path by one node.
    """

    pulls: tuple[tuple[int, int, float], ...] = ()
    rewire: tuple[tuple[int, int], tuple[int, int]] | None = None

    @property
    def empty(self) -> bool:
        return not self.pulls and self.rewire is None


def branch_info(
    graph: ChainGraph, path: tuple[int, ...]
) -> tuple[int, tuple[int, ...], tuple[int, ...]] | None:
    """First branching node on the path, its off-path and on-path neighbors.

    Branching normally means tree degree above two. When no such node
    exists, a subtree can still dangle off the path's first or last node,
    which have only one on-path neighbor (this happens on boundary trees
    whose fixed path ends at a non-leaf); those are spliced in by the same
    pull-and-rewire rule, else the chain could never reach full length.
    Depends only on tree structure, so callers may cache it per tree
    revision. None when nothing hangs off the path.
    """
    on_path = set(path)
    for node in path:
        if graph.degree(node) > 2:
            branch = tuple(u for u in graph.tree[node] if u not in on_path)
            targets = tuple(v for v in graph.tree[node] if v in on_path)
            return node, branch, targets
    for node in (path[0], path[-1]):
        branch = tuple(u for u in graph.tree[node] if u not in on_path)
        targets = tuple(v for v in graph.tree[node] if v in on_path)
        if branch and targets:
            return node, branch, targets
    return None


def pulls_from_info(
    info: tuple[int, tuple[int, ...], tuple[int, ...]] | None,
    positions: Mapping[int, Point],
    f_dominant: float,
    config: AlgoConfig,
    rs: float,
) -> FlattenAction:
    if info is None:
        return FlattenAction()
    current, branch, targets = info
    pulls = []
    rewire = None
    touch = 2.0 * rs + config.touch_tol
    for u in branch:
        pu = positions[u]
        v = min(targets, key=lambda t: (_dist(pu, positions[t]), t))
        pulls.append((u, v, config.beta * f_dominant))
        if rewire is None and _dist(pu, positions[v]) <= touch:
            rewire = ((current, v), (u, v))
    return FlattenAction(pulls=tuple(pulls), rewire=rewire)


def flatten_step(
    graph: ChainGraph,
    path: tuple[int, ...],
    positions: Mapping[int, Point],
    f_dominant: float,
    config: AlgoConfig,
    rs: float,
) -> FlattenAction:
    """One application of the flattening logic along a precomputed path.

    Walks the path to the first node of tree degree above two; every neighbor
    off the path is pulled toward whichever of that node's on-path neighbors
    is closest (force beta times the graph's dominant force, ties to the
    lower id). If some pulled sensor already touches its target, the first
    such sensor (ascending id) triggers the rewire that splices it into the
    path.
    """
    return pulls_from_info(branch_info(graph, path), positions, f_dominant, config, rs)


def merge_graphs(forest: ChainForest, pair: DominantPair) -> int:
    """Merge the dominant's graph with the co-dominant's graph.

    Caller is responsible for the touch precondition (centers within
    2 Rs + touch tolerance). Returns the merged graph id.
    """
    return forest.merge(pair.dominant_id, pair.codominant_id)


def validate_forest(
    forest: ChainForest,
    positions: Mapping[int, Point],
    rs: float,
    tol: float,
) -> None:
    """Assert structural invariants; used by tests and debug runs."""
    seen: set[int] = set()
    for gid, g in forest.graphs.items():
        if gid != min(g.members):
            raise AssertionError(f"graph id {gid} is not its lowest member")
        if seen & g.members:
            raise AssertionError("graphs do not partition the sensors")
        seen |= g.members
        if set(g.tree) != set(g.members):
            raise AssertionError("tree nodes differ from members")
        if g.n_edges() != len(g.members) - 1:
            raise AssertionError(f"graph {gid}: {g.n_edges()} edges for {len(g.members)} members")
        # Connectivity of the tree (acyclicity follows from the edge count).
        stack, reached = [gid], {gid}
        while stack:
            for c in g.tree[stack.pop()]:
                if c not in reached:
                    reached.add(c)
                    stack.append(c)
        if reached != set(g.members):
            raise AssertionError(f"graph {gid} tree is disconnected")
        for u, v in g.edges():
            if _dist(positions[u], positions[v]) > 2.0 * rs + tol:
                raise AssertionError(f"tree edge ({u},{v}) longer than 2Rs+tol")
    if seen != set(forest.graph_of):
        raise AssertionError("member index out of sync")

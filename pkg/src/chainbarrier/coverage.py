"""Independent verification of strong 1-barrier coverage.

A belt is strongly barrier-covered when every continuous path from its
bottom boundary to its top boundary intersects some sensing disk. For closed
disks this is equivalent to the existence of a chain of pairwise
overlapping-or-tangent disks reaching from the left boundary to the right
one: such a chain separates bottom from top inside the rectangle, and when
no chain exists a crossing path can thread the gap. The checker tests the
chain condition with union-find; a grid flood-fill oracle double-checks the
verdict from the complement side.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy import ndimage

from .errors import ParameterError
from .model import BeltRegion, Point


@dataclass(frozen=True)
class CoverageReport:
    """Verdict plus a witness.

    When covered, ``witness`` is a left-to-right sequence of sensor ids whose
    disks form the blocking chain. When uncovered, ``gap_x`` is the rightmost
    x reached by disks chained to the left boundary (0.0 when no disk touches
    it); a crossing corridor exists just beyond it.
    """

    covered: bool
    witness: tuple[int, ...] | None = None
    gap_x: float | None = None


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def strong_barrier_covered(
    positions: Mapping[int, Point],
    rs: float,
    belt: BeltRegion,
    tol: float | None = None,
) -> CoverageReport:
    """Union-find check of the left-to-right disk chain condition.

    Disks are closed; tangency counts as connected. ``tol`` widens every
    adjacency test (disk-disk and disk-boundary) so chains whose joints sit
    at a solver's constraint limit still pass; it defaults to 1e-6 * rs.
    """
    if not rs > 0:
        raise ParameterError("rs must be positive")
    if tol is None:
        tol = 1e-6 * rs
    ids = sorted(positions)
    n = len(ids)
    if n == 0:
        return CoverageReport(covered=False, gap_x=0.0)
    pts = np.array([positions[i] for i in ids], dtype=np.float64)
    touch_left = pts[:, 0] <= rs + tol
    touch_right = pts[:, 0] >= belt.length - rs - tol

    reach = 2.0 * rs + tol
    diff = pts[:, None, :] - pts[None, :, :]
    d2 = np.einsum("ijk,ijk->ij", diff, diff)
    ii, jj = np.nonzero(np.triu(d2 <= reach * reach, k=1))

    LEFT, RIGHT = n, n + 1
    uf = _UnionFind(n + 2)
    for i, j in zip(ii.tolist(), jj.tolist()):
        uf.union(i, j)
    for i in np.flatnonzero(touch_left).tolist():
        uf.union(LEFT, i)
    for i in np.flatnonzero(touch_right).tolist():
        uf.union(RIGHT, i)

    if uf.find(LEFT) != uf.find(RIGHT):
        left_root = uf.find(LEFT)
        reach_x = 0.0
        for k in range(n):
            if uf.find(k) == left_root:
                reach_x = max(reach_x, float(pts[k, 0]) + rs)
        return CoverageReport(covered=False, gap_x=reach_x)

    # Witness: hop-minimal chain from a left-touching disk to a right-touching
    # one, expanded in ascending id order for determinism.
    adj: dict[int, list[int]] = {k: [] for k in range(n)}
    for i, j in zip(ii.tolist(), jj.tolist()):
        adj[i].append(j)
        adj[j].append(i)
    for k in adj:
        adj[k].sort()
    prev: dict[int, int | None] = {}
    queue = deque()
    for k in np.flatnonzero(touch_left).tolist():
        prev[k] = None
        queue.append(k)
    end = None
    while queue:
        k = queue.popleft()
        if touch_right[k]:
            end = k
            break
        for nb in adj[k]:
            if nb not in prev:
                prev[nb] = k
                queue.append(nb)
    chain = [end]
    while prev[chain[-1]] is not None:
        chain.append(prev[chain[-1]])
    witness = tuple(ids[k] for k in reversed(chain))
    return CoverageReport(covered=True, witness=witness)


def grid_gap_oracle(
    positions: Mapping[int, Point],
    rs: float,
    belt: BeltRegion,
    cell: float,
) -> bool:
    """Flood-fill oracle: is there an uncovered corridor across the belt?

    Discretizes the belt into square cells; a cell is uncovered when its
    center lies outside every closed disk. Returns False (not covered) iff
    some 4-connected uncovered path joins the bottom row to the top row,
    True otherwise. Requires cell <= rs / 4 for meaningful resolution.
    """
    if not rs > 0:
        raise ParameterError("rs must be positive")
    if not 0 < cell <= rs / 4.0:
        raise ParameterError(f"cell must be in (0, rs/4], got {cell}")
    nx = max(1, math.ceil(belt.length / cell - 1e-12))
    ny = max(1, math.ceil(belt.width / cell - 1e-12))
    covered = np.zeros((ny, nx), dtype=bool)
    for (x, y) in positions.values():
        i_lo = max(0, int((x - rs) / cell) - 1)
        i_hi = min(nx, int((x + rs) / cell) + 2)
        j_lo = max(0, int((y - rs) / cell) - 1)
        j_hi = min(ny, int((y + rs) / cell) + 2)
        if i_lo >= i_hi or j_lo >= j_hi:
            continue
        cx = (np.arange(i_lo, i_hi) + 0.5) * cell - x
        cy = (np.arange(j_lo, j_hi) + 0.5) * cell - y
        covered[j_lo:j_hi, i_lo:i_hi] |= cy[:, None] ** 2 + cx[None, :] ** 2 <= rs * rs
    uncovered = ~covered
    labels, count = ndimage.label(uncovered)
    if count == 0:
        return True
    bottom = set(np.unique(labels[0, :])) - {0}
    top = set(np.unique(labels[-1, :])) - {0}
    return not (bottom & top)


def min_config_slack(positions: Mapping[int, Point], rs: float, belt: BeltRegion) -> float:
    """Width of the narrowest geometric feature a coverage verdict can hinge on.

    Inter-disk features are either empty corridors (rim separation, for
    non-overlapping pairs) or covered bridges (lens width, for overlapping
    pairs); disk-to-wall features likewise are rim gaps or wall chords. A
    grid oracle with cell size below half this width resolves every feature,
    so configurations whose slack exceeds twice the cell are safe to
    cross-validate against the exact checker.
    """
    ids = sorted(positions)
    if not ids:
        return float("inf")
    pts = np.array([positions[i] for i in ids], dtype=np.float64)
    feats = [float("inf")]
    if len(ids) > 1:
        diff = pts[:, None, :] - pts[None, :, :]
        d = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        iu = np.triu_indices(len(ids), k=1)
        dv = d[iu]
        apart = dv > 2.0 * rs
        if apart.any():
            feats.append(float(np.min(dv[apart] - 2.0 * rs)))
        if (~apart).any():
            half = dv[~apart] / 2.0
            feats.append(float(np.min(2.0 * np.sqrt(np.maximum(rs * rs - half * half, 0.0)))))
    for coord, lo, hi in ((pts[:, 0], 0.0, belt.length), (pts[:, 1], 0.0, belt.width)):
        for margin in (coord - lo, hi - coord):
            gap = margin - rs
            outside = gap > 0
            if outside.any():
                feats.append(float(np.min(gap[outside])))
            if (~outside).any():
                m = np.minimum(np.abs(margin[~outside]), rs)
                feats.append(float(np.min(2.0 * np.sqrt(np.maximum(rs * rs - m * m, 0.0)))))
    return min(feats)

"""Compiled inner loops of the quasi-static solver.

Plain arrays in, positions mutated in place. Sweep order is fixed (anchors,
then caps sorted by id pair) so results are reproducible bit for bit.
"""

import math

import numpy as np
from numba import njit


@njit(cache=True)
def integrate(pos, force, mobility, tau):
    n = pos.shape[0]
    for i in range(n):
        pos[i, 0] += mobility * tau * force[i, 0]
        pos[i, 1] += mobility * tau * force[i, 1]


@njit(cache=True)
def residual(pos, anchor_idx, anchor_line, cap_a, cap_b, cap_len):
    worst = 0.0
    for k in range(anchor_idx.shape[0]):
        e = abs(pos[anchor_idx[k], 0] - anchor_line[k])
        if e > worst:
            worst = e
    for k in range(cap_a.shape[0]):
        a = cap_a[k]
        b = cap_b[k]
        dx = pos[b, 0] - pos[a, 0]
        dy = pos[b, 1] - pos[a, 1]
        e = math.sqrt(dx * dx + dy * dy) - cap_len[k]
        if e > worst:
            worst = e
    return worst


@njit(cache=True)
def project(pos, wx, anchor_idx, anchor_line, cap_a, cap_b, cap_len,
            min_sweeps, tol, hard_cap):
    """Sequential position projection until all constraints hold within tol.

    Anchored bodies have wx == 0 (x pinned, y free); cap corrections split by
    per-axis inverse mass. Runs at least min_sweeps sweeps, at most hard_cap.
    Returns (max residual, sweeps used).
    """
    sweeps = 0
    while True:
        for k in range(anchor_idx.shape[0]):
            pos[anchor_idx[k], 0] = anchor_line[k]
        for k in range(cap_a.shape[0]):
            a = cap_a[k]
            b = cap_b[k]
            dx = pos[b, 0] - pos[a, 0]
            dy = pos[b, 1] - pos[a, 1]
            d = math.sqrt(dx * dx + dy * dy)
            excess = d - cap_len[k]
            if excess > 0.0 and d > 0.0:
                nx = dx / d
                ny = dy / d
                denom = (wx[a] + wx[b]) * nx * nx + 2.0 * ny * ny
                if denom > 1e-12:
                    lam = excess / denom
                    pos[a, 0] += wx[a] * nx * lam
                    pos[a, 1] += ny * lam
                    pos[b, 0] -= wx[b] * nx * lam
                    pos[b, 1] -= ny * lam
        sweeps += 1
        worst = residual(pos, anchor_idx, anchor_line, cap_a, cap_b, cap_len)
        if sweeps >= min_sweeps and worst <= tol:
            return worst, sweeps
        if sweeps >= hard_cap:
            return worst, sweeps


@njit(cache=True)
def all_finite(pos):
    for i in range(pos.shape[0]):
        if not (np.isfinite(pos[i, 0]) and np.isfinite(pos[i, 1])):
            return i
    return -1

"""Pure-numpy reference implementation of the geometry kernels.

Semantics are shared with the compiled extension: polygons are given as a
flat (P, 2) vertex array plus ring offsets, membership follows the even-odd
rule over all rings, and points exactly on a ring edge count as inside.
"""

from __future__ import annotations

import numpy as np

_CHUNK = 4096


def _edge_arrays(coords: np.ndarray, offsets: np.ndarray):
    ax, ay, bx, by = [], [], [], []
    for r in range(len(offsets) - 1):
        lo, hi = offsets[r], offsets[r + 1]
        ring = coords[lo:hi]
        nxt = np.roll(ring, -1, axis=0)
        ax.append(ring[:, 0])
        ay.append(ring[:, 1])
        bx.append(nxt[:, 0])
        by.append(nxt[:, 1])
    return (np.concatenate(ax), np.concatenate(ay),
            np.concatenate(bx), np.concatenate(by))


def points_in_rings(px, py, coords, offsets):
    """Even-odd membership of points in a multi-ring polygon (edges inclusive)."""
    px = np.ascontiguousarray(px, dtype=np.float64)
    py = np.ascontiguousarray(py, dtype=np.float64)
    ax, ay, bx, by = _edge_arrays(coords, offsets)
    out = np.zeros(px.shape, dtype=bool)
    flat_x = px.ravel()
    flat_y = py.ravel()
    res = out.ravel()
    for lo in range(0, flat_x.size, _CHUNK):
        x = flat_x[lo:lo + _CHUNK, None]
        y = flat_y[lo:lo + _CHUNK, None]
        above = (ay[None, :] > y) != (by[None, :] > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xcross = ax + (y - ay) * (bx - ax) / (by - ay)
        crossing = above & (x < xcross)
        inside = crossing.sum(axis=1) % 2 == 1
        # points lying exactly on an edge count as inside
        cross = (bx - ax) * (y - ay) - (by - ay) * (x - ax)
        on_edge = (cross == 0.0) & \
            (x >= np.minimum(ax, bx)) & (x <= np.maximum(ax, bx)) & \
            (y >= np.minimum(ay, by)) & (y <= np.maximum(ay, by))
        res[lo:lo + _CHUNK] = inside | on_edge.any(axis=1)
    return out


def segment_lengths_in_rings(mx, my, ex, ey, coords, offsets):
    """Length of each segment's overlap with a multi-ring even-odd polygon.

    Segments run from (mx, my) - (ex, ey) to (mx, my) + (ex, ey).
    """
    mx = np.ascontiguousarray(mx, dtype=np.float64).ravel()
    my = np.ascontiguousarray(my, dtype=np.float64).ravel()
    ax, ay, bx, by = _edge_arrays(coords, offsets)
    dx = bx - ax
    dy = by - ay
    half = float(np.hypot(ex, ey))
    out = np.zeros(mx.size, dtype=np.float64)
    if half == 0.0:
        return out
    for lo in range(0, mx.size, _CHUNK):
        x = mx[lo:lo + _CHUNK, None]
        y = my[lo:lo + _CHUNK, None]
        denom = ex * dy - ey * dx  # cross(e, d)
        wx = ax - x
        wy = ay - y
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (wx * dy - wy * dx) / denom
            s = (wx * ey - wy * ex) / denom
        valid = (denom != 0.0) & (s >= 0.0) & (s <= 1.0) & (t >= -1.0) & (t <= 1.0)
        t = np.where(valid, t, 1.0)
        t.sort(axis=1)
        nseg = t.shape[0]
        ts = np.empty((nseg, t.shape[1] + 2))
        ts[:, 0] = -1.0
        ts[:, 1:-1] = t
        ts[:, -1] = 1.0
        mid_t = 0.5 * (ts[:, :-1] + ts[:, 1:])
        mid_x = x + mid_t * ex
        mid_y = y + mid_t * ey
        inside = points_in_rings(mid_x, mid_y, coords, offsets)
        span = np.clip(ts[:, 1:] - ts[:, :-1], 0.0, None)
        out[lo:lo + _CHUNK] = (span * inside).sum(axis=1) * half
    return out

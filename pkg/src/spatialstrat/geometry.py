"""Planar geometry: regions, exact areas, diameters, uniform draws, clipping.

All coordinates are planar meters.  Regions are immutable after construction
and safe for concurrent reads.  Points on a region boundary count as inside
(a fixed convention that keeps tests deterministic; it is irrelevant to any
estimate since boundaries have measure zero).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import kernels
from .randomness import RandomStream

_EPS = 1e-12


class Point(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class Segment:
    """A straight transect: midpoint, total length and orientation angle."""

    midpoint: Point
    length: float
    angle: float = 0.0

    def __post_init__(self):
        if not self.length > 0.0:
            raise ValueError("segment length must be positive")

    @property
    def half_vector(self) -> tuple[float, float]:
        return (0.5 * self.length * math.cos(self.angle),
                0.5 * self.length * math.sin(self.angle))

    @property
    def endpoints(self) -> tuple[Point, Point]:
        hx, hy = self.half_vector
        mx, my = self.midpoint
        return Point(mx - hx, my - hy), Point(mx + hx, my + hy)


# ---------------------------------------------------------------------------
# ring helpers
# ---------------------------------------------------------------------------

def _as_ring(points) -> np.ndarray:
    ring = np.asarray(points, dtype=np.float64)
    if ring.ndim != 2 or ring.shape[1] != 2:
        raise ValueError("a ring must be an (n, 2) array of vertices")
    if len(ring) > 1 and np.allclose(ring[0], ring[-1]):
        ring = ring[:-1]
    if len(ring) < 3:
        raise ValueError("a ring needs at least three distinct vertices")
    if not np.all(np.isfinite(ring)):
        raise ValueError("ring coordinates must be finite")
    return ring


def signed_ring_area(ring: np.ndarray) -> float:
    x = ring[:, 0]
    y = ring[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _segments_intersect(p1, p2, q1, q2) -> bool:
    """True if the two closed segments share any point."""
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    def on_seg(a, b, c):
        return (min(a[0], b[0]) <= c[0] <= max(a[0], b[0]) and
                min(a[1], b[1]) <= c[1] <= max(a[1], b[1]))

    d1 = orient(q1, q2, p1)
    d2 = orient(q1, q2, p2)
    d3 = orient(p1, p2, q1)
    d4 = orient(p1, p2, q2)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)) and d1 != 0 and d2 != 0 \
            and d3 != 0 and d4 != 0:
        return True
    if d1 == 0 and on_seg(q1, q2, p1):
        return True
    if d2 == 0 and on_seg(q1, q2, p2):
        return True
    if d3 == 0 and on_seg(p1, p2, q1):
        return True
    if d4 == 0 and on_seg(p1, p2, q2):
        return True
    return False


def _check_ring_simple(ring: np.ndarray, label: str) -> None:
    n = len(ring)
    edges = [(ring[i], ring[(i + 1) % n]) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue  # adjacent edges share one endpoint by construction
            if _segments_intersect(edges[i][0], edges[i][1], edges[j][0], edges[j][1]):
                raise ValueError(f"{label} ring is self-intersecting "
                                 f"(edges {i} and {j} cross)")


def _rings_cross(ring_a: np.ndarray, ring_b: np.ndarray) -> bool:
    na, nb = len(ring_a), len(ring_b)
    for i in range(na):
        a1, a2 = ring_a[i], ring_a[(i + 1) % na]
        for j in range(nb):
            if _segments_intersect(a1, a2, ring_b[j], ring_b[(j + 1) % nb]):
                return True
    return False


def _point_in_single_ring(p, ring: np.ndarray) -> bool:
    flat = np.ascontiguousarray(ring)
    offs = np.array([0, len(ring)], dtype=np.int64)
    return bool(kernels.points_in_rings(np.array([p[0]]), np.array([p[1]]),
                                        flat, offs)[0])


def convex_hull(points: np.ndarray) -> np.ndarray:
    """Andrew monotone chain; returns CCW hull without the repeated first point."""
    pts = np.unique(np.asarray(points, dtype=np.float64), axis=0)
    if len(pts) <= 2:
        return pts
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    pts = pts[order]

    def build(seq):
        out: list[np.ndarray] = []
        for p in seq:
            while len(out) >= 2:
                o, a = out[-2], out[-1]
                if (a[0] - o[0]) * (p[1] - o[1]) - (a[1] - o[1]) * (p[0] - o[0]) <= 0:
                    out.pop()
                else:
                    break
            out.append(p)
        return out

    lower = build(pts)
    upper = build(pts[::-1])
    return np.array(lower[:-1] + upper[:-1])


def hull_diameter(points: np.ndarray) -> float:
    """Largest pairwise distance, via convex hull + rotating calipers."""
    hull = convex_hull(points)
    n = len(hull)
    if n <= 1:
        return 0.0
    if n == 2:
        return float(np.hypot(*(hull[1] - hull[0])))

    def tri_area2(a, b, c):
        return abs((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))

    best = 0.0
    k = 1
    for i in range(n):
        j = (i + 1) % n
        while tri_area2(hull[i], hull[j], hull[(k + 1) % n]) > \
                tri_area2(hull[i], hull[j], hull[k]):
            k = (k + 1) % n
        best = max(best,
                   float(np.hypot(*(hull[k] - hull[i]))),
                   float(np.hypot(*(hull[k] - hull[j]))))
    return best


def max_pair_distance(points_a: np.ndarray, points_b: np.ndarray) -> float:
    """sup ||u - v|| over u in A, v in B, from representative point sets."""
    a = convex_hull(points_a) if len(points_a) > 8 else np.asarray(points_a, float)
    b = convex_hull(points_b) if len(points_b) > 8 else np.asarray(points_b, float)
    d = a[:, None, :] - b[None, :, :]
    return float(np.sqrt((d ** 2).sum(axis=2)).max())


# ---------------------------------------------------------------------------
# exact clipping primitives
# ---------------------------------------------------------------------------

def clip_ring_to_rect(ring: np.ndarray, x0, y0, x1, y1) -> np.ndarray:
    """Sutherland-Hodgman clip of a ring against an axis-aligned rectangle.

    The output may be weakly simple for non-convex input, but its signed
    area equals the signed area of the true intersection.
    """
    def clip(points, axis, bound, keep_below):
        out = []
        n = len(points)
        for i in range(n):
            cur = points[i]
            prv = points[i - 1]
            cur_in = (cur[axis] <= bound) if keep_below else (cur[axis] >= bound)
            prv_in = (prv[axis] <= bound) if keep_below else (prv[axis] >= bound)
            if cur_in != prv_in:
                t = (bound - prv[axis]) / (cur[axis] - prv[axis])
                out.append(prv + t * (cur - prv))
            if cur_in:
                out.append(cur)
        return out

    pts = list(ring)
    for axis, bound, below in ((0, x0, False), (0, x1, True),
                               (1, y0, False), (1, y1, True)):
        pts = clip(pts, axis, bound, below)
        if not pts:
            return np.empty((0, 2))
    return np.array(pts)


def disk_polygon_area(poly: np.ndarray, cx: float, cy: float, r: float) -> float:
    """Area of polygon ∩ disk, signed by polygon orientation (exact)."""
    if len(poly) < 3:
        return 0.0
    rel = np.asarray(poly, dtype=np.float64) - (cx, cy)
    r2 = r * r
    total = 0.0
    n = len(rel)
    for i in range(n):
        a = rel[i]
        b = rel[(i + 1) % n]
        d = b - a
        qa = d @ d
        if qa == 0.0:
            continue
        qb = a @ d
        qc = a @ a - r2
        disc = qb * qb - qa * qc
        ts = [0.0]
        if disc > 0.0:
            root = math.sqrt(disc)
            for t in ((-qb - root) / qa, (-qb + root) / qa):
                if 0.0 < t < 1.0:
                    ts.append(t)
        ts.append(1.0)
        ts.sort()
        for t0, t1 in zip(ts[:-1], ts[1:]):
            if t1 <= t0:
                continue
            p = a + t0 * d
            q = a + t1 * d
            m = a + 0.5 * (t0 + t1) * d
            if m @ m <= r2:
                total += 0.5 * (p[0] * q[1] - p[1] * q[0])
            else:
                dth = math.atan2(q[1], q[0]) - math.atan2(p[1], p[0])
                if dth > math.pi:
                    dth -= 2.0 * math.pi
                elif dth < -math.pi:
                    dth += 2.0 * math.pi
                total += 0.5 * r2 * dth
    return total


# ---------------------------------------------------------------------------
# triangulation (ear clipping, holes bridged into the outer ring)
# ---------------------------------------------------------------------------

def _bridge_hole(outer: np.ndarray, hole: np.ndarray) -> np.ndarray:
    """Merge one hole (CW) into an outer ring (CCW) with a zero-width bridge."""
    m_idx = int(np.lexsort((hole[:, 1], hole[:, 0]))[-1])  # max x, ties by y
    mx, my = hole[m_idx]

    n = len(outer)
    best_x = math.inf
    best_edge = -1
    for i in range(n):
        a = outer[i]
        b = outer[(i + 1) % n]
        if (a[1] > my) == (b[1] > my):
            continue
        x_int = a[0] + (my - a[1]) * (b[0] - a[0]) / (b[1] - a[1])
        if x_int >= mx - _EPS and x_int < best_x:
            best_x = x_int
            best_edge = i
    if best_edge < 0:
        raise ValueError("hole is not inside the outer ring")

    a = outer[best_edge]
    b = outer[(best_edge + 1) % n]
    if abs(a[0] - best_x) < _EPS and abs(a[1] - my) < _EPS:
        bridge = best_edge
    elif abs(b[0] - best_x) < _EPS and abs(b[1] - my) < _EPS:
        bridge = (best_edge + 1) % n
    else:
        cand = best_edge if a[0] > b[0] else (best_edge + 1) % n
        # a reflex outer vertex inside triangle (M, I, P) blocks visibility;
        # take the blocking vertex closest in angle to the +x ray.
        tri = np.array([[mx, my], [best_x, my], outer[cand]])
        best_angle = math.inf
        best_dist = math.inf
        for j in range(n):
            p = outer[j]
            prv = outer[j - 1]
            nxt = outer[(j + 1) % n]
            cross = (p[0] - prv[0]) * (nxt[1] - p[1]) - (p[1] - prv[1]) * (nxt[0] - p[0])
            if cross >= 0:
                continue  # convex vertices cannot block
            if j == cand or not _point_strictly_in_triangle(p, tri):
                continue
            angle = abs(math.atan2(p[1] - my, p[0] - mx))
            dist = math.hypot(p[0] - mx, p[1] - my)
            if angle < best_angle or (angle == best_angle and dist < best_dist):
                best_angle, best_dist, cand = angle, dist, j
        bridge = cand

    merged = np.vstack([
        outer[:bridge + 1],
        hole[m_idx:], hole[:m_idx + 1],
        outer[bridge:],
    ])
    return merged


def _point_strictly_in_triangle(p, tri) -> bool:
    (ax, ay), (bx, by), (cx, cy) = tri
    d1 = (bx - ax) * (p[1] - ay) - (by - ay) * (p[0] - ax)
    d2 = (cx - bx) * (p[1] - by) - (cy - by) * (p[0] - bx)
    d3 = (ax - cx) * (p[1] - cy) - (ay - cy) * (p[0] - cx)
    return (d1 > _EPS and d2 > _EPS and d3 > _EPS) or \
           (d1 < -_EPS and d2 < -_EPS and d3 < -_EPS)


def _ear_clip(ring: np.ndarray) -> list[np.ndarray]:
    """Triangulate a (weakly) simple CCW ring by ear clipping."""
    idx = list(range(len(ring)))
    triangles = []
    guard = 0
    while len(idx) > 3:
        guard += 1
        if guard > 4 * len(ring) ** 2:
            raise ValueError("ear clipping failed to make progress")
        n = len(idx)
        clipped = False
        for k in range(n):
            i_prev, i_cur, i_next = idx[k - 1], idx[k], idx[(k + 1) % n]
            a, b, c = ring[i_prev], ring[i_cur], ring[i_next]
            cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
            if cross <= _EPS:
                if abs(cross) <= _EPS and _collinear_between(a, b, c):
                    idx.pop(k)  # degenerate spike/duplicate, drop silently
                    clipped = True
                    break
                continue
            tri = np.array([a, b, c])
            blocked = False
            for j in idx:
                if j in (i_prev, i_cur, i_next):
                    continue
                p = ring[j]
                if (abs(p[0] - a[0]) < _EPS and abs(p[1] - a[1]) < _EPS) or \
                   (abs(p[0] - b[0]) < _EPS and abs(p[1] - b[1]) < _EPS) or \
                   (abs(p[0] - c[0]) < _EPS and abs(p[1] - c[1]) < _EPS):
                    continue  # coincident bridge duplicates never block
                if _point_strictly_in_triangle(p, tri):
                    blocked = True
                    break
            if not blocked:
                triangles.append(tri)
                idx.pop(k)
                clipped = True
                break
        if not clipped:
            raise ValueError("no ear found; polygon may be malformed")
    if len(idx) == 3:
        tri = ring[idx]
        if abs(signed_ring_area(tri)) > _EPS:
            triangles.append(tri)
    return triangles


def _collinear_between(a, b, c) -> bool:
    return (min(a[0], c[0]) - _EPS <= b[0] <= max(a[0], c[0]) + _EPS and
            min(a[1], c[1]) - _EPS <= b[1] <= max(a[1], c[1]) + _EPS)


# ---------------------------------------------------------------------------
# regions
# ---------------------------------------------------------------------------

class Region:
    """Common interface of all study/cover regions."""

    area: float

    @property
    def bbox(self) -> tuple[float, float, float, float]:
        raise NotImplementedError

    def diameter(self) -> float:
        raise NotImplementedError

    def contains(self, x, y) -> np.ndarray:
        """Vectorized membership test (boundary counts as inside)."""
        raise NotImplementedError

    def contains_point(self, p) -> bool:
        return bool(np.asarray(self.contains(np.array([p[0]]), np.array([p[1]])))[0])

    def uniform_points(self, stream: RandomStream, size: int) -> np.ndarray:
        raise NotImplementedError

    def segment_lengths(self, mx, my, ex, ey) -> np.ndarray:
        """Batch 1-D measure of segment ∩ region; segments share direction."""
        raise NotImplementedError

    def cell_fraction(self, x0, y0, x1, y1) -> float:
        """Exact fraction of an axis-aligned cell covered by the region."""
        raise NotImplementedError

    def cell_clip_points(self, x0, y0, x1, y1) -> np.ndarray:
        """Representative extreme points of cell ∩ region (for diameters)."""
        raise NotImplementedError

    def hull_points(self) -> np.ndarray:
        raise NotImplementedError

    def config(self) -> dict:
        raise NotImplementedError


class PolygonalRegion(Region):
    """One or more outer rings minus hole rings, all simple polygons."""

    def __init__(self, outers, holes: Sequence | None = None):
        if isinstance(outers, np.ndarray) and outers.ndim == 2:
            outers = [outers]  # a single ring was passed
        elif isinstance(outers, (list, tuple)) and len(outers) and \
                np.asarray(outers[0], dtype=object).ndim == 1:
            outers = [outers]
        self.outers = [_as_ring(r) for r in outers]
        self.holes = [_as_ring(r) for r in (holes or [])]
        # normalize orientation: outers CCW, holes CW
        self.outers = [r if signed_ring_area(r) > 0 else r[::-1].copy()
                       for r in self.outers]
        self.holes = [r if signed_ring_area(r) < 0 else r[::-1].copy()
                      for r in self.holes]
        for i, r in enumerate(self.outers):
            _check_ring_simple(r, f"outer[{i}]")
        for i, r in enumerate(self.holes):
            _check_ring_simple(r, f"hole[{i}]")

        self._hole_parent = []
        for i, h in enumerate(self.holes):
            parent = next((j for j, o in enumerate(self.outers)
                           if _point_in_single_ring(h[0], o)), None)
            if parent is None:
                raise ValueError(f"hole[{i}] is not inside any outer ring")
            if _rings_cross(h, self.outers[parent]):
                raise ValueError(f"hole[{i}] crosses its outer ring")
            self._hole_parent.append(parent)

        self.area = float(sum(signed_ring_area(r) for r in self.outers) +
                          sum(signed_ring_area(r) for r in self.holes))
        if self.area <= 0.0:
            raise ValueError("polygonal region must have positive area")

        rings = self.outers + self.holes
        self._flat = np.ascontiguousarray(np.vstack(rings))
        self._offsets = np.cumsum([0] + [len(r) for r in rings]).astype(np.int64)
        self._triangles = None
        self._tri_cum = None

    @property
    def rings(self) -> list[np.ndarray]:
        return self.outers + self.holes

    @property
    def bbox(self):
        pts = np.vstack(self.outers)
        return (float(pts[:, 0].min()), float(pts[:, 1].min()),
                float(pts[:, 0].max()), float(pts[:, 1].max()))

    def hull_points(self) -> np.ndarray:
        return np.vstack(self.outers)

    def diameter(self) -> float:
        return hull_diameter(self.hull_points())

    def contains(self, x, y):
        return kernels.points_in_rings(np.asarray(x, float), np.asarray(y, float),
                                       self._flat, self._offsets)

    def segment_lengths(self, mx, my, ex, ey):
        return kernels.segment_lengths_in_rings(
            np.asarray(mx, float), np.asarray(my, float), float(ex), float(ey),
            self._flat, self._offsets)

    def cell_fraction(self, x0, y0, x1, y1) -> float:
        cell_area = (x1 - x0) * (y1 - y0)
        total = 0.0
        for ring in self.rings:
            clipped = clip_ring_to_rect(ring, x0, y0, x1, y1)
            if len(clipped) >= 3:
                total += signed_ring_area(clipped)
        return min(max(total / cell_area, 0.0), 1.0)

    def cell_clip_points(self, x0, y0, x1, y1) -> np.ndarray:
        parts = []
        for ring in self.rings:
            clipped = clip_ring_to_rect(ring, x0, y0, x1, y1)
            if len(clipped):
                parts.append(clipped)
        return np.vstack(parts) if parts else np.empty((0, 2))

    def _triangulate(self):
        if self._triangles is None:
            tris: list[np.ndarray] = []
            for j, outer in enumerate(self.outers):
                merged = outer
                my_holes = [self.holes[i] for i in range(len(self.holes))
                            if self._hole_parent[i] == j]
                my_holes.sort(key=lambda h: -float(h[:, 0].max()))
                for hole in my_holes:
                    merged = _bridge_hole(merged, hole)
                tris.extend(_ear_clip(merged))
            areas = np.array([abs(signed_ring_area(t)) for t in tris])
            if abs(areas.sum() - self.area) > 1e-9 * max(self.area, 1.0):
                raise ValueError("triangulation area mismatch; polygon malformed")
            keep = areas > 0
            self._triangles = np.array([t for t, k in zip(tris, keep) if k])
            self._tri_cum = np.cumsum(areas[keep])
        return self._triangles, self._tri_cum

    def uniform_points(self, stream: RandomStream, size: int) -> np.ndarray:
        tris, cum = self._triangulate()
        gen = stream.generator
        pick = np.searchsorted(cum, gen.random(size) * cum[-1], side="right")
        pick = np.minimum(pick, len(tris) - 1)
        t = tris[pick]
        r1 = np.sqrt(gen.random(size))
        r2 = gen.random(size)
        a, b, c = t[:, 0, :], t[:, 1, :], t[:, 2, :]
        return (1 - r1)[:, None] * a + (r1 * (1 - r2))[:, None] * b + \
               (r1 * r2)[:, None] * c

    def config(self) -> dict:
        return {"kind": "polygon",
                "outers": [r.tolist() for r in self.outers],
                "holes": [r.tolist() for r in self.holes]}


class Disk(Region):
    def __init__(self, center, radius: float):
        if not radius > 0:
            raise ValueError("disk radius must be positive")
        self.center = (float(center[0]), float(center[1]))
        self.radius = float(radius)
        self.area = math.pi * self.radius**2

    @property
    def bbox(self):
        cx, cy = self.center
        r = self.radius
        return (cx - r, cy - r, cx + r, cy + r)

    def diameter(self) -> float:
        return 2.0 * self.radius

    def contains(self, x, y):
        cx, cy = self.center
        return (np.asarray(x, float) - cx) ** 2 + (np.asarray(y, float) - cy) ** 2 \
            <= self.radius**2

    def segment_lengths(self, mx, my, ex, ey):
        cx, cy = self.center
        rx = np.asarray(mx, float) - cx
        ry = np.asarray(my, float) - cy
        a = ex * ex + ey * ey
        half = math.sqrt(a)
        if half == 0.0:
            return np.zeros_like(rx)
        b = rx * ex + ry * ey
        c = rx * rx + ry * ry - self.radius**2
        disc = b * b - a * c
        ok = disc > 0
        root = np.sqrt(np.where(ok, disc, 0.0))
        t_lo = np.maximum((-b - root) / a, -1.0)
        t_hi = np.minimum((-b + root) / a, 1.0)
        return np.where(ok, np.clip(t_hi - t_lo, 0.0, None) * half, 0.0)

    def uniform_points(self, stream: RandomStream, size: int) -> np.ndarray:
        gen = stream.generator
        r = self.radius * np.sqrt(gen.random(size))
        th = 2.0 * math.pi * gen.random(size)
        return np.column_stack([self.center[0] + r * np.cos(th),
                                self.center[1] + r * np.sin(th)])

    def cell_fraction(self, x0, y0, x1, y1) -> float:
        rect = np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]])
        area = disk_polygon_area(rect, self.center[0], self.center[1], self.radius)
        return min(max(area / ((x1 - x0) * (y1 - y0)), 0.0), 1.0)

    def cell_clip_points(self, x0, y0, x1, y1) -> np.ndarray:
        cx, cy = self.center
        r = self.radius
        corners = np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]])
        pts = [corners[self.contains(corners[:, 0], corners[:, 1])]]
        angles = []
        for (ex0, ey0, ex1, ey1) in ((x0, y0, x1, y0), (x1, y0, x1, y1),
                                     (x1, y1, x0, y1), (x0, y1, x0, y0)):
            a = np.array([ex0, ey0]) - (cx, cy)
            d = np.array([ex1 - ex0, ey1 - ey0])
            qa = d @ d
            qb = a @ d
            qc = a @ a - r * r
            disc = qb * qb - qa * qc
            if disc <= 0 or qa == 0:
                continue
            for t in ((-qb - math.sqrt(disc)) / qa, (-qb + math.sqrt(disc)) / qa):
                if 0.0 <= t <= 1.0:
                    p = a + t * d
                    angles.append(math.atan2(p[1], p[0]))
                    pts.append(np.array([[p[0] + cx, p[1] + cy]]))
        # sample the boundary arcs running inside the cell
        for lo_a, hi_a in _inside_arcs(sorted(angles)):
            th = np.linspace(lo_a, hi_a, 6)
            arc = np.column_stack([cx + r * np.cos(th), cy + r * np.sin(th)])
            keep = (arc[:, 0] >= x0 - _EPS) & (arc[:, 0] <= x1 + _EPS) & \
                   (arc[:, 1] >= y0 - _EPS) & (arc[:, 1] <= y1 + _EPS)
            pts.append(arc[keep])
        out = np.vstack([p for p in pts if len(p)]) if pts else np.empty((0, 2))
        return out

    def boundary_points(self, count: int = 2048) -> np.ndarray:
        th = np.linspace(0.0, 2.0 * math.pi, count, endpoint=False)
        return np.column_stack([self.center[0] + self.radius * np.cos(th),
                                self.center[1] + self.radius * np.sin(th)])

    def hull_points(self) -> np.ndarray:
        return self.boundary_points()

    def config(self) -> dict:
        return {"kind": "disk", "center": list(self.center), "radius": self.radius}


def _inside_arcs(angles):
    """Candidate arc intervals between consecutive crossing angles."""
    if not angles:
        return [(0.0, 2.0 * math.pi)]
    out = []
    for i in range(len(angles)):
        lo = angles[i]
        hi = angles[(i + 1) % len(angles)]
        if hi <= lo:
            hi += 2.0 * math.pi
        out.append((lo, hi))
    return out


class Ellipse(Region):
    def __init__(self, center, semi_x: float, semi_y: float, angle: float = 0.0):
        if not (semi_x > 0 and semi_y > 0):
            raise ValueError("ellipse semi-axes must be positive")
        self.center = (float(center[0]), float(center[1]))
        self.semi_x = float(semi_x)
        self.semi_y = float(semi_y)
        self.angle = float(angle)
        self.area = math.pi * self.semi_x * self.semi_y

    def _to_unit(self, x, y):
        """Map physical coordinates to the unit-disk frame."""
        ca, sa = math.cos(self.angle), math.sin(self.angle)
        dx = np.asarray(x, float) - self.center[0]
        dy = np.asarray(y, float) - self.center[1]
        ux = (ca * dx + sa * dy) / self.semi_x
        uy = (-sa * dx + ca * dy) / self.semi_y
        return ux, uy

    def _from_unit(self, ux, uy):
        ca, sa = math.cos(self.angle), math.sin(self.angle)
        px = ux * self.semi_x
        py = uy * self.semi_y
        return (self.center[0] + ca * px - sa * py,
                self.center[1] + sa * px + ca * py)

    @property
    def bbox(self):
        ca, sa = math.cos(self.angle), math.sin(self.angle)
        hx = math.hypot(self.semi_x * ca, self.semi_y * sa)
        hy = math.hypot(self.semi_x * sa, self.semi_y * ca)
        cx, cy = self.center
        return (cx - hx, cy - hy, cx + hx, cy + hy)

    def diameter(self) -> float:
        return 2.0 * max(self.semi_x, self.semi_y)

    def contains(self, x, y):
        ux, uy = self._to_unit(x, y)
        return ux * ux + uy * uy <= 1.0

    def segment_lengths(self, mx, my, ex, ey):
        ux, uy = self._to_unit(mx, my)
        ca, sa = math.cos(self.angle), math.sin(self.angle)
        vex = (ca * ex + sa * ey) / self.semi_x
        vey = (-sa * ex + ca * ey) / self.semi_y
        half = math.hypot(ex, ey)
        a = vex * vex + vey * vey
        if a == 0.0 or half == 0.0:
            return np.zeros_like(np.asarray(mx, float))
        b = ux * vex + uy * vey
        c = ux * ux + uy * uy - 1.0
        disc = b * b - a * c
        ok = disc > 0
        root = np.sqrt(np.where(ok, disc, 0.0))
        t_lo = np.maximum((-b - root) / a, -1.0)
        t_hi = np.minimum((-b + root) / a, 1.0)
        return np.where(ok, np.clip(t_hi - t_lo, 0.0, None) * half, 0.0)

    def uniform_points(self, stream: RandomStream, size: int) -> np.ndarray:
        gen = stream.generator
        r = np.sqrt(gen.random(size))
        th = 2.0 * math.pi * gen.random(size)
        x, y = self._from_unit(r * np.cos(th), r * np.sin(th))
        return np.column_stack([x, y])

    def _unit_polygon(self, rect_pts):
        ux, uy = self._to_unit(rect_pts[:, 0], rect_pts[:, 1])
        return np.column_stack([ux, uy])

    def cell_fraction(self, x0, y0, x1, y1) -> float:
        rect = np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]])
        quad = self._unit_polygon(rect)
        area = disk_polygon_area(quad, 0.0, 0.0, 1.0) * self.semi_x * self.semi_y
        return min(max(area / ((x1 - x0) * (y1 - y0)), 0.0), 1.0)

    def cell_clip_points(self, x0, y0, x1, y1) -> np.ndarray:
        corners = np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]])
        pts = [corners[self.contains(corners[:, 0], corners[:, 1])]]
        quad = self._unit_polygon(corners)
        angles = []
        for i in range(4):
            a = quad[i]
            d = quad[(i + 1) % 4] - a
            qa = d @ d
            qb = a @ d
            qc = a @ a - 1.0
            disc = qb * qb - qa * qc
            if disc <= 0 or qa == 0:
                continue
            for t in ((-qb - math.sqrt(disc)) / qa, (-qb + math.sqrt(disc)) / qa):
                if 0.0 <= t <= 1.0:
                    p = a + t * d
                    angles.append(math.atan2(p[1], p[0]))
                    x, y = self._from_unit(p[0], p[1])
                    pts.append(np.array([[x, y]]))
        for lo_a, hi_a in _inside_arcs(sorted(angles)):
            th = np.linspace(lo_a, hi_a, 6)
            x, y = self._from_unit(np.cos(th), np.sin(th))
            keep = (x >= x0 - _EPS) & (x <= x1 + _EPS) & \
                   (y >= y0 - _EPS) & (y <= y1 + _EPS)
            pts.append(np.column_stack([x, y])[keep])
        return np.vstack([p for p in pts if len(p)]) if pts else np.empty((0, 2))

    def boundary_points(self, count: int = 2048) -> np.ndarray:
        th = np.linspace(0.0, 2.0 * math.pi, count, endpoint=False)
        x, y = self._from_unit(np.cos(th), np.sin(th))
        return np.column_stack([x, y])

    def hull_points(self) -> np.ndarray:
        return self.boundary_points()

    def config(self) -> dict:
        return {"kind": "ellipse", "center": list(self.center),
                "semi_x": self.semi_x, "semi_y": self.semi_y, "angle": self.angle}


class DisjointUnion(Region):
    """A union of pairwise-disjoint member regions; areas and lengths add."""

    def __init__(self, members: Sequence[Region], validate: bool = True):
        if not members:
            raise ValueError("union needs at least one member")
        self.members = list(members)
        self.area = float(sum(m.area for m in self.members))
        if validate and len(self.members) > 1:
            self._check_disjoint()

    def _check_disjoint(self):
        boxes = [m.bbox for m in self.members]
        overlapping = []
        for i in range(len(boxes)):
            for j in range(i + 1, len(boxes)):
                a, b = boxes[i], boxes[j]
                if a[0] <= b[2] and b[0] <= a[2] and a[1] <= b[3] and b[1] <= a[3]:
                    overlapping.append((i, j))
        if not overlapping:
            return
        from .rasterize import coverage_count  # deferred: rasterize imports geometry
        for i, j in overlapping:
            if coverage_count(self.members[i], self.members[j], resolution=256):
                raise ValueError(f"union members {i} and {j} overlap")

    @property
    def bbox(self):
        boxes = np.array([m.bbox for m in self.members])
        return (float(boxes[:, 0].min()), float(boxes[:, 1].min()),
                float(boxes[:, 2].max()), float(boxes[:, 3].max()))

    def diameter(self) -> float:
        if len(self.members) == 1:
            return self.members[0].diameter()
        return hull_diameter(np.vstack([m.hull_points() for m in self.members]))

    def hull_points(self) -> np.ndarray:
        return np.vstack([m.hull_points() for m in self.members])

    def contains(self, x, y):
        out = np.zeros(np.broadcast(np.asarray(x), np.asarray(y)).shape, dtype=bool)
        for m in self.members:
            out |= np.asarray(m.contains(x, y))
        return out

    def segment_lengths(self, mx, my, ex, ey):
        total = np.zeros(np.asarray(mx, float).shape)
        for m in self.members:
            total = total + m.segment_lengths(mx, my, ex, ey)
        return total

    def uniform_points(self, stream: RandomStream, size: int) -> np.ndarray:
        weights = np.array([m.area for m in self.members])
        cum = np.cumsum(weights)
        pick = np.searchsorted(cum, stream.child(0).uniform(size) * cum[-1],
                               side="right")
        pick = np.minimum(pick, len(self.members) - 1)
        out = np.empty((size, 2))
        for k, m in enumerate(self.members):
            mask = pick == k
            cnt = int(mask.sum())
            if cnt:
                out[mask] = m.uniform_points(stream.child(1 + k), cnt)
        return out

    def cell_fraction(self, x0, y0, x1, y1) -> float:
        return min(sum(m.cell_fraction(x0, y0, x1, y1) for m in self.members), 1.0)

    def cell_clip_points(self, x0, y0, x1, y1) -> np.ndarray:
        parts = [m.cell_clip_points(x0, y0, x1, y1) for m in self.members]
        parts = [p for p in parts if len(p)]
        return np.vstack(parts) if parts else np.empty((0, 2))

    def config(self) -> dict:
        return {"kind": "union", "members": [m.config() for m in self.members]}


def rect(x0: float, y0: float, x1: float, y1: float) -> PolygonalRegion:
    """Axis-aligned rectangular region."""
    return PolygonalRegion([[x0, y0], [x1, y0], [x1, y1], [x0, y1]])


def unit_square() -> PolygonalRegion:
    return rect(0.0, 0.0, 1.0, 1.0)


def as_rectangle(region: Region) -> tuple[float, float, float, float] | None:
    """Return the bbox if the region is exactly an axis-aligned rectangle."""
    if isinstance(region, PolygonalRegion) and not region.holes and \
            len(region.outers) == 1 and len(region.outers[0]) == 4:
        x0, y0, x1, y1 = region.bbox
        expected = {(x0, y0), (x1, y0), (x1, y1), (x0, y1)}
        actual = {(float(p[0]), float(p[1])) for p in region.outers[0]}
        if expected == actual:
            return (x0, y0, x1, y1)
    return None


# ---------------------------------------------------------------------------
# spec-level convenience operations
# ---------------------------------------------------------------------------

def area(region: Region) -> float:
    return region.area


def diameter(region: Region) -> float:
    return region.diameter()


def contains(region: Region, p) -> bool:
    return region.contains_point(p)


def uniform_point(region: Region, stream: RandomStream) -> Point:
    if region.area <= 0.0:
        raise ValueError("cannot sample a zero-area region")
    pt = region.uniform_points(stream, 1)[0]
    return Point(float(pt[0]), float(pt[1]))


def intersection_length(segment: Segment, region: Region) -> float:
    ex, ey = segment.half_vector
    out = region.segment_lengths(np.array([segment.midpoint.x]),
                                 np.array([segment.midpoint.y]), ex, ey)
    return float(np.asarray(out)[0])


def rigid_transform_region(region: Region, angle: float, dx: float, dy: float) -> Region:
    """Rotate about the origin then translate (used by invariance checks)."""
    ca, sa = math.cos(angle), math.sin(angle)

    def rot(pts):
        pts = np.asarray(pts, float)
        return np.column_stack([ca * pts[:, 0] - sa * pts[:, 1] + dx,
                                sa * pts[:, 0] + ca * pts[:, 1] + dy])

    if isinstance(region, PolygonalRegion):
        return PolygonalRegion([rot(r) for r in region.outers],
                               [rot(r) for r in region.holes])
    if isinstance(region, Disk):
        c = rot(np.array([region.center]))[0]
        return Disk(c, region.radius)
    if isinstance(region, Ellipse):
        c = rot(np.array([region.center]))[0]
        return Ellipse(c, region.semi_x, region.semi_y, region.angle + angle)
    if isinstance(region, DisjointUnion):
        return DisjointUnion([rigid_transform_region(m, angle, dx, dy)
                              for m in region.members], validate=False)
    raise TypeError(f"unsupported region type {type(region)!r}")


def rigid_transform_segment(seg: Segment, angle: float, dx: float, dy: float) -> Segment:
    ca, sa = math.cos(angle), math.sin(angle)
    mx, my = seg.midpoint
    return Segment(Point(ca * mx - sa * my + dx, sa * mx + ca * my + dy),
                   seg.length, seg.angle + angle)

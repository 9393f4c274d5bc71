"""Partitioning a region into connected, compact strata on a raster.

Two constructions are provided: exact rectangular grids (for congruent-cell
designs) and an equal-area compact clustering (balanced k-means on raster
cells with connectivity repair).  Both yield the same `Stratification`
structure: an assignment of raster cells to strata plus areas, centroids,
adjacency, a sequential ordering and shape diagnostics.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .geometry import Region, as_rectangle, hull_diameter, max_pair_distance
from .randomness import RandomStream
from .rasterize import Grid, Raster, rasterize, rasterize_on_grid, _fractions_on_grid


class StratificationError(RuntimeError):
    """Raised when a feasible partition could not be reached.

    The best partition found so far (possibly violating connectivity or
    balance) is attached as `best`.
    """

    def __init__(self, message: str, best: "Stratification | None" = None):
        super().__init__(message)
        self.best = best


@dataclass
class Diagnostics:
    max_diameter: float                 # largest stratum diameter
    max_consecutive_span: float         # largest point distance between
    #                                     consecutively indexed strata
    area_min: float
    area_max: float
    n_times_diameter_sq: float
    n_times_area_min: float
    n_times_span_sq: float
    boundary_stratum_count: int | None = None

    def to_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items()}


class Stratification:
    """A partition of the rasterized region into n cell-set strata."""

    def __init__(self, raster: Raster, assignment: np.ndarray, n: int,
                 order: np.ndarray | None = None,
                 objective_history: list[float] | None = None):
        self.raster = raster
        self.assignment = np.asarray(assignment, dtype=np.int64)
        if self.assignment.shape != raster.frac.shape:
            raise ValueError("assignment shape must match the raster")
        self.n = int(n)
        self.order = (np.arange(self.n) if order is None
                      else np.asarray(order, dtype=np.int64))
        self.objective_history = objective_history or []
        self._clouds: list[np.ndarray] | None = None

        g = raster.grid
        w = np.where(self.assignment >= 0, raster.frac, 0.0)
        flat_assign = self.assignment.ravel()
        flat_w = w.ravel()
        sel = flat_assign >= 0
        self.areas = np.bincount(flat_assign[sel], weights=flat_w[sel],
                                 minlength=self.n) * g.cell_area
        if np.any(self.areas <= 0.0):
            raise ValueError("every stratum must have positive area")
        cx, cy = g.centers()
        xs, ys = np.meshgrid(cx, cy)
        sx = np.bincount(flat_assign[sel], weights=(flat_w * xs.ravel())[sel],
                         minlength=self.n)
        sy = np.bincount(flat_assign[sel], weights=(flat_w * ys.ravel())[sel],
                         minlength=self.n)
        tot = np.bincount(flat_assign[sel], weights=flat_w[sel], minlength=self.n)
        self.centroids = np.column_stack([sx / tot, sy / tot])

    # -- structure ---------------------------------------------------------

    @property
    def region(self) -> Region:
        return self.raster.region

    @property
    def total_area(self) -> float:
        return float(self.areas.sum())

    def stratum_cells(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        iy, ix = np.nonzero(self.assignment == i)
        return iy, ix

    def adjacency(self) -> list[set[int]]:
        a = self.assignment
        nbrs: list[set[int]] = [set() for _ in range(self.n)]
        for sa, sb in ((a[:, :-1], a[:, 1:]), (a[:-1, :], a[1:, :])):
            diff = (sa != sb) & (sa >= 0) & (sb >= 0)
            for u, v in zip(sa[diff].ravel(), sb[diff].ravel()):
                nbrs[u].add(int(v))
                nbrs[v].add(int(u))
        return nbrs

    def point_clouds(self) -> list[np.ndarray]:
        """Extreme-point candidates per stratum (cell corners, clipped pts)."""
        if self._clouds is not None:
            return self._clouds
        g = self.raster.grid
        a = self.assignment
        # perimeter cells: any 4-neighbor missing or differently assigned
        same = np.ones(a.shape, dtype=bool)
        pad = np.pad(a, 1, constant_values=-2)
        for dy, dx in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            same &= pad[1 + dy:pad.shape[0] - 1 + dy,
                        1 + dx:pad.shape[1] - 1 + dx] == a
        perim = (~same) & (a >= 0)
        clouds: list[list[np.ndarray]] = [[] for _ in range(self.n)]
        frac = self.raster.frac
        bpts = self.raster.boundary_points
        for iy, ix in zip(*np.nonzero(perim)):
            s = int(a[iy, ix])
            if frac[iy, ix] < 1.0 and (int(iy), int(ix)) in bpts:
                clouds[s].append(bpts[(int(iy), int(ix))])
            else:
                x0, y0, x1, y1 = g.cell_bounds(int(ix), int(iy))
                clouds[s].append(np.array([[x0, y0], [x1, y0],
                                           [x1, y1], [x0, y1]]))
        self._clouds = [np.vstack(c) if c else np.empty((0, 2)) for c in clouds]
        return self._clouds

    def is_equal_area(self, tol: float = 0.01) -> bool:
        mean = self.areas.mean()
        return bool(np.max(np.abs(self.areas - mean)) <= tol * mean)

    # -- sampling ----------------------------------------------------------

    def sample_stratum(self, i: int, stream: RandomStream, size: int) -> np.ndarray:
        """Uniform points on stratum i (cell choice + in-cell rejection)."""
        iy, ix = self.stratum_cells(i)
        if len(iy) == 0:
            raise ValueError(f"stratum {i} is empty")
        g = self.raster.grid
        w = self.raster.frac[iy, ix]
        gen = stream.generator
        cum = np.cumsum(w)
        pick = np.searchsorted(cum, gen.random(size) * cum[-1], side="right")
        pick = np.minimum(pick, len(w) - 1)
        px = g.x0 + (ix[pick] + gen.random(size)) * g.sx
        py = g.y0 + (iy[pick] + gen.random(size)) * g.sy
        partial = w[pick] < 1.0
        if np.any(partial):
            region = self.region
            bad = np.nonzero(partial & ~np.asarray(region.contains(px, py)))[0]
            guard = 0
            while bad.size:
                guard += 1
                if guard > 10000:
                    raise RuntimeError("stratum rejection sampling stalled")
                px[bad] = g.x0 + (ix[pick[bad]] + gen.random(bad.size)) * g.sx
                py[bad] = g.y0 + (iy[pick[bad]] + gen.random(bad.size)) * g.sy
                bad = bad[~np.asarray(region.contains(px[bad], py[bad]))]
        return np.column_stack([px, py])

    # -- serialization -----------------------------------------------------

    def to_json_dict(self) -> dict:
        g = self.raster.grid
        frac = self.raster.frac.ravel()
        partial = np.nonzero((frac > 0.0) & (frac < 1.0))[0]
        return {
            "schema_version": 1,
            "region": self.region.config(),
            "grid": {"x0": g.x0, "y0": g.y0, "sx": g.sx, "sy": g.sy,
                     "nx": g.nx, "ny": g.ny},
            "n": self.n,
            "assignment": self.assignment.ravel().tolist(),
            "partial_cells": partial.tolist(),
            "partial_fractions": frac[partial].tolist(),
            "order": self.order.tolist(),
            "objective_history": list(self.objective_history),
        }

    @classmethod
    def from_json_dict(cls, payload: dict) -> "Stratification":
        from .regionio import region_from_config
        region = region_from_config(payload["region"])
        gd = payload["grid"]
        grid = Grid(gd["x0"], gd["y0"], gd["sx"], gd["sy"],
                    int(gd["nx"]), int(gd["ny"]))
        assignment = np.array(payload["assignment"],
                              dtype=np.int64).reshape(grid.ny, grid.nx)
        frac = (assignment >= 0).astype(float)
        idx = np.array(payload["partial_cells"], dtype=np.int64)
        if idx.size:
            frac.ravel()[idx] = np.array(payload["partial_fractions"])
        boundary_points = {}
        for flat in idx:
            iy, ix = divmod(int(flat), grid.nx)
            pts = region.cell_clip_points(*grid.cell_bounds(ix, iy))
            if len(pts):
                boundary_points[(iy, ix)] = pts
        raster = Raster(grid, frac, region, boundary_points)
        return cls(raster, assignment, int(payload["n"]),
                   order=np.array(payload["order"], dtype=np.int64),
                   objective_history=list(payload.get("objective_history", [])))

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, sort_keys=True)

    @classmethod
    def load(cls, path) -> "Stratification":
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))


# ---------------------------------------------------------------------------
# grid partitions
# ---------------------------------------------------------------------------

def grid_partition(region: Region, k_per_side: int,
                   k_y: int | None = None) -> Stratification:
    """Partition an axis-aligned rectangle into congruent grid cells.

    Cell (ix, iy) becomes stratum iy*kx + ix; the ordering is serpentine by
    rows so consecutive strata always share a side.
    """
    bounds = as_rectangle(region)
    if bounds is None:
        raise ValueError("grid_partition requires an axis-aligned rectangle")
    kx = int(k_per_side)
    ky = int(k_y) if k_y is not None else kx
    if kx < 1 or ky < 1:
        raise ValueError("cell counts must be >= 1")
    x0, y0, x1, y1 = bounds
    grid = Grid(x0, y0, (x1 - x0) / kx, (y1 - y0) / ky, kx, ky)
    frac = np.ones((ky, kx))
    raster = Raster(grid, frac, region)
    assignment = np.arange(kx * ky, dtype=np.int64).reshape(ky, kx)
    order = []
    for iy in range(ky):
        row = list(range(iy * kx, (iy + 1) * kx))
        order.extend(row if iy % 2 == 0 else row[::-1])
    return Stratification(raster, assignment, kx * ky,
                          order=np.array(order, dtype=np.int64))


# ---------------------------------------------------------------------------
# equal-area compact clustering
# ---------------------------------------------------------------------------

class _CellGraph:
    """Compact view of inside cells: coordinates, weights, 4-neighbors."""

    def __init__(self, raster: Raster):
        self.grid = raster.grid
        iy, ix = np.nonzero(raster.frac > 0.0)
        self.iy = iy
        self.ix = ix
        self.w = raster.frac[iy, ix].copy()
        g = raster.grid
        self.x = g.x0 + (ix + 0.5) * g.sx
        self.y = g.y0 + (iy + 0.5) * g.sy
        self.count = len(iy)
        lut = -np.ones(raster.frac.shape, dtype=np.int64)
        lut[iy, ix] = np.arange(self.count)
        self._lut = lut
        nbrs = np.full((self.count, 4), -1, dtype=np.int64)
        for k, (dy, dx) in enumerate(((1, 0), (-1, 0), (0, 1), (0, -1))):
            ny, nx = iy + dy, ix + dx
            ok = (ny >= 0) & (ny < raster.frac.shape[0]) & \
                 (nx >= 0) & (nx < raster.frac.shape[1])
            vals = np.full(self.count, -1, dtype=np.int64)
            vals[ok] = lut[ny[ok], nx[ok]]
            nbrs[:, k] = vals
        self.nbrs = nbrs
        # clockwise 8-ring starting NW, for O(1) local articulation tests
        ring8 = np.full((self.count, 8), -1, dtype=np.int64)
        ring_offsets = ((-1, -1), (-1, 0), (-1, 1), (0, 1),
                        (1, 1), (1, 0), (1, -1), (0, -1))
        for k, (dy, dx) in enumerate(ring_offsets):
            ny, nx = iy + dy, ix + dx
            ok = (ny >= 0) & (ny < raster.frac.shape[0]) & \
                 (nx >= 0) & (nx < raster.frac.shape[1])
            vals = np.full(self.count, -1, dtype=np.int64)
            vals[ok] = lut[ny[ok], nx[ok]]
            ring8[:, k] = vals
        self.ring8 = ring8

    def coords(self) -> np.ndarray:
        return np.column_stack([self.x, self.y])


def _local_removal_safe(graph, labels, c: int) -> bool:
    """Cheap sufficient test that removing cell c keeps its stratum connected.

    The same-stratum cells in the 8-ring around c must form one contiguous
    run.  Conservative: may reject some safe removals.
    """
    s = labels[c]
    cells = graph.ring8[c]
    ring = [cells[k] >= 0 and labels[cells[k]] == s for k in range(8)]
    deg = ring[1] + ring[3] + ring[5] + ring[7]
    if deg <= 1:
        return True
    if deg == 4:
        return False
    transitions = sum(1 for i in range(8) if ring[i] and not ring[(i + 1) % 8])
    return transitions <= 1


def _bfs_component(start: int, members: np.ndarray, graph: _CellGraph,
                   exclude: int = -1) -> set[int]:
    member_set = set(int(m) for m in members if m != exclude)
    seen = {start}
    queue = [start]
    while queue:
        cur = queue.pop()
        for nb in graph.nbrs[cur]:
            nb = int(nb)
            if nb >= 0 and nb in member_set and nb not in seen:
                seen.add(nb)
                queue.append(nb)
    return seen


def _components(cells: np.ndarray, graph: _CellGraph) -> list[set[int]]:
    remaining = set(int(c) for c in cells)
    comps = []
    while remaining:
        start = min(remaining)
        comp = _bfs_component(start, np.fromiter(remaining, dtype=np.int64), graph)
        comps.append(comp)
        remaining -= comp
    return comps


def _objective(graph: _CellGraph, labels: np.ndarray,
               centroids: np.ndarray) -> float:
    d2 = (graph.x - centroids[labels, 0]) ** 2 + \
         (graph.y - centroids[labels, 1]) ** 2
    return float(np.sum(graph.w * d2) / np.sum(graph.w))


def _recentroid(graph: _CellGraph, labels: np.ndarray, n: int) -> np.ndarray:
    w = graph.w
    tot = np.bincount(labels, weights=w, minlength=n)
    cx = np.bincount(labels, weights=w * graph.x, minlength=n)
    cy = np.bincount(labels, weights=w * graph.y, minlength=n)
    tot = np.where(tot > 0, tot, 1.0)
    return np.column_stack([cx / tot, cy / tot])


def _kmeanspp_init(graph: _CellGraph, n: int, stream: RandomStream) -> np.ndarray:
    gen = stream.generator
    pts = graph.coords()
    w = graph.w / graph.w.sum()
    first = int(np.searchsorted(np.cumsum(w), gen.random()))
    chosen = [min(first, graph.count - 1)]
    d2 = np.full(graph.count, np.inf)
    for _ in range(1, n):
        last = pts[chosen[-1]]
        d2 = np.minimum(d2, (pts[:, 0] - last[0]) ** 2 + (pts[:, 1] - last[1]) ** 2)
        probs = graph.w * d2
        total = probs.sum()
        if total <= 0:
            nxt = int(gen.integers(graph.count))
        else:
            nxt = int(np.searchsorted(np.cumsum(probs / total), gen.random()))
        chosen.append(min(nxt, graph.count - 1))
    return pts[chosen].copy()


def _lloyd_warmstart(graph: _CellGraph, centroids: np.ndarray, n: int,
                     rounds: int = 15) -> np.ndarray:
    """Unconstrained k-means rounds; compact seeds for the balanced fill."""
    pts = graph.coords()
    for _ in range(rounds):
        d2 = ((pts[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        labels = np.argmin(d2, axis=1)
        new = _recentroid(graph, labels, n)
        empty = np.bincount(labels, minlength=n) == 0
        new[empty] = centroids[empty]
        if np.allclose(new, centroids):
            break
        centroids = new
    return centroids


def _neighbor_labels(graph: _CellGraph, labels: np.ndarray) -> np.ndarray:
    nl = np.where(graph.nbrs >= 0, labels[np.clip(graph.nbrs, 0, None)], -9)
    return nl


def _boundary_cells(graph: _CellGraph, labels: np.ndarray) -> np.ndarray:
    nl = _neighbor_labels(graph, labels)
    mask = np.any((nl >= 0) & (nl != labels[:, None]), axis=1)
    return np.nonzero(mask)[0]


def _balanced_fill(graph: _CellGraph, centroids: np.ndarray, n: int,
                   target: float) -> np.ndarray:
    """Balanced region growing: strata grow from seed cells by claiming the
    nearest frontier cell, always extending the least-loaded stratum.

    Produces connected strata with loads within about one cell of the
    target; distance-sorted frontiers keep them compact.
    """
    import heapq

    if n == 1:
        return np.zeros(graph.count, dtype=np.int64)
    pts = graph.coords()
    labels = np.full(graph.count, -1, dtype=np.int64)
    load = np.zeros(n)
    frontiers: list[list] = [[] for _ in range(n)]
    counter = 0
    for s in range(n):
        d2 = (pts[:, 0] - centroids[s, 0]) ** 2 + \
             (pts[:, 1] - centroids[s, 1]) ** 2
        d2[labels >= 0] = np.inf
        seed = int(np.argmin(d2))
        labels[seed] = s
        load[s] += graph.w[seed]
        for nb in graph.nbrs[seed]:
            if nb >= 0 and labels[nb] < 0:
                dist = (pts[nb, 0] - centroids[s, 0]) ** 2 + \
                       (pts[nb, 1] - centroids[s, 1]) ** 2
                heapq.heappush(frontiers[s], (dist, counter, int(nb)))
                counter += 1
    active = set(range(n))
    claimed = n
    while claimed < graph.count and active:
        s = min(active, key=lambda t: (load[t], t))
        grew = False
        while frontiers[s]:
            _, _, c = heapq.heappop(frontiers[s])
            if labels[c] >= 0:
                continue
            labels[c] = s
            load[s] += graph.w[c]
            claimed += 1
            for nb in graph.nbrs[c]:
                if nb >= 0 and labels[nb] < 0:
                    dist = (pts[nb, 0] - centroids[s, 0]) ** 2 + \
                           (pts[nb, 1] - centroids[s, 1]) ** 2
                    heapq.heappush(frontiers[s], (dist, counter, int(nb)))
                    counter += 1
            grew = True
            break
        if not grew:
            active.discard(s)
    # cells unreachable from every seed (should not happen on connected
    # regions): attach to an adjacent stratum, else to stratum 0
    if claimed < graph.count:
        for c in np.nonzero(labels < 0)[0]:
            nb_labels = [int(labels[v]) for v in graph.nbrs[c]
                         if v >= 0 and labels[v] >= 0]
            labels[c] = min(nb_labels) if nb_labels else 0
    return labels


def _repair_connectivity(graph: _CellGraph, labels: np.ndarray, n: int) -> bool:
    """Reassign orphaned components to the best adjacent stratum."""
    changed = True
    passes = 0
    while changed and passes < 8:
        changed = False
        passes += 1
        for s in range(n):
            cells = np.nonzero(labels == s)[0]
            if len(cells) == 0:
                return False
            comps = _components(cells, graph)
            if len(comps) <= 1:
                continue
            comps.sort(key=lambda comp: -sum(graph.w[list(comp)]))
            for orphan in comps[1:]:
                contact = {}
                for c in orphan:
                    for nb in graph.nbrs[c]:
                        nb = int(nb)
                        if nb >= 0 and int(labels[nb]) != s:
                            t = int(labels[nb])
                            contact[t] = contact.get(t, 0) + 1
                if not contact:
                    return False
                best = sorted(contact.items(), key=lambda kv: (-kv[1], kv[0]))[0][0]
                for c in orphan:
                    labels[c] = best
                changed = True
    for s in range(n):
        cells = np.nonzero(labels == s)[0]
        if len(cells) == 0 or len(_components(cells, graph)) > 1:
            return False
    return True


def _stratum_adjacency(graph: _CellGraph, labels: np.ndarray,
                       n: int) -> list[set[int]]:
    nl = _neighbor_labels(graph, labels)
    own = labels[:, None]
    mask = (nl >= 0) & (nl != own)
    adj: list[set[int]] = [set() for _ in range(n)]
    a = np.repeat(labels, 4)[mask.ravel()]
    b = nl[mask]
    for u, v in zip(a, b):
        adj[int(u)].add(int(v))
    return adj


def _balance_ok(load: np.ndarray, slack: float = 1.0) -> bool:
    return bool(load.max() - load.min() <= slack + 1e-9)


def _move_cells(graph: _CellGraph, labels: np.ndarray, donor: int,
                receiver: int, centroids: np.ndarray, count: int) -> float:
    """Move up to `count` donor cells bordering the receiver (closest to the
    receiver centroid first, connectivity-safe).  Returns moved weight."""
    moved = 0.0
    for _ in range(count):
        dc = np.nonzero(labels == donor)[0]
        if dc.size == 0:
            break
        nb = graph.nbrs[dc]
        touches = np.any((nb >= 0) & (labels[np.clip(nb, 0, None)] == receiver),
                         axis=1)
        cand = dc[touches]
        if cand.size == 0:
            break
        d2r = (graph.x[cand] - centroids[receiver, 0]) ** 2 + \
              (graph.y[cand] - centroids[receiver, 1]) ** 2
        best = -1
        for k in np.argsort(d2r, kind="stable"):
            c = int(cand[k])
            if _local_removal_safe(graph, labels, c):
                best = c
                break
        if best < 0:
            break
        labels[best] = receiver
        moved += float(graph.w[best])
    return moved


def _rebalance(graph: _CellGraph, labels: np.ndarray, n: int, target: float,
               centroids: np.ndarray, slack: float = 1.0) -> bool:
    """Shift cell blocks along stratum-adjacency paths until the largest and
    smallest stratum loads differ by at most one full cell of weight."""
    load = np.bincount(labels, weights=graph.w, minlength=n)
    stall = 0
    for _ in range(16 * n + 64):
        if _balance_ok(load, slack):
            return True
        over = int(np.argmax(load))
        under = int(np.argmin(load))
        adj = _stratum_adjacency(graph, labels, n)
        prev = {over: None}
        queue = [over]
        while queue and under not in prev:
            cur = queue.pop(0)
            for t in sorted(adj[cur]):
                if t not in prev:
                    prev[t] = cur
                    queue.append(t)
        if under not in prev:
            return False
        path = []
        cur = under
        while prev[cur] is not None:
            path.append((prev[cur], cur))
            cur = prev[cur]
        block = max(1, int((load[over] - load[under]) / 2))
        shifted = 0.0
        for donor, receiver in reversed(path):
            moved = _move_cells(graph, labels, donor, receiver, centroids,
                                block)
            if moved == 0.0:
                break
            load[donor] -= moved
            load[receiver] += moved
            shifted += moved
        if shifted == 0.0:
            stall += 1
            if stall > n:
                return False
        else:
            stall = 0
    return _balance_ok(load, slack)


def _improvement_pass(graph: _CellGraph, labels: np.ndarray, n: int,
                      centroids: np.ndarray, slack: float = 1.0) -> int:
    """Boundary transfers and swaps that lower the mean squared distance
    while preserving balance (max-min within slack) and connectivity."""
    load = np.bincount(labels, weights=graph.w, minlength=n)
    moved = 0
    boundary = _boundary_cells(graph, labels)
    if boundary.size == 0:
        return 0
    bx = graph.x[boundary]
    by = graph.y[boundary]
    own = labels[boundary]
    d2_own = (bx - centroids[own, 0]) ** 2 + (by - centroids[own, 1]) ** 2
    nl = _neighbor_labels(graph, labels)[boundary]
    d2_nbr = (bx[:, None] - centroids[np.clip(nl, 0, None), 0]) ** 2 + \
             (by[:, None] - centroids[np.clip(nl, 0, None), 1]) ** 2
    valid = (nl >= 0) & (nl != own[:, None])
    gain = np.where(valid, d2_nbr - d2_own[:, None], np.inf)
    has_gain = np.any(gain < -1e-12, axis=1)

    def bracket(s, t, new_s, new_t):
        """Max and min load if strata s, t move to new_s, new_t."""
        hi = lo = None
        for i, v in enumerate(load):
            v = new_s if i == s else new_t if i == t else v
            hi = v if hi is None or v > hi else hi
            lo = v if lo is None or v < lo else lo
        return hi, lo

    for k in np.nonzero(has_gain)[0]:
        c = int(boundary[k])
        s = int(labels[c])
        if labels[c] != own[k]:
            continue  # invalidated by an earlier move this pass
        order = np.argsort(gain[k], kind="stable")
        for col in order:
            if not valid[k, col] or gain[k, col] >= -1e-12:
                break
            t = int(nl[k, col])
            if labels[c] != s or t == s:
                break
            w = graph.w[c]
            new_s = load[s] - w
            new_t = load[t] + w
            hi, lo = bracket(s, t, new_s, new_t)
            if hi - lo > slack + 1e-9:
                continue
            if _local_removal_safe(graph, labels, c):
                labels[c] = t
                load[s] = new_s
                load[t] = new_t
                moved += 1
    # balance-neutral swaps across borders (vectorized gain prefilter)
    boundary = _boundary_cells(graph, labels)
    if boundary.size:
        own = labels[boundary]
        bx = graph.x[boundary]
        by = graph.y[boundary]
        bw = graph.w[boundary]
        nbr = graph.nbrs[boundary]
        nl = np.where(nbr >= 0, labels[np.clip(nbr, 0, None)], -9)
        valid = (nl >= 0) & (nl != own[:, None])
        tc = np.clip(nl, 0, None)
        xn = graph.x[np.clip(nbr, 0, None)]
        yn = graph.y[np.clip(nbr, 0, None)]
        wn = graph.w[np.clip(nbr, 0, None)]
        d2cs = (bx - centroids[own, 0]) ** 2 + (by - centroids[own, 1]) ** 2
        d2ct = (bx[:, None] - centroids[tc, 0]) ** 2 + \
               (by[:, None] - centroids[tc, 1]) ** 2
        d2ns = (xn - centroids[own, 0][:, None]) ** 2 + \
               (yn - centroids[own, 1][:, None]) ** 2
        d2nt = (xn - centroids[tc, 0]) ** 2 + (yn - centroids[tc, 1]) ** 2
        sgain = bw[:, None] * (d2ct - d2cs[:, None]) + wn * (d2ns - d2nt)
        sgain = np.where(valid, sgain, np.inf)
        for k, col in zip(*np.nonzero(sgain < -1e-12)):
            c = int(boundary[k])
            nb = int(nbr[k, col])
            s = int(own[k])
            t = int(nl[k, col])
            if labels[c] != s or labels[nb] != t:
                continue  # invalidated by an earlier move this pass
            dw = graph.w[c] - graph.w[nb]
            new_s = load[s] - dw
            new_t = load[t] + dw
            hi, lo = bracket(s, t, new_s, new_t)
            if hi - lo > slack + 1e-9:
                continue
            if _local_removal_safe(graph, labels, c) and \
                    _local_removal_safe(graph, labels, nb):
                labels[c] = t
                labels[nb] = s
                if _swap_connected(graph, labels, c, nb):
                    load[s] = new_s
                    load[t] = new_t
                    moved += 1
                else:
                    labels[c] = s
                    labels[nb] = t
    return moved


def _swap_connected(graph: _CellGraph, labels: np.ndarray, c: int,
                    nb: int) -> bool:
    """After swapping c and nb, both must still touch their new stratum."""
    for cell in (c, nb):
        lab = labels[cell]
        if not any(int(v) >= 0 and labels[v] == lab and int(v) not in (c, nb)
                   for v in graph.nbrs[cell]):
            return False
    return True


def equal_area_compact_partition(region: Region, n: int, *,
                                 resolution: int = 256, max_iter: int = 60,
                                 restarts: int = 2,
                                 seed: int | RandomStream = 0) -> Stratification:
    """Partition a region into n connected strata of (near) equal area.

    Balanced k-means on raster cells: k-means++ seeding, capacity-limited
    greedy assignment, connectivity repair, then boundary transfers that
    reduce the mean squared cell-to-centroid distance while preserving both
    balance (within one raster cell of area) and 4-connectivity.
    """
    stream = seed if isinstance(seed, RandomStream) else RandomStream(int(seed))
    n = int(n)
    if n < 1:
        raise ValueError("need at least one stratum")
    raster = rasterize(region, resolution, keep_boundary_points=True)
    graph = _CellGraph(raster)
    if graph.count < 20 * n:
        raise ValueError(f"raster too coarse: {graph.count} inside cells "
                         f"for {n} strata (need >= {20 * n})")

    assignment_full = np.full(raster.frac.shape, -1, dtype=np.int64)
    if n == 1:
        assignment_full[graph.iy, graph.ix] = 0
        strat = Stratification(raster, assignment_full, 1)
        c = strat.centroids[0]
        obj = float(np.sum(graph.w * ((graph.x - c[0]) ** 2 +
                                      (graph.y - c[1]) ** 2)) / np.sum(graph.w))
        strat.objective_history = [obj]
        return strat

    target = float(graph.w.sum()) / n
    best_labels = None
    best_obj = math.inf
    best_hist: list[float] = []
    fallback_labels = None

    for r in range(max(1, restarts)):
        centroids = _kmeanspp_init(graph, n, stream.child(r))
        centroids = _lloyd_warmstart(graph, centroids, n)
        labels = _balanced_fill(graph, centroids, n, target)
        ok = _repair_connectivity(graph, labels, n)
        centroids = _recentroid(graph, labels, n)
        if ok:
            ok = _rebalance(graph, labels, n, target, centroids)
        if not ok:
            if fallback_labels is None:
                fallback_labels = labels.copy()
            continue
        history = [_objective(graph, labels, centroids)]
        flat = 0
        for _ in range(max_iter):
            moved = _improvement_pass(graph, labels, n, centroids)
            moved += _improvement_pass(graph, labels, n, centroids)
            centroids = _recentroid(graph, labels, n)
            history.append(_objective(graph, labels, centroids))
            flat = flat + 1 if history[-2] - history[-1] < 1e-4 * history[-1] \
                else 0
            if moved == 0 or flat >= 4:
                break
        if history[-1] < best_obj:
            best_obj = history[-1]
            best_labels = labels.copy()
            best_hist = history

    if best_labels is None:
        bad = fallback_labels if fallback_labels is not None \
            else np.zeros(graph.count, dtype=np.int64)
        assignment_full[graph.iy, graph.ix] = bad
        partial = Stratification(raster, assignment_full, n)
        raise StratificationError(
            "could not reach a balanced connected partition", best=partial)

    assignment_full[graph.iy, graph.ix] = best_labels
    return Stratification(raster, assignment_full, n,
                          objective_history=best_hist)


# ---------------------------------------------------------------------------
# sequential indexing
# ---------------------------------------------------------------------------

def sequential_index(strat: Stratification) -> np.ndarray:
    """Order strata so consecutive ones are adjacent where possible.

    Greedy nearest-centroid walk on the adjacency graph with non-adjacent
    jumps only when stuck, then 2-opt improvement minimizing (non-adjacent
    pair count, largest consecutive span).  Falls back gracefully; never
    raises.  The computed order is stored on the stratification and returned.
    """
    n = strat.n
    if n == 1:
        strat.order = np.array([0], dtype=np.int64)
        return strat.order
    adj = strat.adjacency()
    cent = strat.centroids

    def dist(i, j):
        return float(np.hypot(*(cent[i] - cent[j])))

    start = int(np.lexsort((cent[:, 0], cent[:, 1]))[0])
    order = [start]
    visited = {start}
    while len(order) < n:
        cur = order[-1]
        cand = [v for v in sorted(adj[cur]) if v not in visited]
        if not cand:
            cand = [v for v in range(n) if v not in visited]
        nxt = min(cand, key=lambda v: (dist(cur, v), v))
        order.append(nxt)
        visited.add(nxt)

    clouds = strat.point_clouds()
    span_cache: dict[tuple[int, int], float] = {}

    def span(i, j):
        key = (min(i, j), max(i, j))
        if key not in span_cache:
            span_cache[key] = max_pair_distance(clouds[i], clouds[j])
        return span_cache[key]

    def score(path):
        nonadj = sum(1 for a, b in zip(path[:-1], path[1:]) if b not in adj[a])
        worst = max(span(a, b) for a, b in zip(path[:-1], path[1:]))
        return (nonadj, worst)

    best = list(order)
    best_score = score(best)
    improved = True
    rounds = 0
    while improved and rounds < 12:
        improved = False
        rounds += 1
        for i in range(n - 1):
            for j in range(i + 1, n):
                cand = best[:i] + best[i:j + 1][::-1] + best[j + 1:]
                s = score(cand)
                if s < best_score:
                    best, best_score = cand, s
                    improved = True
    strat.order = np.array(best, dtype=np.int64)
    return strat.order


# ---------------------------------------------------------------------------
# diagnostics
# ---------------------------------------------------------------------------

def diagnostics(strat: Stratification,
                boundary: Region | None = None) -> Diagnostics:
    """Shape diagnostics of a stratification on its exact clipped geometry."""
    clouds = strat.point_clouds()
    diam = max(hull_diameter(c) for c in clouds)
    n = strat.n
    if n > 1:
        spans = [max_pair_distance(clouds[a], clouds[b])
                 for a, b in zip(strat.order[:-1], strat.order[1:])]
        span = float(max(spans))
    else:
        span = 0.0
    a_min = float(strat.areas.min())
    a_max = float(strat.areas.max())
    crossing = None
    if boundary is not None:
        _, marked = _fractions_on_grid(boundary, strat.raster.grid)
        strata = {int(strat.assignment[iy, ix]) for iy, ix in marked
                  if strat.assignment[iy, ix] >= 0}
        crossing = len(strata)
    return Diagnostics(
        max_diameter=diam,
        max_consecutive_span=span,
        area_min=a_min,
        area_max=a_max,
        n_times_diameter_sq=n * diam * diam,
        n_times_area_min=n * a_min,
        n_times_span_sq=n * span * span,
        boundary_stratum_count=crossing,
    )

import math

import numpy as np
import pytest

from spatialstrat import (Disk, RandomStream, Stratification,
                          equal_area_compact_partition, grid_partition, rect,
                          sequential_index, unit_square)
from spatialstrat.stratify import diagnostics


def test_grid_partition_unit_square(square):
    s = grid_partition(square, 2)
    assert s.n == 4
    assert np.allclose(s.areas, 0.25)
    d = diagnostics(s)
    assert d.max_diameter == pytest.approx(math.sqrt(2) / 2, rel=1e-12)
    assert d.n_times_diameter_sq == pytest.approx(2.0, rel=1e-9)
    assert d.n_times_area_min == pytest.approx(1.0, rel=1e-12)


def test_grid_partition_rectangle_cells():
    s = grid_partition(rect(0, 0, 2, 1), 2)
    assert s.n == 4
    assert np.allclose(s.areas, 0.5)
    assert s.raster.grid.sx == pytest.approx(1.0)
    assert s.raster.grid.sy == pytest.approx(0.5)


def test_grid_partition_requires_rectangle(unit_disk):
    with pytest.raises(ValueError, match="rectangle"):
        grid_partition(unit_disk, 3)


def test_grid_serpentine_order(square):
    s = grid_partition(square, 2)
    # cells: 0=(0,0) 1=(1,0) 2=(0,1) 3=(1,1); serpentine visits (0,0),(1,0),(1,1),(0,1)
    assert s.order.tolist() == [0, 1, 3, 2]
    adj = s.adjacency()
    for a, b in zip(s.order[:-1], s.order[1:]):
        assert b in adj[a]


def test_grid_4x4_consecutive_span(square):
    s = grid_partition(square, 4)
    d = diagnostics(s)
    # oracle: two adjacent quarter cells form a 0.25 x 0.5 block
    assert d.max_consecutive_span == pytest.approx(math.sqrt(5) / 4, rel=1e-12)


def test_single_stratum_span_zero(square):
    s = equal_area_compact_partition(square, 1, resolution=64 + 64, seed=0)
    sequential_index(s)
    d = diagnostics(s)
    assert d.max_consecutive_span == 0.0
    assert s.order.tolist() == [0]


def test_equal_area_balance_and_connectivity(square):
    s = equal_area_compact_partition(square, 4, resolution=128, seed=1)
    assert s.n == 4
    assert np.max(s.areas) - np.min(s.areas) <= s.raster.grid.cell_area + 1e-12
    assert np.allclose(s.areas, 0.25, rtol=0.01)
    d = diagnostics(s)
    assert d.n_times_diameter_sq <= 4.0
    for i in range(s.n):
        assert _connected(s, i)


def test_equal_area_objective_monotone(square):
    s = equal_area_compact_partition(square, 9, resolution=128, seed=2)
    h = s.objective_history
    assert len(h) >= 2
    assert all(h[k + 1] <= h[k] + 1e-12 for k in range(len(h) - 1))


def test_equal_area_raster_too_coarse(square):
    with pytest.raises(ValueError, match="too coarse"):
        equal_area_compact_partition(square, 300, resolution=64, seed=0)


def test_equal_area_deterministic(square):
    a = equal_area_compact_partition(square, 6, resolution=128, seed=9)
    b = equal_area_compact_partition(square, 6, resolution=128, seed=9)
    assert np.array_equal(a.assignment, b.assignment)


def _connected(strat: Stratification, i: int) -> bool:
    iy, ix = strat.stratum_cells(i)
    cells = set(zip(iy.tolist(), ix.tolist()))
    start = next(iter(cells))
    seen = {start}
    queue = [start]
    while queue:
        cy, cx = queue.pop()
        for dy, dx in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            nb = (cy + dy, cx + dx)
            if nb in cells and nb not in seen:
                seen.add(nb)
                queue.append(nb)
    return len(seen) == len(cells)


def test_sequential_index_mostly_adjacent(blob_polygon):
    s = equal_area_compact_partition(blob_polygon, 12, resolution=128, seed=4)
    order = sequential_index(s)
    assert sorted(order.tolist()) == list(range(12))
    adj = s.adjacency()
    adjacent = sum(1 for a, b in zip(order[:-1], order[1:]) if b in adj[a])
    assert adjacent >= 0.9 * (len(order) - 1)


def test_diagnostics_boundary_stratum_count(square):
    s = grid_partition(square, 4)
    disk = Disk((0.5, 0.5), 0.3)
    d = diagnostics(s, boundary=disk)
    # brute-force oracle: cells visited by a dense sampling of the circle
    th = np.linspace(0, 2 * math.pi, 200_000, endpoint=False)
    cx = 0.5 + 0.3 * np.cos(th)
    cy = 0.5 + 0.3 * np.sin(th)
    cells = set(zip(np.minimum((cy * 4).astype(int), 3).tolist(),
                    np.minimum((cx * 4).astype(int), 3).tolist()))
    assert d.boundary_stratum_count == len(cells)
    assert d.boundary_stratum_count == 12


def test_boundary_crossing_scaling(square):
    """Boundary-hit stratum count grows like sqrt(n) for a disk boundary."""
    disk = Disk((0.5, 0.5), 0.3)
    counts = []
    ns = [16, 64, 256, 1024]
    for n in ns:
        s = grid_partition(square, math.isqrt(n))
        counts.append(diagnostics(s, boundary=disk).boundary_stratum_count)
    slope = np.polyfit(np.log(ns), np.log(counts), 1)[0]
    assert 0.35 <= slope <= 0.65


def test_stratification_json_roundtrip(tmp_path, blob_polygon):
    s = equal_area_compact_partition(blob_polygon, 8, resolution=128, seed=5)
    sequential_index(s)
    path = tmp_path / "strata.json"
    s.save(path)
    loaded = Stratification.load(path)
    assert np.array_equal(loaded.assignment, s.assignment)
    assert np.array_equal(loaded.order, s.order)
    d0 = diagnostics(s)
    d1 = diagnostics(loaded)
    assert d0.to_dict() == pytest.approx(d1.to_dict())


def test_sample_stratum_containment(square):
    s = grid_partition(square, 3)
    stream = RandomStream(11)
    for i in range(s.n):
        pts = s.sample_stratum(i, stream.child(i), 200)
        ix, iy = s.raster.cell_index(pts[:, 0], pts[:, 1])
        assert np.all(s.assignment[iy, ix] == i)


def test_sample_stratum_clipped_cells(unit_disk):
    s = equal_area_compact_partition(unit_disk, 4, resolution=128, seed=6)
    pts = s.sample_stratum(0, RandomStream(3), 5_000)
    assert np.all(np.asarray(unit_disk.contains(pts[:, 0], pts[:, 1])))


def test_grid_partition_asymmetric():
    s = grid_partition(unit_square(), 4, 2)
    assert s.n == 8
    assert np.allclose(s.areas, 0.125)

import math

import numpy as np
import pytest
from scipy import stats

from spatialstrat import (Disk, DisjointUnion, Ellipse, Point, PolygonalRegion,
                          RandomStream, Segment, area, contains, diameter,
                          intersection_length, rect, uniform_point)
from spatialstrat.geometry import (convex_hull, disk_polygon_area,
                                   hull_diameter, rigid_transform_region,
                                   rigid_transform_segment, signed_ring_area)


def test_area_unit_square(square):
    assert area(square) == pytest.approx(1.0, abs=1e-12)


def test_area_square_with_hole():
    region = PolygonalRegion(
        [[0, 0], [1, 0], [1, 1], [0, 1]],
        holes=[[[0.25, 0.25], [0.75, 0.25], [0.75, 0.75], [0.25, 0.75]]])
    assert area(region) == pytest.approx(0.75, abs=1e-12)


def test_area_disk():
    assert area(Disk((0, 0), 2.0)) == pytest.approx(4 * math.pi, rel=1e-12)


def test_area_ellipse():
    assert area(Ellipse((1, 2), 3.0, 0.5, 0.3)) == pytest.approx(
        math.pi * 1.5, rel=1e-12)


def test_area_disjoint_union_additive():
    u = DisjointUnion([Disk((0, 0), 1.0), Disk((5, 0), 2.0)])
    assert area(u) == pytest.approx(math.pi * 5.0, rel=1e-12)


def test_union_overlap_rejected():
    with pytest.raises(ValueError, match="overlap"):
        DisjointUnion([Disk((0, 0), 1.0), Disk((1.0, 0), 1.0)])


def test_union_touching_members_allowed():
    DisjointUnion([rect(0, 0, 1, 1), rect(1, 0, 2, 1)])


def test_diameter_values(square):
    assert diameter(square) == pytest.approx(math.sqrt(2), rel=1e-12)
    assert diameter(Disk((3, 4), 1.0)) == 2.0
    assert diameter(Ellipse((0, 0), 2.0, 1.0, 0.7)) == 4.0
    # oracle: max pairwise vertex distance of the triangle
    tri = [(0, 0), (3, 0), (0, 4)]
    brute = max(math.dist(p, q) for p in tri for q in tri)
    assert brute == 5.0
    assert diameter(PolygonalRegion(tri)) == pytest.approx(brute, rel=1e-12)


def test_hull_diameter_matches_bruteforce():
    gen = np.random.default_rng(11)
    for _ in range(25):
        pts = gen.normal(size=(40, 2))
        d = pts[:, None, :] - pts[None, :, :]
        brute = np.sqrt((d**2).sum(axis=2)).max()
        assert hull_diameter(pts) == pytest.approx(brute, rel=1e-12)


def test_area_bounded_by_diameter_squared(square, blob_polygon, unit_disk):
    regions = [square, blob_polygon, unit_disk,
               Ellipse((0, 0), 2, 0.5, 0.4),
               DisjointUnion([Disk((0, 0), 1), Disk((4, 1), 0.5)])]
    for region in regions:
        assert area(region) <= diameter(region) ** 2 + 1e-9


def test_contains_basics(square):
    assert contains(square, Point(0.5, 0.5))
    assert not contains(square, Point(1.5, 0.5))
    # boundary convention: points on the rim are inside
    assert contains(Disk((0, 0), 1.0), Point(0.6, 0.8))
    assert contains(square, Point(0.0, 0.5))
    assert contains(square, Point(1.0, 1.0))


def test_contains_hole():
    region = PolygonalRegion(
        [[0, 0], [1, 0], [1, 1], [0, 1]],
        holes=[[[0.4, 0.4], [0.6, 0.4], [0.6, 0.6], [0.4, 0.6]]])
    assert contains(region, Point(0.1, 0.1))
    assert not contains(region, Point(0.5, 0.5))


def test_self_intersecting_ring_rejected():
    with pytest.raises(ValueError, match="self-intersecting"):
        PolygonalRegion([[0, 0], [1, 1], [1, 0], [0, 1]])


def test_hole_outside_rejected():
    with pytest.raises(ValueError, match="hole"):
        PolygonalRegion([[0, 0], [1, 0], [1, 1], [0, 1]],
                        holes=[[[2, 2], [3, 2], [3, 3], [2, 3]]])


def test_uniform_point_support(square):
    stream = RandomStream(1)
    for _ in range(50):
        p = uniform_point(square, stream)
        assert 0.0 <= p.x <= 1.0 and 0.0 <= p.y <= 1.0


def test_uniform_point_triangle_centroid():
    tri = PolygonalRegion([(0, 0), (1, 0), (0, 1)])
    pts = tri.uniform_points(RandomStream(5), 100_000)
    # centroid oracle (1/3, 1/3); sd of the mean from uniform-triangle moments
    se = pts.std(axis=0, ddof=1) / math.sqrt(len(pts))
    assert abs(pts[:, 0].mean() - 1 / 3) < 3 * se[0]
    assert abs(pts[:, 1].mean() - 1 / 3) < 3 * se[1]


def test_uniform_point_chi2_subcells(square):
    pts = square.uniform_points(RandomStream(7), 100_000)
    ix = np.minimum((pts[:, 0] * 4).astype(int), 3)
    iy = np.minimum((pts[:, 1] * 4).astype(int), 3)
    counts = np.bincount(iy * 4 + ix, minlength=16)
    _, p = stats.chisquare(counts)
    assert p > 0.001


def test_uniform_point_polygon_with_hole_chi2():
    region = PolygonalRegion(
        [[0, 0], [1, 0], [1, 1], [0, 1]],
        holes=[[[0.25, 0.25], [0.75, 0.25], [0.75, 0.75], [0.25, 0.75]]])
    pts = region.uniform_points(RandomStream(9), 100_000)
    assert not np.any(region.contains(pts[:, 0], pts[:, 1]) == False)  # noqa: E712
    # chi-square over the 12 outer subcells (hole cells excluded)
    ix = np.minimum((pts[:, 0] * 4).astype(int), 3)
    iy = np.minimum((pts[:, 1] * 4).astype(int), 3)
    cell = iy * 4 + ix
    outer = [c for c in range(16) if c not in (5, 6, 9, 10)]
    counts = np.bincount(cell, minlength=16)[outer]
    _, p = stats.chisquare(counts)
    assert p > 0.001


def test_uniform_points_union_weights():
    u = DisjointUnion([rect(0, 0, 1, 1), rect(10, 0, 11, 3)])
    pts = u.uniform_points(RandomStream(3), 40_000)
    in_second = pts[:, 0] > 5
    frac = in_second.mean()
    # binomial oracle: weight of the second member is 3/4
    se = math.sqrt(0.75 * 0.25 / len(pts))
    assert abs(frac - 0.75) < 3 * se


def test_uniform_zero_area_not_constructible():
    with pytest.raises(ValueError):
        Disk((0, 0), 0.0)


def test_intersection_length_disk_chords(unit_disk):
    assert intersection_length(Segment(Point(0, 0), 4.0), unit_disk) == \
        pytest.approx(2.0, rel=1e-12)
    # interval-overlap oracle: [-0.5, 3.5] against chord [-1, 1]
    assert intersection_length(Segment(Point(1.5, 0), 4.0), unit_disk) == \
        pytest.approx(1.5, rel=1e-12)
    assert intersection_length(Segment(Point(0, 5), 4.0), unit_disk) == 0.0


def test_intersection_length_polygon_bruteforce(square, blob_polygon):
    # oracle: dense point sampling along the segment
    gen = np.random.default_rng(2)
    for region in (square, blob_polygon):
        for _ in range(20):
            mx, my = gen.uniform(-1.5, 1.5, size=2)
            ang = gen.uniform(0, 2 * math.pi)
            seg = Segment(Point(mx, my), 2.0, ang)
            ts = np.linspace(-1, 1, 20_001)
            ex, ey = seg.half_vector
            inside = np.asarray(region.contains(mx + ts * ex, my + ts * ey))
            brute = inside.mean() * 2.0
            exact = intersection_length(seg, region)
            assert exact == pytest.approx(brute, abs=2e-3)


def test_intersection_length_rigid_motion_invariance(unit_disk, blob_polygon):
    gen = np.random.default_rng(8)
    for region in (unit_disk, blob_polygon, Ellipse((0.2, 0), 1.0, 0.5, 0.3)):
        for _ in range(10):
            seg = Segment(Point(*gen.uniform(-1, 1, 2)), 2.5,
                          gen.uniform(0, 2 * math.pi))
            base = intersection_length(seg, region)
            ang, dx, dy = gen.uniform(-3, 3, 3)
            moved = intersection_length(
                rigid_transform_segment(seg, ang, dx, dy),
                rigid_transform_region(region, ang, dx, dy))
            assert moved == pytest.approx(base, abs=1e-9)


def test_disk_polygon_area_against_known_values():
    sq = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    assert disk_polygon_area(sq, 0.5, 0.5, 10.0) == pytest.approx(1.0, rel=1e-12)
    assert disk_polygon_area(sq, 0.5, 0.5, 0.25) == pytest.approx(
        math.pi * 0.0625, rel=1e-12)
    # quarter disk: circle centered at a corner
    assert disk_polygon_area(sq, 0.0, 0.0, 0.5) == pytest.approx(
        math.pi * 0.25 / 4, rel=1e-12)


def test_disk_polygon_area_monte_carlo():
    poly = np.array([[0, 0], [2, 0], [2, 1], [1, 1], [1, 2], [0, 2]],
                    dtype=float)  # L-shape
    gen = np.random.default_rng(3)
    pts = gen.uniform(-0.5, 2.5, size=(400_000, 2))
    region = PolygonalRegion(poly)
    for (cx, cy, r) in ((0.8, 0.9, 0.7), (2.0, 0.0, 1.0), (1.0, 1.0, 0.4)):
        exact = disk_polygon_area(poly, cx, cy, r)
        hits = np.asarray(region.contains(pts[:, 0], pts[:, 1])) & \
            ((pts[:, 0] - cx) ** 2 + (pts[:, 1] - cy) ** 2 <= r * r)
        mc = hits.mean() * 9.0
        se = hits.std(ddof=1) / math.sqrt(len(pts)) * 9.0
        assert abs(exact - mc) < 4 * se


def test_cell_fraction_consistency(unit_disk, blob_polygon):
    # fractions integrate to the region area over a covering grid
    for region in (unit_disk, blob_polygon, Ellipse((0, 0), 1.0, 0.6, 0.5)):
        x0, y0, x1, y1 = region.bbox
        total = 0.0
        k = 24
        for i in range(k):
            for j in range(k):
                cx0 = x0 + i * (x1 - x0) / k
                cy0 = y0 + j * (y1 - y0) / k
                cx1 = x0 + (i + 1) * (x1 - x0) / k
                cy1 = y0 + (j + 1) * (y1 - y0) / k
                total += region.cell_fraction(cx0, cy0, cx1, cy1) * \
                    (cx1 - cx0) * (cy1 - cy0)
        assert total == pytest.approx(region.area, rel=1e-9)


def test_convex_hull_is_convex_and_covers():
    gen = np.random.default_rng(4)
    pts = gen.normal(size=(200, 2))
    hull = convex_hull(pts)
    assert signed_ring_area(hull) > 0
    region = PolygonalRegion(hull)
    assert np.all(region.contains(pts[:, 0], pts[:, 1]))


def test_segment_endpoints():
    seg = Segment(Point(1.0, 1.0), 2.0, math.pi / 2)
    (x0, y0), (x1, y1) = seg.endpoints
    assert (x0, y0) == pytest.approx((1.0, 0.0), abs=1e-12)
    assert (x1, y1) == pytest.approx((1.0, 2.0), abs=1e-12)
    with pytest.raises(ValueError):
        Segment(Point(0, 0), 0.0)

"""The compiled kernels and the numpy fallback must agree exactly."""

import math

import numpy as np
import pytest

from spatialstrat.kernels import BACKEND, _ref

try:
    from spatialstrat.kernels import _fastgeom
except ImportError:
    _fastgeom = None

needs_compiled = pytest.mark.skipif(_fastgeom is None,
                                    reason="compiled extension not built")


def _ring_data():
    outer = np.array([[0, 0], [2, 0], [2, 2], [0, 2]], dtype=float)
    hole = np.array([[0.5, 0.5], [1.5, 0.5], [1.5, 1.5], [0.5, 1.5]],
                    dtype=float)[::-1].copy()
    coords = np.ascontiguousarray(np.vstack([outer, hole]))
    offsets = np.array([0, 4, 8], dtype=np.int64)
    return coords, offsets


@needs_compiled
def test_points_in_rings_backends_agree():
    coords, offsets = _ring_data()
    gen = np.random.default_rng(0)
    x = gen.uniform(-0.5, 2.5, 20_000)
    y = gen.uniform(-0.5, 2.5, 20_000)
    a = _ref.points_in_rings(x, y, coords, offsets)
    b = _fastgeom.points_in_rings(x, y, coords, offsets)
    assert np.array_equal(a, b)


@needs_compiled
def test_points_on_edges_agree_and_are_inside():
    coords, offsets = _ring_data()
    x = np.array([0.0, 2.0, 1.0, 0.5, 1.5, 1.0])
    y = np.array([0.0, 2.0, 0.0, 0.5, 1.5, 0.5])
    a = _ref.points_in_rings(x, y, coords, offsets)
    b = _fastgeom.points_in_rings(x, y, coords, offsets)
    assert np.array_equal(a, b)
    assert a.all()  # edges and hole rims count as inside


@needs_compiled
def test_segment_lengths_backends_agree():
    coords, offsets = _ring_data()
    gen = np.random.default_rng(1)
    mx = gen.uniform(-1, 3, 2_000)
    my = gen.uniform(-1, 3, 2_000)
    for ang in (0.0, 0.3, math.pi / 2, 2.2):
        ex, ey = 1.3 * math.cos(ang), 1.3 * math.sin(ang)
        a = _ref.segment_lengths_in_rings(mx, my, ex, ey, coords, offsets)
        b = _fastgeom.segment_lengths_in_rings(mx, my, ex, ey, coords, offsets)
        assert np.allclose(a, b, atol=1e-12)


def test_segment_lengths_square_with_hole_known_value():
    coords, offsets = _ring_data()
    # horizontal segment through the middle: crosses the unit hole
    out = _ref.segment_lengths_in_rings(np.array([1.0]), np.array([1.0]),
                                        2.0, 0.0, coords, offsets)
    assert out[0] == pytest.approx(1.0, abs=1e-12)  # 2 units minus 1 of hole
    out = _ref.segment_lengths_in_rings(np.array([1.0]), np.array([0.25]),
                                        2.0, 0.0, coords, offsets)
    assert out[0] == pytest.approx(2.0, abs=1e-12)


def test_backend_reported():
    assert BACKEND in ("compiled", "python")

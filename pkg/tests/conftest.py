import math

import numpy as np
import pytest

from spatialstrat import Disk, DisjointUnion, PolygonalRegion, rect, unit_square


@pytest.fixture(scope="session")
def square():
    return unit_square()


@pytest.fixture(scope="session")
def blob_polygon():
    """Irregular reserve-like boundary, scaled to unit area."""
    th = np.linspace(0, 2 * math.pi, 44, endpoint=False)
    r = 1.0 + 0.22 * np.sin(3 * th + 1.0) + 0.14 * np.sin(7 * th + 2.0) + \
        0.08 * np.sin(11 * th)
    pts = np.column_stack([r * np.cos(th), r * np.sin(th)])
    raw = PolygonalRegion(pts)
    return PolygonalRegion(pts / math.sqrt(raw.area))


@pytest.fixture(scope="session")
def survey_region():
    """10 km x 1.045 km strip (10,450,000 m^2 = 1045 ha)."""
    return rect(0.0, 0.0, 10_000.0, 1_045.0)


@pytest.fixture(scope="session")
def survey_cover():
    """Twelve disjoint canopy patches, all with 100 m transect clearance."""
    radii = [150, 190, 130, 210, 170, 140, 200, 160, 180, 120, 205, 145]
    ys = [300, 700, 480, 260, 760, 520, 300, 680, 420, 840, 560, 240]
    xs = np.linspace(700, 9300, 12)
    return DisjointUnion([Disk((float(x), float(y)), float(r))
                          for x, y, r in zip(xs, ys, radii)])


@pytest.fixture(scope="session")
def unit_disk():
    return Disk((0.0, 0.0), 1.0)

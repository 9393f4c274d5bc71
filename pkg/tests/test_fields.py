import math

import numpy as np
import pytest

from spatialstrat import (CoverSpec, Disk, DisjointUnion, PolygonalRegion,
                          RandomStream, builtin_field, extended_eval,
                          line_intercept_field, rect, unit_square)
from spatialstrat.fields import (BUILTIN_FIELD_IDS, combine,
                                 coverage_clearance_report)
from spatialstrat.quadrature import integrate_field


def test_catalog_values(square):
    linear = builtin_field("linear", square)
    assert linear.value_at((0.3, 0.7)) == pytest.approx(0.3)

    ind = builtin_field("disk_indicator", square, center=(0, 0), radius=1.0)
    assert ind.value_at((2, 0)) == 0.0
    assert ind.value_at((0.5, 0.5)) == 1.0

    cusp = builtin_field("holder_cusp", square, center=(0, 0), alpha=0.5)
    assert cusp.value_at((0.25, 0)) == pytest.approx(0.5)  # sqrt(0.25)

    const = builtin_field("constant", square, value=2.5)
    assert const.value_at((0.9, 0.1)) == 2.5


def test_unknown_field_id(square):
    with pytest.raises(ValueError, match="unknown field id"):
        builtin_field("mystery", square)
    with pytest.raises(ValueError, match="alpha"):
        builtin_field("holder_cusp", square, alpha=1.5)


def test_extended_eval(square):
    linear = builtin_field("linear", square)
    assert extended_eval(linear, (0.4, 0.5)) == pytest.approx(0.4)
    assert extended_eval(linear, (1.4, 0.5)) == 0.0
    const = builtin_field("constant", Disk((0, 0), 1.0))
    assert extended_eval(const, (0.999, 0)) == 1.0
    assert extended_eval(const, (1.001, 0)) == 0.0


def test_holder_condition_spot_check(square):
    """|y(u)-y(v)| <= H |u-v|^alpha on 10^4 random pairs, catalog-wide."""
    gen = np.random.default_rng(12)
    u = gen.uniform(0, 1, size=(10_000, 2))
    v = gen.uniform(0, 1, size=(10_000, 2))
    dist = np.hypot(u[:, 0] - v[:, 0], u[:, 1] - v[:, 1])
    for fid, params in (("constant", {}), ("linear", {}), ("smooth_sine", {}),
                        ("holder_cusp", {"center": (0.5, 0.5), "alpha": 0.5})):
        f = builtin_field(fid, square, **params)
        if f.smoothness_class not in ("holder", "lipschitz"):
            continue
        fu = f.values(u[:, 0], u[:, 1])
        fv = f.values(v[:, 0], v[:, 1])
        bound = f.holder_H * dist**f.holder_alpha
        assert np.all(np.abs(fu - fv) <= bound + 1e-12), fid


def test_sup_bound_spot_check(square):
    gen = np.random.default_rng(13)
    u = gen.uniform(0, 1, size=(10_000, 2))
    for fid, params in (("constant", {"value": -3.0}), ("linear", {}),
                        ("smooth_sine", {}),
                        ("holder_cusp", {"center": (0.25, 0.5), "alpha": 0.7}),
                        ("disk_indicator", {"center": (0.5, 0.5), "radius": 0.3})):
        f = builtin_field(fid, square, **params)
        vals = np.abs(f.values(u[:, 0], u[:, 1]))
        assert vals.max() <= f.sup_bound + 1e-12, fid


def test_indicator_metadata(square):
    ind = builtin_field("disk_indicator", square, center=(0.5, 0.5), radius=0.3)
    assert ind.smoothness_class == "piecewise_holder"
    assert ind.holder_alpha == 1.0
    assert ind.binary
    poly = PolygonalRegion([[0.2, 0.2], [0.8, 0.2], [0.5, 0.9]])
    pind = builtin_field("polygon_indicator", square, region=poly)
    assert pind.value_at((0.5, 0.4)) == 1.0
    assert pind.value_at((0.1, 0.1)) == 0.0


def test_line_intercept_values(square):
    spec = CoverSpec(Disk((0, 0), 1.0), 4.0, 0.0)
    f = line_intercept_field(spec, rect(-3, -3, 3, 3))
    assert f.value_at((0, 0)) == pytest.approx(0.5)     # chord 2 over L=4
    assert f.value_at((0, 2)) == 0.0
    assert f.value_at((1.5, 0)) == pytest.approx(0.375)  # overlap 1.5 over 4
    assert f.smoothness_class == "line_intercept"
    assert f.holder_H is None
    assert f.sup_bound == 1.0


def test_line_intercept_bounded_unit(survey_region, survey_cover):
    spec = CoverSpec(survey_cover, 200.0, 0.0)
    f = line_intercept_field(spec, survey_region)
    pts = survey_region.uniform_points(RandomStream(3), 20_000)
    vals = f.values(pts[:, 0], pts[:, 1])
    assert np.all(vals >= 0.0) and np.all(vals <= 1.0)


def test_intercept_identity_interior_cover():
    """Integrating the intercept density recovers the cover area (<0.2%)."""
    region = rect(-3, -3, 3, 3)
    cover = Disk((0.0, 0.0), 1.0)
    spec = CoverSpec(cover, 2.0, 0.3)
    f = line_intercept_field(spec, region)
    total = integrate_field(f, region, 512)
    assert total == pytest.approx(cover.area, rel=2e-3)


def test_clearance_warning_when_cover_touches_boundary():
    region = unit_square()
    spec = CoverSpec(Disk((0.5, 0.5), 0.4), 0.8, 0.0)  # transects exit region
    with pytest.warns(UserWarning, match="leaves the domain"):
        report = coverage_clearance_report(spec, region, 256)
    assert report["identity_gap"] < 0.0  # mass is lost, never gained


def test_combine_linearity(square):
    f1 = builtin_field("linear", square)
    f2 = builtin_field("smooth_sine", square)
    combo = combine([f1, f2], [2.0, -0.5])
    gen = np.random.default_rng(1)
    x, y = gen.uniform(0, 1, 50), gen.uniform(0, 1, 50)
    assert np.allclose(combo.values(x, y),
                       2.0 * f1.values(x, y) - 0.5 * f2.values(x, y))


def test_cover_spec_validation():
    with pytest.raises(ValueError):
        CoverSpec(Disk((0, 0), 1.0), 0.0)


def test_builtin_catalog_complete(square):
    for fid in BUILTIN_FIELD_IDS:
        params = {}
        if fid == "polygon_indicator":
            params["region"] = PolygonalRegion([[0, 0], [0.5, 0], [0.25, 0.5]])
        f = builtin_field(fid, square, **params)
        assert f.domain is square

"""Quadrature ground truth: per-stratum moments, exact variances and biases.

Every closed-form quantity the estimators are tested against is computed
here, independently of the sampling code: stratum integrals and central
moments by midpoint sums on exactly clipped rasters with Richardson
extrapolation across two resolutions, indicator fields by exact cell-area
fractions, and derived quantities (scheme variances, variance-estimator
biases, continuity bounds, the normality ratio) from those moments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .fields import AttributeField
from .geometry import Region
from .rasterize import Grid, _fractions_on_grid
from .stratify import Stratification, diagnostics as strat_diagnostics

_SMOOTH_TOL = 1e-6
_ROUGH_TOL = 1e-4


@dataclass
class MomentTable:
    """Stratum-level integrals of a field and its square, plus central moments."""

    area: float
    stratum_areas: np.ndarray       # a_i
    stratum_totals: np.ndarray      # integral of y over stratum i
    stratum_square_totals: np.ndarray   # integral of y^2
    stratum_means: np.ndarray
    stratum_variances: np.ndarray   # variance of y under a uniform site
    stratum_third_abs: np.ndarray   # third absolute central moment
    resolution: tuple[int, int]
    error_estimates: dict = dc_field(default_factory=dict)
    flagged: bool = False

    @property
    def n(self) -> int:
        return len(self.stratum_areas)

    @property
    def total(self) -> float:
        return float(self.stratum_totals.sum())

    @property
    def square_total(self) -> float:
        return float(self.stratum_square_totals.sum())

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("stratum,area,total,square_total,mean,variance,third_abs\n")
            for i in range(self.n):
                fh.write(f"{i},{self.stratum_areas[i]!r},"
                         f"{self.stratum_totals[i]!r},"
                         f"{self.stratum_square_totals[i]!r},"
                         f"{self.stratum_means[i]!r},"
                         f"{self.stratum_variances[i]!r},"
                         f"{self.stratum_third_abs[i]!r}\n")


def _fine_grid(base: Grid, factor: int) -> Grid:
    return Grid(base.x0, base.y0, base.sx / factor, base.sy / factor,
                base.nx * factor, base.ny * factor)


def _stratum_sums(field: AttributeField, strat: Stratification, factor: int):
    """Weights, values and stratum ids on a refined aligned grid."""
    base = strat.raster.grid
    grid = _fine_grid(base, factor)
    frac, _ = _fractions_on_grid(strat.region, grid)
    w = frac * grid.cell_area
    cx, cy = grid.centers()
    xs, ys = np.meshgrid(cx, cy)
    labels = np.repeat(np.repeat(strat.assignment, factor, axis=0),
                       factor, axis=1)
    sel = (w > 0.0) & (labels >= 0)
    lab = labels[sel]
    wv = w[sel]
    if field.binary and "boundary" in field.params:
        vals_grid, _ = _fractions_on_grid(field.params["boundary"], grid)
        vals = vals_grid[sel]
    else:
        vals = field.values(xs, ys)[sel]
    return lab, wv, vals


def _central_moments(lab, wv, vals, n, binary: bool):
    a = np.bincount(lab, weights=wv, minlength=n)
    t = np.bincount(lab, weights=wv * vals, minlength=n)
    mean = t / a
    if binary:
        # vals are exact per-cell means of a 0/1 field
        var = mean * (1.0 - mean)
        third = (1.0 - mean) ** 3 * mean + mean ** 3 * (1.0 - mean)
        s = t.copy()  # square of a 0/1 field is itself
    else:
        dev = vals - mean[lab]
        var = np.bincount(lab, weights=wv * dev * dev, minlength=n) / a
        third = np.bincount(lab, weights=wv * np.abs(dev) ** 3, minlength=n) / a
        s = (var + mean**2) * a
    return a, t, s, mean, var, third


def moments(field: AttributeField, strat: Stratification,
            resolution: int = 512) -> MomentTable:
    """Per-stratum moment table at the requested quadrature resolution.

    Midpoint sums on two aligned rasters (resolution and twice it) with
    Richardson extrapolation; indicator fields use exact cell fractions.
    The error estimate is the difference between the two levels.
    """
    if resolution < 256:
        raise ValueError("moments requires resolution >= 256")
    base = strat.raster.grid
    f1 = max(1, math.ceil(resolution / max(base.nx, base.ny)))
    f2 = 2 * f1
    n = strat.n
    binary = field.binary and "boundary" in field.params

    lab1, w1, v1 = _stratum_sums(field, strat, f1)
    a1, t1, s1, _, var1, _ = _central_moments(lab1, w1, v1, n, binary)
    lab2, w2, v2 = _stratum_sums(field, strat, f2)
    a2, t2, s2, mean2, var2, third2 = _central_moments(lab2, w2, v2, n, binary)

    if binary:
        t_r, s_r, var_r = t2, s2, var2
    else:
        t_r = (4.0 * t2 - t1) / 3.0
        s_r = (4.0 * s2 - s1) / 3.0
        var_r = np.maximum((4.0 * var2 - var1) / 3.0, 0.0)

    scale_t = max(float(np.abs(t2).max()), 1e-30)
    scale_s = max(float(np.abs(s2).max()), 1e-30)
    err = {
        "total": float(np.abs(t2 - t1).max()) / (3.0 * scale_t),
        "square_total": float(np.abs(s2 - s1).max()) / (3.0 * scale_s),
    }
    tol = _SMOOTH_TOL if field.smoothness_class in ("holder", "lipschitz") \
        else _ROUGH_TOL
    flagged = not binary and max(err.values()) > tol

    return MomentTable(
        area=float(a2.sum()),
        stratum_areas=a2,
        stratum_totals=t_r,
        stratum_square_totals=s_r,
        stratum_means=t_r / a2,
        stratum_variances=var_r,
        stratum_third_abs=third2,
        resolution=(base.nx * f1, base.nx * f2),
        error_estimates=err,
        flagged=flagged,
    )


def integrate_field(field: AttributeField, region: Region,
                    resolution: int = 512) -> float:
    """Richardson-extrapolated integral of a field over a region."""
    from .rasterize import _grid_for

    def level(grid: Grid) -> float:
        frac, _ = _fractions_on_grid(region, grid)
        w = frac * grid.cell_area
        cx, cy = grid.centers()
        xs, ys = np.meshgrid(cx, cy)
        if field.binary and "boundary" in field.params:
            vals, _ = _fractions_on_grid(field.params["boundary"], grid)
        else:
            vals = field.values(xs, ys)
        return float(np.sum(w * vals))

    g1 = _grid_for(region, resolution)
    g2 = Grid(g1.x0, g1.y0, g1.sx / 2, g1.sy / 2, g1.nx * 2, g1.ny * 2)
    t1, t2 = level(g1), level(g2)
    return (4.0 * t2 - t1) / 3.0


# ---------------------------------------------------------------------------
# derived exact quantities
# ---------------------------------------------------------------------------

def exact_var_urs(m: MomentTable, n: int) -> float:
    """True variance of the uniform-placement total estimator with n sites.

    Computed from the within/between stratum decomposition (equivalent to
    (area * S - T^2) / n but free of catastrophic cancellation).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    grand_mean = m.total / m.area
    within = float(np.sum(m.stratum_areas * m.stratum_variances))
    between = float(np.sum(m.stratum_areas * (m.stratum_means - grand_mean) ** 2))
    return m.area * (within + between) / n


def exact_var_ss(m: MomentTable) -> float:
    """True variance of the one-site-per-stratum total estimator."""
    return float(np.sum(m.stratum_areas**2 * m.stratum_variances))


def exact_var_ss2(m_half: MomentTable) -> float:
    """True variance of the two-per-stratum estimator on n/2 strata."""
    return 0.5 * exact_var_ss(m_half)


def bias_naive(m: MomentTable, n: int | None = None) -> float:
    """Exact bias of the pooled (URS-style) variance estimator under SS."""
    n = m.n if n is None else int(n)
    if n < 2:
        raise ValueError("bias of the pooled estimator needs n >= 2")
    dev = m.stratum_totals - m.total / n
    return float(n / (n - 1) * np.sum(dev**2))


def bias_neighbor(m: MomentTable, order) -> float:
    """Exact bias of the successive-difference variance estimator."""
    t = m.stratum_totals[np.asarray(order, dtype=int)]
    return 0.5 * float(t[0] ** 2 + np.sum(np.diff(t) ** 2) + t[-1] ** 2)


def holder_bound_check(field: AttributeField, strat: Stratification,
                       m: MomentTable | None = None) -> dict:
    """Continuity-based upper bound on the SS variance, and whether it holds.

    Requires declared modulus H and exponent alpha; fields without H are
    skipped (bound reported as None).
    """
    if field.holder_H is None:
        return {"bound": None, "variance": None, "satisfied": None,
                "skipped": True}
    if m is None:
        m = moments(field, strat)
    diag = strat_diagnostics(strat)
    d = diag.max_diameter
    bound = field.holder_H**2 * d ** (2.0 + 2.0 * field.holder_alpha) * m.area
    var = exact_var_ss(m)
    return {"bound": bound, "variance": var,
            "satisfied": bool(var <= bound * (1.0 + 1e-9)), "skipped": False}


def lyapunov_ratio(m: MomentTable) -> float | None:
    """Third-moment to variance^(3/2) ratio certifying asymptotic normality.

    None when the stratified variance is zero (constant field).
    """
    var = exact_var_ss(m)
    if var <= 0.0:
        return None
    v = float(np.sum(m.stratum_areas**3 * m.stratum_third_abs))
    return v / var**1.5

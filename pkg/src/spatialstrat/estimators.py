"""Point estimators for the spatial total, variance estimators and intervals.

The total estimators weight observed field values by the area of the stratum
or tessellation cell each site represents (URS uses the whole region over n).
Variance estimators for the one-per-stratum design: a pooled estimator that
treats the sample as if uniformly placed (positively biased), a
successive-difference estimator for equal-size sequentially indexed strata
(smaller bias, large-sample conservative), and the unbiased two-per-stratum
estimator from within-stratum pairs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .fields import AttributeField
from .geometry import Region
from .schemes import SamplePlan
from .stats import normal_quantile
from .stratify import Stratification


class EstimationError(ValueError):
    pass


def _require_scheme(plan: SamplePlan, *schemes: str) -> None:
    if plan.scheme not in schemes:
        raise EstimationError(
            f"plan scheme {plan.scheme!r} unsupported here (need {schemes})")


def _site_values(plan: SamplePlan, f: AttributeField) -> np.ndarray:
    return f.values(plan.sites[:, 0], plan.sites[:, 1])


def _check_sites_in_strata(plan: SamplePlan, strat: Stratification,
                           per_stratum: int) -> None:
    counts = np.bincount(plan.strata, minlength=strat.n)
    if len(plan.sites) != per_stratum * strat.n or \
            np.any(counts != per_stratum):
        raise EstimationError(
            f"plan must hold exactly {per_stratum} site(s) per stratum")
    ix, iy = strat.raster.cell_index(plan.sites[:, 0], plan.sites[:, 1])
    cell_strata = strat.assignment[iy, ix]
    if np.any(cell_strata != plan.strata):
        raise EstimationError("site/stratum assignment mismatch")


# ---------------------------------------------------------------------------
# point estimators
# ---------------------------------------------------------------------------

def est_urs(plan: SamplePlan, f: AttributeField,
            region: Region | None = None) -> float:
    """Area times the mean observed value, under uniform placement."""
    _require_scheme(plan, "urs")
    region = region or f.domain
    return region.area / plan.n * float(_site_values(plan, f).sum())


def est_ss1(plan: SamplePlan, strat: Stratification, f: AttributeField) -> float:
    """Area-weighted single observation per stratum."""
    _require_scheme(plan, "ss1")
    _check_sites_in_strata(plan, strat, 1)
    vals = _site_values(plan, f)
    return float(np.sum(strat.areas[plan.strata] * vals))


def est_ss2(plan: SamplePlan, strat: Stratification, f: AttributeField) -> float:
    """Area-weighted mean of the two observations per stratum."""
    _require_scheme(plan, "ss2")
    _check_sites_in_strata(plan, strat, 2)
    vals = _site_values(plan, f)
    return 0.5 * float(np.sum(strat.areas[plan.strata] * vals))


def est_tss(plan: SamplePlan, f: AttributeField,
            region: Region | None = None) -> float:
    """Cell-area weighted zero-extended values over all tessellation sites."""
    _require_scheme(plan, "tss", "sgs")
    region = region or f.domain
    cell_area = plan.meta.get("cell_area")
    if cell_area is None:
        raise EstimationError("tessellation plan is missing its cell area")
    vals = f.values(plan.sites[:, 0], plan.sites[:, 1])
    inside = (plan.in_region if plan.in_region is not None
              else np.asarray(region.contains(plan.sites[:, 0], plan.sites[:, 1])))
    return float(cell_area * np.sum(np.where(inside, vals, 0.0)))


# ---------------------------------------------------------------------------
# variance estimators
# ---------------------------------------------------------------------------

def var_naive(plan: SamplePlan, strat: Stratification, f: AttributeField) -> float:
    """Pooled variance estimator treating the stratified sample as uniform.

    Positively biased for the one-per-stratum design; the bias shrinks with
    n but can dominate the true variance.
    """
    _require_scheme(plan, "ss1")
    n = plan.n
    if n < 2:
        raise EstimationError("pooled variance needs n >= 2")
    _check_sites_in_strata(plan, strat, 1)
    terms = strat.areas[plan.strata] * _site_values(plan, f)
    total = terms.sum()
    return float(n / (n - 1) * np.sum((terms - total / n) ** 2))


def var_neighbor(plan: SamplePlan, strat: Stratification,
                 f: AttributeField) -> float:
    """Successive-difference variance estimator for equal-size strata.

    Uses the stratification's sequential ordering; requires stratum areas
    equal within 1% (the estimator is defined for equal-size strata only).
    """
    _require_scheme(plan, "ss1")
    _check_sites_in_strata(plan, strat, 1)
    if not strat.is_equal_area(0.01):
        raise EstimationError("successive-difference variance needs "
                              "equal-size strata (within 1%)")
    n = plan.n
    area = strat.total_area
    vals = _site_values(plan, f)
    y = vals[strat.order]  # site i sits in stratum i for ss1 plans
    core = y[0] ** 2 + float(np.sum(np.diff(y) ** 2)) + y[-1] ** 2
    return area**2 / (2.0 * n**2) * core


def var_ss2(plan: SamplePlan, strat: Stratification, f: AttributeField) -> float:
    """Unbiased variance estimator from within-stratum pairs."""
    _require_scheme(plan, "ss2")
    _check_sites_in_strata(plan, strat, 2)
    vals = _site_values(plan, f).reshape(-1, 2)
    diffs = vals[:, 0] - vals[:, 1]
    return 0.25 * float(np.sum(strat.areas**2 * diffs**2))


def var_urs_sample(plan: SamplePlan, f: AttributeField,
                   region: Region | None = None) -> float:
    """Sample-variance estimator of the uniform-placement estimator variance."""
    _require_scheme(plan, "urs")
    if plan.n < 2:
        raise EstimationError("sample variance needs n >= 2")
    region = region or f.domain
    vals = _site_values(plan, f)
    return region.area**2 * float(np.var(vals, ddof=1)) / plan.n


def confidence_interval(total: float, variance: float,
                        level: float = 0.95) -> tuple[float, float]:
    """Normal-approximation interval total +/- z * sqrt(variance)."""
    if variance < 0:
        raise EstimationError("variance estimate must be nonnegative")
    if not 0.0 < level < 1.0:
        raise EstimationError("confidence level must be in (0, 1)")
    z = normal_quantile(0.5 * (1.0 + level))
    half = z * math.sqrt(variance)
    return (total - half, total + half)


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

@dataclass
class EstimateReport:
    total: float
    variance_estimates: dict
    std_error: float
    ci: tuple[float, float]
    level: float
    scheme: str
    n: int
    region_area: float
    units: str = "m2"
    percent_cover: float | None = None
    diagnostics: dict | None = None
    seed_provenance: dict = dc_field(default_factory=dict)
    meta: dict = dc_field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "total": self.total,
            "variance_estimates": self.variance_estimates,
            "std_error": self.std_error,
            "ci_lower": self.ci[0],
            "ci_upper": self.ci[1],
            "level": self.level,
            "scheme": self.scheme,
            "n": self.n,
            "region_area": self.region_area,
            "units": self.units,
            "percent_cover": self.percent_cover,
            "diagnostics": self.diagnostics,
            "seed_provenance": self.seed_provenance,
            "meta": self.meta,
        }

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, sort_keys=True, indent=2)


_PRIMARY_VARIANCE = {
    "urs": "urs_sample",
    "ss1": "neighbor",
    "ss2": "two_per_stratum",
}


def build_report(plan: SamplePlan, f: AttributeField,
                 strat: Stratification | None = None,
                 region: Region | None = None, level: float = 0.95,
                 diagnostics: dict | None = None) -> EstimateReport:
    """Point estimate plus every variance estimator applicable to the plan."""
    region = region or f.domain
    variances: dict[str, float] = {}
    if plan.scheme == "urs":
        total = est_urs(plan, f, region)
        if plan.n >= 2:
            variances["urs_sample"] = var_urs_sample(plan, f, region)
    elif plan.scheme == "ss1":
        if strat is None:
            raise EstimationError("ss1 estimation needs the stratification")
        total = est_ss1(plan, strat, f)
        if plan.n >= 2:
            variances["naive"] = var_naive(plan, strat, f)
        if strat.is_equal_area(0.01):
            variances["neighbor"] = var_neighbor(plan, strat, f)
    elif plan.scheme == "ss2":
        if strat is None:
            raise EstimationError("ss2 estimation needs the stratification")
        total = est_ss2(plan, strat, f)
        variances["two_per_stratum"] = var_ss2(plan, strat, f)
    elif plan.scheme in ("tss", "sgs"):
        total = est_tss(plan, f, region)
    else:
        raise EstimationError(f"unknown scheme {plan.scheme!r}")

    primary = _PRIMARY_VARIANCE.get(plan.scheme)
    var = variances.get(primary) if primary else None
    if var is None and variances:
        var = next(iter(variances.values()))
    var = 0.0 if var is None else float(var)
    ci = confidence_interval(total, var, level)
    return EstimateReport(
        total=float(total),
        variance_estimates=variances,
        std_error=math.sqrt(var),
        ci=ci,
        level=level,
        scheme=plan.scheme,
        n=plan.n,
        region_area=region.area,
        percent_cover=None,
        diagnostics=diagnostics,
        seed_provenance=plan.seed_provenance,
    )

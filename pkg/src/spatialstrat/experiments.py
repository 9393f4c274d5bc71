"""Monte Carlo experiment engine: replication, rate fits, normality checks,
scheme comparisons and the canopy-coverage pipeline.

Replication is vectorized per stratum/cell with one substream each, so runs
are deterministic, independent of evaluation order and of the thread count
(per-stratum results are reduced in stratum order).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field

import numpy as np

from .estimators import EstimateReport, confidence_interval, var_neighbor
from .fields import AttributeField, CoverSpec, line_intercept_field
from .geometry import Region, rect
from .quadrature import (MomentTable, exact_var_ss, exact_var_ss2,
                         exact_var_urs, moments)
from .randomness import RandomStream
from .schemes import draw_ss1
from .stats import fit_loglog, ks_distance_normal, normal_quantile
from .stratify import (Stratification, diagnostics as strat_diagnostics,
                       equal_area_compact_partition, grid_partition,
                       sequential_index)


@dataclass
class RateFit:
    ns: list[int]
    variances: list[float]
    slope: float
    intercept: float
    r_squared: float


@dataclass
class SchemeReplication:
    scheme: str
    n: int
    estimates: np.ndarray
    mean: float
    variance: float
    extra: dict = dc_field(default_factory=dict)


def _map_strata(fn, count: int, threads: int):
    """Apply fn(i) for i in range(count), reducing in index order."""
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, range(count)))
    return [fn(i) for i in range(count)]


# ---------------------------------------------------------------------------
# batched replication per scheme
# ---------------------------------------------------------------------------

def urs_estimates(region: Region, f: AttributeField, n: int, reps: int,
                  stream: RandomStream) -> np.ndarray:
    if reps < 1:
        raise ValueError("need at least one replication")
    pts = region.uniform_points(stream.child(0), reps * n)
    vals = f.values(pts[:, 0], pts[:, 1]).reshape(reps, n)
    return region.area / n * vals.sum(axis=1)


def ss1_value_matrix(strat: Stratification, f: AttributeField, reps: int,
                     stream: RandomStream, threads: int = 1) -> np.ndarray:
    """(reps, n) field values; column i holds stratum i's replicated draws."""
    if reps < 1:
        raise ValueError("need at least one replication")

    def one(i):
        pts = strat.sample_stratum(i, stream.child(i), reps)
        return f.values(pts[:, 0], pts[:, 1])

    cols = _map_strata(one, strat.n, threads)
    return np.column_stack(cols)


def ss1_estimates(strat: Stratification, f: AttributeField, reps: int,
                  stream: RandomStream, threads: int = 1) -> np.ndarray:
    vals = ss1_value_matrix(strat, f, reps, stream, threads)
    return vals @ strat.areas


def ss2_estimates(strat: Stratification, f: AttributeField, reps: int,
                  stream: RandomStream, threads: int = 1,
                  with_variance: bool = False):
    """Two-per-stratum estimates (and variance estimates when requested)."""
    if reps < 1:
        raise ValueError("need at least one replication")

    def one(j):
        pts = strat.sample_stratum(j, stream.child(j), 2 * reps)
        vals = f.values(pts[:, 0], pts[:, 1])
        return vals[0::2], vals[1::2]

    pairs = _map_strata(one, strat.n, threads)
    est = np.zeros(reps)
    var = np.zeros(reps)
    for j, (v1, v2) in enumerate(pairs):
        a = strat.areas[j]
        est += 0.5 * a * (v1 + v2)
        var += 0.25 * a * a * (v1 - v2) ** 2
    return (est, var) if with_variance else est


def tss_estimates(region: Region, bounding, k: int, f: AttributeField,
                  reps: int, stream: RandomStream, threads: int = 1,
                  mode: str = "tss") -> np.ndarray:
    """Tessellation (one uniform per cell) or systematic-grid replication."""
    if reps < 1:
        raise ValueError("need at least one replication")
    from .schemes import _tessellation
    x0, y0, sx, sy, k = _tessellation(bounding, k)
    cell_area = sx * sy

    if mode == "sgs":
        u = stream.child(0).generator.random((reps, 2))
        est = np.zeros(reps)
        for iy in range(k):
            for ix in range(k):
                px = x0 + (ix + u[:, 0]) * sx
                py = y0 + (iy + u[:, 1]) * sy
                est += f.extended_values(px, py)
        return cell_area * est

    def one(idx):
        iy, ix = divmod(idx, k)
        u = stream.child(1 + idx).generator.random((reps, 2))
        px = x0 + (ix + u[:, 0]) * sx
        py = y0 + (iy + u[:, 1]) * sy
        return f.extended_values(px, py)

    cols = _map_strata(one, k * k, threads)
    return cell_area * np.sum(cols, axis=0)


def ss1_variance_estimates(strat: Stratification, f: AttributeField, reps: int,
                           stream: RandomStream, threads: int = 1) -> dict:
    """Replicated pooled and successive-difference variance estimates."""
    vals = ss1_value_matrix(strat, f, reps, stream, threads)
    n = strat.n
    terms = vals * strat.areas[None, :]
    totals = terms.sum(axis=1)
    naive = n / (n - 1) * np.sum((terms - totals[:, None] / n) ** 2, axis=1)
    y = vals[:, strat.order]
    area = strat.total_area
    neighbor = area**2 / (2.0 * n**2) * (
        y[:, 0] ** 2 + np.sum(np.diff(y, axis=1) ** 2, axis=1) + y[:, -1] ** 2)
    return {"estimates": terms.sum(axis=1), "naive": naive,
            "neighbor": neighbor}


def replicate(region: Region, f: AttributeField, schemes, n: int, reps: int,
              stream: RandomStream, strat: Stratification | None = None,
              threads: int = 1, out_dir: str | None = None) -> dict:
    """Replicated estimates per scheme at one design size.

    Every scheme draws from its own substream; per-replication estimates are
    streamed to ``estimates_<scheme>_<n>.csv`` under ``out_dir`` when given.
    Needs at least one replication and a square n for grid-strata schemes.
    """
    import os

    if reps < 1:
        raise ValueError("need at least one replication")
    schemes = [s.lower() for s in schemes]
    unknown = [s for s in schemes if s not in ("urs", "ss1", "ss2", "tss", "sgs")]
    if unknown:
        raise ValueError(f"unknown schemes {unknown}")
    k = math.isqrt(int(n))
    needs_grid = {"ss1", "ss2", "tss", "sgs"} & set(schemes)
    if needs_grid and strat is None and k * k != n:
        raise ValueError("grid-strata schemes need a square design size "
                         "or an explicit stratification")
    bounding = rect(*region.bbox)
    results: dict[str, SchemeReplication] = {}
    for idx, scheme in enumerate(schemes):
        sub = stream.child(idx)
        if scheme == "urs":
            est = urs_estimates(region, f, n, reps, sub)
        elif scheme == "ss1":
            s1 = strat or grid_partition(region, k)
            est = ss1_estimates(s1, f, reps, sub, threads)
        elif scheme == "ss2":
            if n % 2:
                raise ValueError("two-per-stratum schemes need even n")
            s2 = strat or grid_partition(region, k, k // 2)
            est = ss2_estimates(s2, f, reps, sub, threads)
        elif scheme == "tss":
            est = tss_estimates(region, bounding, k, f, reps, sub, threads, "tss")
        else:
            est = tss_estimates(region, bounding, k, f, reps, sub, threads, "sgs")
        rep = SchemeReplication(scheme=scheme, n=int(n), estimates=est,
                                mean=float(est.mean()),
                                variance=float(est.var(ddof=1)) if reps > 1 else 0.0)
        results[scheme] = rep
        if out_dir is not None:
            path = os.path.join(out_dir, f"estimates_{scheme}_{n}.csv")
            with open(path, "w") as fh:
                fh.write("replication,estimate\n")
                for i, v in enumerate(est):
                    fh.write(f"{i},{float(v)!r}\n")
    return results


# ---------------------------------------------------------------------------
# experiment-level operations
# ---------------------------------------------------------------------------

def fit_rate(ns, variances) -> RateFit:
    """Log-log least-squares rate fit over at least four design sizes."""
    ns = list(ns)
    variances = [float(v) for v in variances]
    if len(ns) < 4:
        raise ValueError("rate fitting needs at least four (n, variance) pairs")
    if any(v <= 0 for v in variances):
        raise ValueError("rate fitting needs positive variances")
    slope, intercept, r2 = fit_loglog(ns, variances)
    return RateFit(ns=ns, variances=variances, slope=slope,
                   intercept=intercept, r_squared=r2)


def clt_check(standardized, level: float = 0.95) -> dict:
    """Coverage of the central +/- z band and KS distance to standard normal."""
    z = np.asarray(standardized, dtype=float)
    if z.size < 10_000:
        raise ValueError("normality check needs at least 10^4 draws")
    zq = normal_quantile(0.5 * (1.0 + level))
    coverage = float(np.mean(np.abs(z) <= zq))
    return {"coverage": coverage, "ks_distance": ks_distance_normal(z),
            "n_draws": int(z.size), "level": level, "z": zq}


def standardize(estimates: np.ndarray, true_total: float,
                true_sd: float) -> np.ndarray:
    if true_sd <= 0:
        raise ValueError("cannot standardize with zero variance")
    return (np.asarray(estimates) - true_total) / true_sd


def stratification_for(region: Region, n: int, mode: str = "grid",
                       seed: int | RandomStream = 0,
                       resolution: int = 256) -> Stratification:
    """Grid strata for square counts on rectangles, else compact clustering."""
    if mode == "grid":
        k = math.isqrt(n)
        if k * k != n:
            raise ValueError(f"grid strata need a square count, got {n}")
        return grid_partition(region, k)
    if mode == "cluster":
        strat = equal_area_compact_partition(region, n, resolution=resolution,
                                             seed=seed)
        sequential_index(strat)
        return strat
    raise ValueError(f"unknown strata mode {mode!r}")


def sgs_exact_variance(region: Region, f: AttributeField, bounding, k: int,
                       total: float, resolution: int = 64) -> float:
    """Quadrature variance of the systematic-grid estimator (offset average)."""
    from .schemes import _tessellation
    x0, y0, sx, sy, k = _tessellation(bounding, k)
    cell_area = sx * sy

    def level(m):
        u = (np.arange(m) + 0.5) / m
        ux, uy = np.meshgrid(u, u)
        est = np.zeros(ux.shape)
        for iy in range(k):
            for ix in range(k):
                est += f.extended_values(x0 + (ix + ux) * sx,
                                         y0 + (iy + uy) * sy)
        est *= cell_area
        return float(np.mean((est - total) ** 2))

    v1, v2 = level(resolution), level(2 * resolution)
    return max((4.0 * v2 - v1) / 3.0, 0.0)


def extended_field_on(f: AttributeField, bounding: Region) -> AttributeField:
    """The zero-extension of a field, treated as a field on the superset."""
    return AttributeField(
        evaluator=lambda x, y: f.extended_values(x, y),
        domain=bounding, smoothness_class="piecewise_holder",
        holder_alpha=f.holder_alpha, holder_H=None, sup_bound=f.sup_bound,
        label=f.label + "_extended")


def compare_schemes(region: Region, f: AttributeField, ns, reps: int,
                    stream: RandomStream, resolution: int = 512,
                    threads: int = 1, schemes=("urs", "ss1", "ss2", "tss", "sgs"),
                    empirical: bool = True) -> dict:
    """Oracle and empirical estimator variances per scheme and design size.

    Uniform placement must never beat one-per-stratum placement on
    equal-size strata; any violation is flagged in the result.
    """
    rows = []
    violations = []
    bbox = region.bbox
    bounding = rect(*bbox)
    for idx_n, n in enumerate(ns):
        k = math.isqrt(int(n))
        if k * k != n:
            raise ValueError("scheme comparison uses square design sizes")
        strat = grid_partition(region, k) if as_square_grid_ok(region) else None
        if strat is None:
            raise ValueError("scheme comparison requires a rectangular region")
        m = moments(f, strat, resolution)
        oracle = {
            "urs": exact_var_urs(m, n),
            "ss1": exact_var_ss(m),
        }
        if "ss2" in schemes and k % 2 == 0:
            half = grid_partition(region, k, k // 2)
            oracle["ss2"] = exact_var_ss2(moments(f, half, resolution))
        if "tss" in schemes:
            ext = extended_field_on(f, bounding)
            cells = grid_partition(bounding, k)
            oracle["tss"] = exact_var_ss(moments(ext, cells, resolution))
        if "sgs" in schemes:
            oracle["sgs"] = sgs_exact_variance(region, f, bounding, k, m.total)
        emp = {}
        if empirical and reps > 1:
            s_base = stream.child(idx_n)
            emp["urs"] = urs_estimates(region, f, n, reps, s_base.child(0))
            emp["ss1"] = ss1_estimates(strat, f, reps, s_base.child(1), threads)
            if "ss2" in oracle:
                emp["ss2"] = ss2_estimates(half, f, reps, s_base.child(2), threads)
            if "tss" in oracle:
                emp["tss"] = tss_estimates(region, bounding, k, f, reps,
                                           s_base.child(3), threads, "tss")
            if "sgs" in oracle:
                emp["sgs"] = tss_estimates(region, bounding, k, f, reps,
                                           s_base.child(4), threads, "sgs")
        for scheme in schemes:
            if scheme not in oracle:
                continue
            row = {"n": int(n), "scheme": scheme,
                   "oracle_variance": float(oracle[scheme])}
            if scheme in emp:
                est = emp[scheme]
                row["empirical_mean"] = float(est.mean())
                row["empirical_variance"] = float(est.var(ddof=1))
            rows.append(row)
        if oracle["urs"] < oracle["ss1"] * (1.0 - 1e-12):
            violations.append(int(n))
    return {"rows": rows, "urs_vs_ss_violations": violations}


def as_square_grid_ok(region: Region) -> bool:
    from .geometry import as_rectangle
    return as_rectangle(region) is not None


# ---------------------------------------------------------------------------
# canopy-coverage pipeline
# ---------------------------------------------------------------------------

def canopy_pipeline(region: Region, cover: Region | None, n: int,
                    transect_length: float, transect_angle: float = 0.0,
                    seed: int | RandomStream = 0, resolution: int = 256,
                    level: float = 0.95, check_clearance: bool = True,
                    strat: Stratification | None = None) -> EstimateReport:
    """Line-intercept coverage survey on equal-size compact strata.

    Builds the stratification (unless one is supplied), indexes it
    sequentially, places one transect midpoint per stratum, sums intercepted
    cover lengths into the total estimate, and attaches the
    successive-difference variance with a normal interval.
    """
    stream = seed if isinstance(seed, RandomStream) else RandomStream(int(seed))
    if strat is None:
        strat = equal_area_compact_partition(region, n, resolution=resolution,
                                             seed=stream.child(0))
        sequential_index(strat)

    spec = None
    if cover is not None:
        spec = CoverSpec(cover, transect_length, transect_angle)
        f = line_intercept_field(spec, region)
        if check_clearance:
            from .fields import coverage_clearance_report
            coverage_clearance_report(spec, region, resolution=max(resolution, 512))
    else:
        f = AttributeField(evaluator=lambda x, y: np.zeros(np.broadcast(x, y).shape),
                           domain=region, smoothness_class="line_intercept",
                           holder_alpha=1.0, holder_H=0.0, sup_bound=0.0,
                           label="empty_cover")

    plan = draw_ss1(strat, stream.child(1))
    from .estimators import est_ss1
    total = est_ss1(plan, strat, f)
    variance = var_neighbor(plan, strat, f)
    ci = confidence_interval(total, variance, level)
    diag = strat_diagnostics(strat)
    return EstimateReport(
        total=total,
        variance_estimates={"neighbor": variance},
        std_error=math.sqrt(variance),
        ci=ci, level=level, scheme="ss1", n=strat.n,
        region_area=region.area, units="m2",
        percent_cover=100.0 * total / region.area,
        diagnostics=diag.to_dict(),
        seed_provenance=stream.provenance(),
        meta={"transect_length": transect_length,
              "transect_angle": transect_angle,
              "cover_area": None if cover is None else cover.area},
    )

"""Design-based estimation of spatial totals over planar regions.

Place sample sites by uniform, tessellation, systematic-grid or
one/two-per-stratum schemes, estimate the integral of an attribute field,
and verify estimator properties against an independent quadrature oracle.
"""

from .estimators import (EstimateReport, build_report, confidence_interval,
                         est_ss1, est_ss2, est_tss, est_urs, var_naive,
                         var_neighbor, var_ss2, var_urs_sample)
from .fields import (AttributeField, CoverSpec, builtin_field, extended_eval,
                     line_intercept_field)
from .geometry import (Disk, DisjointUnion, Ellipse, Point, PolygonalRegion,
                       Region, Segment, area, contains, diameter,
                       intersection_length, rect, uniform_point, unit_square)
from .quadrature import (MomentTable, bias_naive, bias_neighbor, exact_var_ss,
                         exact_var_ss2, exact_var_urs, holder_bound_check,
                         lyapunov_ratio, moments)
from .randomness import RandomStream
from .rasterize import Raster, rasterize
from .regionio import region_from_config, region_from_geojson
from .schemes import (SamplePlan, draw_sgs, draw_ss1, draw_ss2, draw_tss,
                      draw_urs)
from .stratify import (Diagnostics, Stratification, StratificationError,
                       diagnostics, equal_area_compact_partition,
                       grid_partition, sequential_index)
from .experiments import (RateFit, canopy_pipeline, clt_check, compare_schemes,
                          fit_rate, replicate)

__version__ = "0.1.0"

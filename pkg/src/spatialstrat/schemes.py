"""Sample-site placement schemes with reproducible substreams.

Five placements are supported: independent uniform sites on the region
(URS), one or two independent uniform sites per stratum (SS1/SS2), one site
per cell of a rectangular tessellation covering the region (TSS), and a
single random offset replicated across all tessellation cells (SGS).
Tessellation sites may fall outside the region; they are kept and flagged so
estimation can use the zero-extended field.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .geometry import Region, as_rectangle
from .randomness import RandomStream
from .stratify import Stratification, grid_partition

SCHEMES = ("urs", "ss1", "ss2", "tss", "sgs")


@dataclass
class SamplePlan:
    scheme: str
    sites: np.ndarray                  # (n, 2)
    strata: np.ndarray                 # stratum/cell index per site, -1 if none
    nominal_n: int
    in_region: np.ndarray | None = None  # TSS/SGS: site falls inside the region
    seed_provenance: dict = dc_field(default_factory=dict)
    meta: dict = dc_field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.sites)

    @property
    def realized_in_region(self) -> int:
        if self.in_region is None:
            return self.n
        return int(np.count_nonzero(self.in_region))

    def to_csv(self, path) -> None:
        in_a = (np.ones(self.n, dtype=bool) if self.in_region is None
                else self.in_region)
        with open(path, "w") as fh:
            fh.write("site_id,x,y,stratum,in_region\n")
            for i in range(self.n):
                fh.write(f"{i},{self.sites[i, 0]!r},{self.sites[i, 1]!r},"
                         f"{int(self.strata[i])},{int(in_a[i])}\n")

    def to_json_dict(self) -> dict:
        return {
            "scheme": self.scheme,
            "nominal_n": self.nominal_n,
            "sites": self.sites.tolist(),
            "strata": self.strata.tolist(),
            "in_region": None if self.in_region is None
            else self.in_region.astype(int).tolist(),
            "seed_provenance": self.seed_provenance,
            "meta": self.meta,
        }

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, sort_keys=True)

    @classmethod
    def from_json_dict(cls, payload: dict) -> "SamplePlan":
        in_region = payload.get("in_region")
        return cls(
            scheme=payload["scheme"],
            sites=np.array(payload["sites"], dtype=np.float64),
            strata=np.array(payload["strata"], dtype=np.int64),
            nominal_n=int(payload["nominal_n"]),
            in_region=None if in_region is None
            else np.array(in_region, dtype=bool),
            seed_provenance=dict(payload.get("seed_provenance", {})),
            meta=dict(payload.get("meta", {})),
        )

    @classmethod
    def load(cls, path) -> "SamplePlan":
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))


def draw_urs(region: Region, n: int, stream: RandomStream) -> SamplePlan:
    """n independent uniform sites on the region."""
    if n < 1:
        raise ValueError("need at least one sample site")
    sites = region.uniform_points(stream.child(0), int(n))
    return SamplePlan("urs", sites, np.full(n, -1, dtype=np.int64), int(n),
                      seed_provenance=stream.provenance())


def draw_ss1(strat: Stratification, stream: RandomStream) -> SamplePlan:
    """One independent uniform site in each stratum (stratum i from substream i)."""
    sites = np.empty((strat.n, 2))
    for i in range(strat.n):
        sites[i] = strat.sample_stratum(i, stream.child(i), 1)[0]
    return SamplePlan("ss1", sites, np.arange(strat.n, dtype=np.int64), strat.n,
                      seed_provenance=stream.provenance())


def draw_ss2(strat: Stratification, stream: RandomStream) -> SamplePlan:
    """Two independent uniform sites per stratum (total n = 2 * strata)."""
    n = 2 * strat.n
    sites = np.empty((n, 2))
    strata = np.empty(n, dtype=np.int64)
    for j in range(strat.n):
        sites[2 * j:2 * j + 2] = strat.sample_stratum(j, stream.child(j), 2)
        strata[2 * j:2 * j + 2] = j
    return SamplePlan("ss2", sites, strata, n,
                      seed_provenance=stream.provenance())


def _tessellation(bounding: Region | tuple, k_per_side: int):
    if isinstance(bounding, Region):
        bounds = as_rectangle(bounding)
        if bounds is None:
            raise ValueError("the tessellated superset must be a rectangle")
    else:
        bounds = tuple(float(v) for v in bounding)
    x0, y0, x1, y1 = bounds
    k = int(k_per_side)
    if k < 1:
        raise ValueError("k_per_side must be >= 1")
    return x0, y0, (x1 - x0) / k, (y1 - y0) / k, k


def draw_tss(region: Region, bounding: Region | tuple, k_per_side: int,
             stream: RandomStream, random_shift: bool = False) -> SamplePlan:
    """One uniform site per tessellation cell of a rectangle covering the region.

    With `random_shift` the cell lattice is offset by a uniform in-cell
    vector (and extended by one row/column so the rectangle stays covered);
    the number of sites landing inside the region is then a random variable
    either way unless the region is exactly tessellated.
    """
    x0, y0, sx, sy, k = _tessellation(bounding, k_per_side)
    if random_shift:
        shift = stream.child(0).uniform(2)
        ox = x0 + (shift[0] - 1.0) * sx
        oy = y0 + (shift[1] - 1.0) * sy
        ncell = k + 1
    else:
        ox, oy = x0, y0
        ncell = k
    sites = np.empty((ncell * ncell, 2))
    for iy in range(ncell):
        for ix in range(ncell):
            idx = iy * ncell + ix
            u = stream.child(1 + idx).uniform(2)
            sites[idx] = (ox + (ix + u[0]) * sx, oy + (iy + u[1]) * sy)
    in_a = np.asarray(region.contains(sites[:, 0], sites[:, 1]))
    return SamplePlan("tss", sites, np.arange(len(sites), dtype=np.int64),
                      len(sites), in_region=in_a,
                      seed_provenance=stream.provenance(),
                      meta={"cell_area": sx * sy, "k_per_side": k,
                            "random_shift": bool(random_shift)})


def draw_sgs(region: Region, bounding: Region | tuple, k_per_side: int,
             stream: RandomStream) -> SamplePlan:
    """One uniform offset in the reference cell, replicated to every cell."""
    x0, y0, sx, sy, k = _tessellation(bounding, k_per_side)
    u = stream.child(0).uniform(2)
    ix, iy = np.meshgrid(np.arange(k), np.arange(k))
    sites = np.column_stack([
        x0 + (ix.ravel() + u[0]) * sx,
        y0 + (iy.ravel() + u[1]) * sy,
    ])
    in_a = np.asarray(region.contains(sites[:, 0], sites[:, 1]))
    return SamplePlan("sgs", sites, np.arange(len(sites), dtype=np.int64),
                      len(sites), in_region=in_a,
                      seed_provenance=stream.provenance(),
                      meta={"cell_area": sx * sy, "k_per_side": k})


def tessellation_for(region: Region, k_per_side: int) -> Stratification:
    """Grid stratification of the region's bounding rectangle (TSS cells)."""
    from .geometry import rect
    x0, y0, x1, y1 = region.bbox
    return grid_partition(rect(x0, y0, x1, y1), k_per_side)


def expected_sites_inside(region: Region, bounding: Region | tuple,
                          k_per_side: int) -> float:
    """Mean number of tessellation sites falling inside the region."""
    x0, y0, sx, sy, k = _tessellation(bounding, k_per_side)
    return region.area / (sx * sy)

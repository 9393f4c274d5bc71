"""Region ingestion: GeoJSON polygons and structured shape configs.

GeoJSON coordinates are interpreted as planar meters (no projection is
applied).  Analytic shapes (rectangles, disks, ellipses, unions) come from
the tool's own config dictionaries, which are also what regions serialize
back to.
"""

from __future__ import annotations

import json
import os

from .geometry import (Disk, DisjointUnion, Ellipse, PolygonalRegion, Region,
                       rect)


def region_from_geojson(source) -> Region:
    """Build a region from a GeoJSON mapping, JSON string, or file path."""
    if isinstance(source, (str, os.PathLike)):
        text = str(source)
        if text.lstrip().startswith("{"):
            obj = json.loads(text)
        else:
            with open(source) as fh:
                obj = json.load(fh)
    else:
        obj = source

    gtype = obj.get("type")
    if gtype == "FeatureCollection":
        feats = obj.get("features", [])
        if not feats:
            raise ValueError("GeoJSON FeatureCollection is empty")
        regions = [region_from_geojson(f) for f in feats]
        return regions[0] if len(regions) == 1 else DisjointUnion(regions)
    if gtype == "Feature":
        return region_from_geojson(obj["geometry"])
    if gtype == "Polygon":
        coords = obj["coordinates"]
        return PolygonalRegion([coords[0]], list(coords[1:]))
    if gtype == "MultiPolygon":
        members = [PolygonalRegion([poly[0]], list(poly[1:]))
                   for poly in obj["coordinates"]]
        return members[0] if len(members) == 1 else DisjointUnion(members)
    raise ValueError(f"unsupported GeoJSON type {gtype!r}")


def region_to_geojson(region: Region) -> dict:
    if isinstance(region, PolygonalRegion):
        if len(region.outers) == 1:
            rings = [region.outers[0].tolist()] + [h.tolist() for h in region.holes]
            for ring in rings:
                ring.append(ring[0])
            return {"type": "Polygon", "coordinates": rings}
        polys = []
        for j, outer in enumerate(region.outers):
            rings = [outer.tolist()]
            for h, parent in zip(region.holes, region._hole_parent):
                if parent == j:
                    rings.append(h.tolist())
            for ring in rings:
                ring.append(ring[0])
            polys.append(rings)
        return {"type": "MultiPolygon", "coordinates": polys}
    raise ValueError("only polygonal regions export to GeoJSON")


def region_from_config(cfg: dict) -> Region:
    """Dispatch on config 'kind': rect, polygon, disk, ellipse, union, geojson."""
    kind = cfg.get("kind")
    if kind == "rect":
        if "width" in cfg:
            x0 = float(cfg.get("x0", 0.0))
            y0 = float(cfg.get("y0", 0.0))
            return rect(x0, y0, x0 + float(cfg["width"]), y0 + float(cfg["height"]))
        return rect(float(cfg["x0"]), float(cfg["y0"]),
                    float(cfg["x1"]), float(cfg["y1"]))
    if kind == "polygon":
        return PolygonalRegion(cfg["outers"], cfg.get("holes", []))
    if kind == "disk":
        return Disk(cfg["center"], float(cfg["radius"]))
    if kind == "ellipse":
        return Ellipse(cfg["center"], float(cfg["semi_x"]), float(cfg["semi_y"]),
                       float(cfg.get("angle", 0.0)))
    if kind == "union":
        return DisjointUnion([region_from_config(m) for m in cfg["members"]])
    if kind == "geojson":
        path = cfg["path"]
        if not os.path.exists(path):
            raise FileNotFoundError(f"region file not found: {path}")
        return region_from_geojson(path)
    raise ValueError(f"unknown region kind {kind!r}")

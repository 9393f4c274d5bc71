"""SVG rendering of stratifications and sample plans."""

from __future__ import annotations

import colorsys

import numpy as np


def _palette(n: int) -> list[str]:
    colors = []
    for i in range(n):
        h = (i * 0.6180339887498949) % 1.0
        r, g, b = colorsys.hls_to_rgb(h, 0.62, 0.55)
        colors.append(f"#{int(r * 255):02x}{int(g * 255):02x}{int(b * 255):02x}")
    return colors


def stratification_svg(strat, plan=None, width: int = 640) -> str:
    """Strata as colored cells, sequential path, optional sample sites."""
    g = strat.raster.grid
    span_x = g.sx * g.nx
    span_y = g.sy * g.ny
    height = max(1, round(width * span_y / span_x))
    sx = width / span_x
    sy = height / span_y

    def to_px(x, y):
        return ((x - g.x0) * sx, height - (y - g.y0) * sy)

    colors = _palette(strat.n)
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
             f'height="{height}" viewBox="0 0 {width} {height}">',
             f'<rect width="{width}" height="{height}" fill="white"/>']
    a = strat.assignment
    cw = g.sx * sx
    ch = g.sy * sy
    for iy in range(g.ny):
        ix = 0
        while ix < g.nx:
            s = a[iy, ix]
            if s < 0:
                ix += 1
                continue
            run = ix
            while run + 1 < g.nx and a[iy, run + 1] == s:
                run += 1
            x_px = (ix * g.sx) * sx
            y_px = height - ((iy + 1) * g.sy) * sy
            parts.append(
                f'<rect x="{x_px:.2f}" y="{y_px:.2f}" '
                f'width="{cw * (run - ix + 1):.2f}" height="{ch:.2f}" '
                f'fill="{colors[s]}" stroke="none"/>')
            ix = run + 1
    # sequential path through stratum centroids
    pts = [to_px(*strat.centroids[i]) for i in strat.order]
    path = " ".join(f"{x:.1f},{y:.1f}" for x, y in pts)
    parts.append(f'<polyline points="{path}" fill="none" stroke="black" '
                 f'stroke-width="1" opacity="0.6"/>')
    if plan is not None:
        for (x, y) in plan.sites:
            px, py = to_px(x, y)
            parts.append(f'<circle cx="{px:.2f}" cy="{py:.2f}" r="3" '
                         f'fill="black"/>')
    parts.append("</svg>")
    return "\n".join(parts)


def plan_svg(region, plan, width: int = 640) -> str:
    """Region bounding box with sample sites (inside sites filled)."""
    x0, y0, x1, y1 = region.bbox
    span_x, span_y = x1 - x0, y1 - y0
    height = max(1, round(width * span_y / span_x))
    sx, sy = width / span_x, height / span_y
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
             f'height="{height}" viewBox="0 0 {width} {height}">',
             f'<rect width="{width}" height="{height}" fill="white" '
             f'stroke="black"/>']
    inside = (plan.in_region if plan.in_region is not None
              else np.ones(plan.n, dtype=bool))
    for (x, y), inref in zip(plan.sites, inside):
        px = (x - x0) * sx
        py = height - (y - y0) * sy
        fill = "black" if inref else "none"
        parts.append(f'<circle cx="{px:.2f}" cy="{py:.2f}" r="3" '
                     f'fill="{fill}" stroke="black"/>')
    parts.append("</svg>")
    return "\n".join(parts)

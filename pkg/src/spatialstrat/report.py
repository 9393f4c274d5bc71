"""Human-readable report formatting (hectares and percent at the edge)."""

from __future__ import annotations

from decimal import ROUND_HALF_EVEN, Decimal

M2_PER_HECTARE = 10_000.0


def format_percent(value: float) -> str:
    """Two decimals, round-half-even."""
    quantized = Decimal(repr(float(value))).quantize(Decimal("0.01"),
                                                     rounding=ROUND_HALF_EVEN)
    return f"{quantized}%"


def format_area(value_m2: float, units: str = "m2") -> str:
    if units == "m2":
        return f"{value_m2 / M2_PER_HECTARE:,.2f} ha"
    return f"{value_m2:,.6g} {units}"


def format_report(report, units: str | None = None) -> str:
    """Fixed-width text table for an estimate report."""
    units = units or report.units
    lines = []
    lines.append(f"scheme            : {report.scheme}")
    lines.append(f"sample size       : {report.n}")
    lines.append(f"region area       : {format_area(report.region_area, units)}")
    lines.append(f"total estimate    : {format_area(report.total, units)}")
    if report.percent_cover is not None:
        lines.append(f"percent cover     : "
                     f"{format_percent(report.percent_cover)}")
    elif report.region_area > 0 and units == "m2":
        lines.append(f"percent of region : "
                     f"{format_percent(100.0 * report.total / report.region_area)}")
    lines.append(f"std error         : {format_area(report.std_error, units)}")
    lo, hi = report.ci
    lines.append(f"{int(report.level * 100)}% interval      : "
                 f"({format_area(lo, units)}, {format_area(hi, units)})")
    for name, value in sorted(report.variance_estimates.items()):
        lines.append(f"variance [{name:<16s}]: {value!r}")
    if report.diagnostics:
        lines.append("stratification diagnostics:")
        for key, value in sorted(report.diagnostics.items()):
            if value is not None:
                lines.append(f"  {key}: {value}")
    return "\n".join(lines) + "\n"

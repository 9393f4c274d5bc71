"""Command-line front end.

Subcommands: stratify, sample, estimate, oracle, rates, clt, compare,
canopy.  All inputs come from one JSON config file with flat keys;
--seed/--reps/--n/--out/--threads/--level override file values.  Outputs are
deterministic given (config, seed): exit 0 on success, 2 on configuration
errors (the message names the offending key), 1 on IO failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from .estimators import build_report
from .experiments import (canopy_pipeline, clt_check, compare_schemes,
                          fit_rate, ss1_estimates, standardize,
                          stratification_for, tss_estimates, urs_estimates,
                          ss2_estimates)
from .fields import builtin_field
from .geometry import rect
from .quadrature import exact_var_ss, exact_var_urs, moments
from .randomness import RandomStream
from .regionio import region_from_config
from .render import plan_svg, stratification_svg
from .report import format_report
from .schemes import draw_sgs, draw_ss1, draw_ss2, draw_tss, draw_urs
from .stratify import diagnostics as strat_diagnostics
from .stratify import sequential_index


class ConfigError(Exception):
    def __init__(self, key: str, message: str):
        super().__init__(f"config key '{key}': {message}")
        self.key = key


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    if not os.path.exists(path):
        raise ConfigError("config", f"file not found: {path}")
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON: {exc}") from exc


def _require(cfg: dict, key: str):
    if key not in cfg or cfg[key] is None:
        raise ConfigError(key, "required but missing")
    return cfg[key]


def _region(cfg: dict, key: str = "region"):
    spec = _require(cfg, key)
    try:
        return region_from_config(spec)
    except FileNotFoundError as exc:
        raise ConfigError(key, str(exc)) from exc
    except (KeyError, ValueError) as exc:
        raise ConfigError(key, str(exc)) from exc


def _field(cfg: dict, domain):
    spec = _require(cfg, "field")
    fid = spec.get("id")
    if fid is None:
        raise ConfigError("field.id", "required but missing")
    params = dict(spec.get("params", {}))
    if "region" in params and isinstance(params["region"], dict):
        params["region"] = region_from_config(params["region"])
    try:
        return builtin_field(fid, domain, **params)
    except ValueError as exc:
        raise ConfigError("field", str(exc)) from exc


def _seed(cfg: dict) -> int:
    seed = _require(cfg, "seed")
    if not isinstance(seed, int):
        raise ConfigError("seed", "must be an integer (no wall-clock seeding)")
    return seed


def _outdir(cfg: dict) -> str:
    out = cfg.get("out", "out")
    os.makedirs(out, exist_ok=True)
    return out


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _strat_for(cfg: dict, region, n: int, stream: RandomStream):
    mode = cfg.get("strata", "grid" if _is_square(n) else "cluster")
    try:
        return stratification_for(
            region, n, mode=mode, seed=stream,
            resolution=int(cfg.get("cluster_resolution", 256)))
    except ValueError as exc:
        raise ConfigError("strata", str(exc)) from exc


def _is_square(n: int) -> bool:
    return math.isqrt(n) ** 2 == n


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_stratify(cfg: dict) -> int:
    region = _region(cfg)
    n = int(_require(cfg, "n"))
    stream = RandomStream(_seed(cfg))
    strat = _strat_for(cfg, region, n, stream)
    sequential_index(strat)
    out = _outdir(cfg)
    strat.save(os.path.join(out, "strata.json"))
    diag = strat_diagnostics(strat)
    _write_json(os.path.join(out, "diagnostics.json"),
                {"diagnostics": diag.to_dict(), "config": cfg})
    with open(os.path.join(out, "strata.svg"), "w") as fh:
        fh.write(stratification_svg(strat))
    print(f"wrote strata.json, diagnostics.json, strata.svg to {out}")
    return 0


def cmd_sample(cfg: dict) -> int:
    region = _region(cfg)
    scheme = str(_require(cfg, "scheme")).lower()
    stream = RandomStream(_seed(cfg))
    out = _outdir(cfg)
    strat = None
    if scheme == "urs":
        plan = draw_urs(region, int(_require(cfg, "n")), stream.child(1))
    elif scheme in ("ss1", "ss2"):
        n = int(_require(cfg, "n"))
        strata_count = n if scheme == "ss1" else n // 2
        if scheme == "ss2" and n % 2:
            raise ConfigError("n", "two-per-stratum designs need even n")
        strat = _strat_for(cfg, region, strata_count, stream.child(0))
        sequential_index(strat)
        plan = (draw_ss1 if scheme == "ss1" else draw_ss2)(strat, stream.child(1))
    elif scheme in ("tss", "sgs"):
        k = int(_require(cfg, "k_per_side"))
        bounding = rect(*region.bbox)
        if scheme == "tss":
            plan = draw_tss(region, bounding, k, stream.child(1),
                            random_shift=bool(cfg.get("random_shift", False)))
        else:
            plan = draw_sgs(region, bounding, k, stream.child(1))
    else:
        raise ConfigError("scheme", f"unknown scheme {scheme!r}")
    plan.to_csv(os.path.join(out, "plan.csv"))
    plan.save(os.path.join(out, "plan.json"))
    svg = (stratification_svg(strat, plan) if strat is not None
           else plan_svg(region, plan))
    with open(os.path.join(out, "plan.svg"), "w") as fh:
        fh.write(svg)
    print(f"wrote plan.csv, plan.json, plan.svg to {out}")
    return 0


def cmd_estimate(cfg: dict) -> int:
    region = _region(cfg)
    field = _field(cfg, region)
    scheme = str(_require(cfg, "scheme")).lower()
    level = float(cfg.get("level", 0.95))
    stream = RandomStream(_seed(cfg))
    out = _outdir(cfg)
    strat = None
    diagnostics_dict = None
    if scheme == "urs":
        plan = draw_urs(region, int(_require(cfg, "n")), stream.child(1))
    elif scheme in ("ss1", "ss2"):
        n = int(_require(cfg, "n"))
        strata_count = n if scheme == "ss1" else n // 2
        if scheme == "ss2" and n % 2:
            raise ConfigError("n", "two-per-stratum designs need even n")
        strat = _strat_for(cfg, region, strata_count, stream.child(0))
        sequential_index(strat)
        diagnostics_dict = strat_diagnostics(strat).to_dict()
        plan = (draw_ss1 if scheme == "ss1" else draw_ss2)(strat, stream.child(1))
    elif scheme in ("tss", "sgs"):
        k = int(_require(cfg, "k_per_side"))
        bounding = rect(*region.bbox)
        draw = draw_tss if scheme == "tss" else draw_sgs
        plan = draw(region, bounding, k, stream.child(1))
    else:
        raise ConfigError("scheme", f"unknown scheme {scheme!r}")
    report = build_report(plan, field, strat=strat, region=region, level=level,
                          diagnostics=diagnostics_dict)
    payload = report.to_json_dict()
    payload["config"] = cfg
    _write_json(os.path.join(out, "report.json"), payload)
    text = format_report(report)
    with open(os.path.join(out, "report.txt"), "w") as fh:
        fh.write(text)
    sys.stdout.write(text)
    return 0


def cmd_oracle(cfg: dict) -> int:
    region = _region(cfg)
    field = _field(cfg, region)
    n = int(_require(cfg, "n"))
    stream = RandomStream(_seed(cfg))
    strat = _strat_for(cfg, region, n, stream)
    sequential_index(strat)
    resolution = int(cfg.get("resolution", 512))
    m = moments(field, strat, resolution)
    out = _outdir(cfg)
    m.to_csv(os.path.join(out, "moments.csv"))
    payload = {
        "total": m.total,
        "square_total": m.square_total,
        "area": m.area,
        "ss_variance": exact_var_ss(m),
        "urs_variance": exact_var_urs(m, n),
        "resolution": list(m.resolution),
        "error_estimates": m.error_estimates,
        "flagged": m.flagged,
        "config": cfg,
    }
    _write_json(os.path.join(out, "oracle.json"), payload)
    print(f"total={m.total!r} square_total={m.square_total!r} "
          f"ss_variance={payload['ss_variance']!r} "
          f"urs_variance={payload['urs_variance']!r}")
    return 0


def cmd_rates(cfg: dict) -> int:
    region = _region(cfg)
    field = _field(cfg, region)
    ns = [int(v) for v in _require(cfg, "n_list")]
    resolution = int(cfg.get("resolution", 512))
    stream = RandomStream(_seed(cfg))
    out = _outdir(cfg)
    rows = []
    for n in ns:
        strat = _strat_for(cfg, region, n, stream.child(n))
        m = moments(field, strat, resolution)
        rows.append({"n": n, "ss_variance": exact_var_ss(m),
                     "urs_variance": exact_var_urs(m, n)})
    fit_ss = fit_rate(ns, [r["ss_variance"] for r in rows])
    fit_urs = fit_rate(ns, [r["urs_variance"] for r in rows])
    with open(os.path.join(out, "rates.csv"), "w") as fh:
        fh.write("n,ss_variance,urs_variance\n")
        for r in rows:
            fh.write(f"{r['n']},{r['ss_variance']!r},{r['urs_variance']!r}\n")
    _write_json(os.path.join(out, "rates.json"), {
        "rows": rows,
        "ss_slope": fit_ss.slope, "ss_r_squared": fit_ss.r_squared,
        "urs_slope": fit_urs.slope, "urs_r_squared": fit_urs.r_squared,
        "config": cfg,
    })
    print(f"stratified slope {fit_ss.slope:+.4f} "
          f"(uniform {fit_urs.slope:+.4f}) over n={ns}")
    return 0


def cmd_clt(cfg: dict) -> int:
    region = _region(cfg)
    field = _field(cfg, region)
    n = int(_require(cfg, "n"))
    reps = int(_require(cfg, "replications"))
    level = float(cfg.get("level", 0.95))
    threads = int(cfg.get("threads", 1))
    stream = RandomStream(_seed(cfg))
    strat = _strat_for(cfg, region, n, stream.child(0))
    m = moments(field, strat, int(cfg.get("resolution", 512)))
    sigma = math.sqrt(exact_var_ss(m))
    est = ss1_estimates(strat, field, reps, stream.child(1), threads)
    result = clt_check(standardize(est, m.total, sigma), level)
    out = _outdir(cfg)
    _write_json(os.path.join(out, "clt.json"), {**result, "config": cfg})
    print(f"coverage={result['coverage']:.4f} "
          f"ks_distance={result['ks_distance']:.4f} over {reps} replications")
    return 0


def cmd_compare(cfg: dict) -> int:
    region = _region(cfg)
    field = _field(cfg, region)
    ns = [int(v) for v in _require(cfg, "n_list")]
    reps = int(cfg.get("replications", 0))
    threads = int(cfg.get("threads", 1))
    stream = RandomStream(_seed(cfg))
    result = compare_schemes(region, field, ns, reps, stream,
                             resolution=int(cfg.get("resolution", 512)),
                             threads=threads, empirical=reps > 1)
    out = _outdir(cfg)
    cols = ["n", "scheme", "oracle_variance", "empirical_mean",
            "empirical_variance"]
    with open(os.path.join(out, "compare.csv"), "w") as fh:
        fh.write(",".join(cols) + "\n")
        for row in result["rows"]:
            fh.write(",".join(repr(row[c]) if isinstance(row.get(c), float)
                              else str(row.get(c, "")) for c in cols) + "\n")
    _write_json(os.path.join(out, "compare.json"), {**result, "config": cfg})
    flagged = result["urs_vs_ss_violations"]
    print(f"{len(result['rows'])} rows; "
          f"uniform-vs-stratified violations: {flagged or 'none'}")
    return 0


def cmd_canopy(cfg: dict) -> int:
    region = _region(cfg)
    cover = _region(cfg, "cover") if cfg.get("cover") else None
    n = int(_require(cfg, "n"))
    length = float(_require(cfg, "transect_length"))
    angle = float(cfg.get("transect_angle", 0.0))
    level = float(cfg.get("level", 0.95))
    report = canopy_pipeline(region, cover, n, length, angle,
                             seed=_seed(cfg),
                             resolution=int(cfg.get("cluster_resolution", 256)),
                             level=level)
    out = _outdir(cfg)
    payload = report.to_json_dict()
    payload["config"] = cfg
    _write_json(os.path.join(out, "report.json"), payload)
    text = format_report(report)
    with open(os.path.join(out, "report.txt"), "w") as fh:
        fh.write(text)
    sys.stdout.write(text)
    return 0


_COMMANDS = {
    "stratify": cmd_stratify,
    "sample": cmd_sample,
    "estimate": cmd_estimate,
    "oracle": cmd_oracle,
    "rates": cmd_rates,
    "clt": cmd_clt,
    "compare": cmd_compare,
    "canopy": cmd_canopy,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spatialstrat",
        description="Design-based estimation of spatial totals under "
                    "stratified, tessellation and uniform site placement.")
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--seed", type=int, help="root random seed (mandatory "
                        "here or in the config)")
    parser.add_argument("--reps", type=int, help="replication count override")
    parser.add_argument("--n", type=int, help="sample size / stratum count")
    parser.add_argument("--out", help="output directory (default: out)")
    parser.add_argument("--threads", type=int, help="worker threads (results "
                        "are identical for any value)")
    parser.add_argument("--level", type=float, help="confidence level")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        cfg = _load_config(args.config)
        for key, value in (("seed", args.seed), ("replications", args.reps),
                           ("n", args.n), ("out", args.out),
                           ("threads", args.threads), ("level", args.level)):
            if value is not None:
                cfg[key] = value
        return _COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

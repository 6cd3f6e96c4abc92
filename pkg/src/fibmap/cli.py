# src/fibmap/cli.py
"""
Command-line surface: one subcommand per analysis.

Plain mode prints `[fibmap] key: value` summaries, --json prints the summary
object, --csv prints the table. With --out DIR every run also lands in
DIR/<run_id>/ (tables/, maps/, run.json, run_manifest.json, manifest.json).
"""
from __future__ import annotations

import argparse
from dataclasses import dataclass, field
from fractions import Fraction
import json
import logging
import math
from pathlib import Path
import sys
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import mpmath
from mpmath import workprec
import pandas as pd

from .class_a import (
    DEFAULT_GEOMETRY_PARAMS,
    class_a_orbit,
    geometry_experiment,
    inclusion_orbit_length,
    index_law_check,
    renormalization_tower,
    surgery_from_unimodal,
    tune_v,
    two_branch_example,
)
from .config import REFERENCE_C, FibmapConfig, load_config
from .errors import DomainError, FibmapError, PrecisionError
from .export import (
    digest_outputs,
    file_digest,
    read_json,
    update_manifest,
    write_json,
    write_table,
)
from .fib_arith import (
    epsilon,
    fib,
    sigma_shift,
    successor,
    zeckendorf,
)
from .kneading import (
    KneadingSeries,
    admissible,
    entropy_from_kneading,
    fib_classA,
    fib_signs,
    renormalize_kneading,
)
from .model_map import ModelParams, eval_F, gap_slope, phi, y_value
from .mp_dynamics import escalating_orbit, orbit_quadratic, render
from .quad_fibonacci import (
    CUBE_ROOT_HALF,
    build_cover,
    build_model_cover,
    cover_orbit_length,
    derivative_growth_fit,
    dimension_estimate,
    find_c,
    parameter_depth,
    scaling_report,
    summability_series,
    target_bits_for,
    verify_closest_returns,
)
from .registry import create_run, utc_now_iso
from .run_manifest import RunManifest, library_versions, run_manifest_from_dict

logger = logging.getLogger(__name__)

LOG10_2 = math.log10(2)
RUN_MANIFEST_NAME = "run_manifest.json"


@dataclass
class CommandResult:
    summary: Dict[str, Any]
    table: pd.DataFrame
    headline: Optional[str] = None
    maps: Dict[str, Any] = field(default_factory=dict)
    precision_used: Optional[int] = None
    depths: Dict[str, Any] = field(default_factory=dict)


# ---------------------------------------------------------------------------
# argument helpers
# ---------------------------------------------------------------------------


def _window(text: str) -> Tuple[int, int]:
    try:
        lo, hi = (int(part) for part in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"window must look like LO:HI, got {text!r}")
    if lo > hi:
        raise argparse.ArgumentTypeError(f"empty window {text!r}")
    return lo, hi


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}")


def _decimal(text: str) -> str:
    try:
        mpmath.mpf(text)
    except (ValueError, TypeError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    return text


def _geometry_params(text: str) -> Tuple[Tuple[str, str], ...]:
    out = []
    for item in text.split(","):
        try:
            c, lam = item.split(":")
            out.append((_decimal(c), _decimal(lam)))
        except ValueError:
            raise argparse.ArgumentTypeError(f"params must look like C:LAM,C:LAM, got {text!r}")
    return tuple(out)


def _resolve_c(args: argparse.Namespace, cfg: FibmapConfig) -> Tuple[str, Dict[str, Any]]:
    """
    Parameter for the quadratic analyses: --locate, then --c, then REFERENCE_C.

    --locate searches two levels deeper than --depth (covers reach u(N+2)) and
    renders c with the digits its bracket certifies.  `c_depth` is the level
    through which the returned string still follows the Fibonacci parameter.
    """
    if getattr(args, "locate", False):
        depth = args.depth + 2
        ci = find_c(
            depth,
            max(args.target_bits, target_bits_for(depth)),
            start_precision=args.precision_bits,
            precision_cap=cfg.precision_cap,
        )
        digits = max(1, int(ci.width_bits * LOG10_2))
        with workprec(2 * ci.precision):
            c_str = render(ci.c, digits)
        c_depth = min(ci.faithful_depth, parameter_depth(c_str) or ci.faithful_depth)
        info = {"c_source": "find_c", "c_certified_digits": digits, "c_depth": c_depth}
        return c_str, info
    if getattr(args, "c", None):
        c, source = args.c, "--c"
    else:
        c, source = REFERENCE_C, "REFERENCE_C"
    return c, {"c_source": source, "c_depth": parameter_depth(c)}


def _usable_depth(requested: int, info: Dict[str, Any], minimum: int, what: str) -> int:
    """`requested`, lowered to the level c resolves; PrecisionError below `minimum`."""
    c_depth = info.get("c_depth")
    if c_depth is None or requested <= c_depth:
        return requested
    if c_depth < minimum:
        raise PrecisionError(
            f"{what} needs c resolved through level {minimum}, {info['c_source']} "
            f"reaches level {c_depth}; pass more digits or --locate"
        )
    logger.warning("%s: depth lowered from %d to %d, the level c resolves", what, requested, c_depth)
    return c_depth


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _cmd_zeck(args: argparse.Namespace, cfg: FibmapConfig) -> CommandResult:
    s = zeckendorf(args.m)
    rows = [{"n": n, "u_n": fib(n)} for n in s.indices]
    shifted = sigma_shift(s)
    return CommandResult(
        summary={
            "m": args.m,
            "indices": list(s.indices),
            "representation": str(s),
            "sigma": shifted.value,
            "successor": successor(s).value,
            "epsilon": epsilon(args.m),
        },
        table=pd.DataFrame(rows, columns=["n", "u_n"]),
        headline=f"{args.m} = {s}",
    )


def _cmd_knead(args: argparse.Namespace, cfg: FibmapConfig) -> CommandResult:
    length = args.length or fib(min(args.depth, 20))
    signs = fib_signs(length)
    eps = KneadingSeries.from_signs(signs)
    verdict = admissible(eps)
    seq = fib_classA(args.component, length)
    rows = [
        {"i": i, "sign": signs.at(i), "epsilon": eps.eps(i), "class_a": seq.at(i)}
        for i in range(1, length + 1)
    ]
    summary: Dict[str, Any] = {
        "length": length,
        "signs": signs.to_string(),
        "admissible": bool(verdict),
        "failing_m": verdict.failing_m,
        "failing_i": verdict.failing_i,
        "class_a": seq.to_string(),
        "component": args.component,
    }
    if length >= 2:
        try:
            summary["renormalized"] = renormalize_kneading(seq).to_string()
        except FibmapError as exc:
            summary["renormalized"] = None
            logger.debug("renormalize_kneading skipped: %s", exc)
    return CommandResult(summary, pd.DataFrame(rows, columns=["i", "sign", "epsilon", "class_a"]))


def _cmd_entropy(args: argparse.Namespace, cfg: FibmapConfig) -> CommandResult:
    eps = KneadingSeries.fibonacci(args.depth)
    est = entropy_from_kneading(eps, args.truncation)
    row = {
        "horizon": est.horizon,
        "root": est.root,
        "root_doubled": est.root_doubled,
        "growth_rate": est.growth_rate,
        "entropy": est.entropy,
    }
    return CommandResult(
        summary={"s": est.growth_rate, "h": est.entropy, **row},
        table=pd.DataFrame([row]),
        headline=f"s = {est.growth_rate:.10f}  h = {est.entropy:.10f}",
        depths={"horizon": args.depth},
    )


def _cmd_find_c(args: argparse.Namespace, cfg: FibmapConfig) -> CommandResult:
    ci = find_c(
        args.depth,
        args.target_bits,
        start_precision=args.precision_bits,
        precision_cap=cfg.precision_cap,
    )
    digits = max(1, int(ci.width_bits * LOG10_2))
    with workprec(2 * ci.precision):
        lo, hi = render(ci.lo, digits + 2), render(ci.hi, digits + 2)
        c = render(ci.c, digits)
    row = {
        "depth": ci.depth,
        "lo": lo,
        "hi": hi,
        "c": c,
        "width_bits": round(ci.width_bits, 3),
        "matched_horizon": ci.matched_horizon,
        "precision": ci.precision,
        "iterations": ci.iterations,
        "reference_digits": ci.agreeing_digits(REFERENCE_C),
        "contains_reference": ci.contains(REFERENCE_C),
    }
    return CommandResult(
        summary={**row, "schedule": list(ci.schedule)},
        table=pd.DataFrame([row]),
        headline=f"c in [{lo}, {hi}]",
        precision_used=ci.precision,
        depths={"N": ci.depth, "matched_horizon": ci.matched_horizon},
    )


def _cmd_verify(args: argparse.Namespace, cfg: FibmapConfig) -> CommandResult:
    c, info = _resolve_c(args, cfg)
    depth = _usable_depth(args.depth, info, 2, "verify")
    rep = verify_closest_returns(c, depth, args.precision_bits)
    rows = [{"n": n, "d_n": d} for n, d in enumerate(rep.distances, start=1)]
    return CommandResult(
        summary={
            **info,
            "c": c,
            "ok": rep.ok,
            "first_failure": rep.first_failure,
            "failures": [list(f) for f in rep.failures],
            "x4_negative": rep.x4_negative,
            "depth": depth,
        },
        table=pd.DataFrame(rows, columns=["n", "d_n"]),
        precision_used=args.precision_bits,
        depths={"N": depth},
    )


def _cmd_model(args: argparse.Namespace, cfg: FibmapConfig) -> CommandResult:
    t = args.t if args.t is not None else cfg.model_t_fraction
    params = ModelParams(t)
    rows = []
    mismatches = 0
    for m in range(1, args.count + 1):
        y = y_value(m, params)
        image = eval_F(y, params, cfg.cell_depth)
        ok = image == y_value(m + 1, params)
        mismatches += 0 if ok else 1
        rows.append(
            {
                "m": m,
                "y_m": str(y),
                "y_m_float": float(y),
                "F_matches": ok,
                "phi_m": str(phi(m)),
            }
        )
    slopes = {str(n): str(gap_slope(n, params)) for n in range(0, 6)}
    return CommandResult(
        summary={"t": str(t), "count": args.count, "mismatches": mismatches, "gap_slopes": slopes},
        table=pd.DataFrame(rows, columns=["m", "y_m", "y_m_float", "F_matches", "phi_m"]),
    )


def _cover_rows(cover: Any, digits: int) -> List[Dict[str, Any]]:
    rows = []
    for iv in cover.intervals:
        lo, hi = iv.lo, iv.hi
        if isinstance(lo, Fraction):
            lo_s, hi_s = str(lo), str(hi)
        else:
            lo_s, hi_s = render(lo, digits), render(hi, digits)
        rows.append(
            {
                "name": iv.name,
                "label": iv.label,
                "level": iv.level,
                "k": iv.k,
                "p": iv.p,
                "q": iv.q,
                "lo": lo_s,
                "hi": hi_s,
                "length": float(iv.length),
            }
        )
    return rows


_COVER_COLUMNS = ["name", "label", "level", "k", "p", "q", "lo", "hi", "length"]


def _cmd_cover(args: argparse.Namespace, cfg: FibmapConfig) -> CommandResult:
    n = args.level
    if args.model:
        t = args.t if args.t is not None else cfg.model_t_fraction
        cover = build_model_cover(n, ModelParams(t))
        info: Dict[str, Any] = {"source": "model", "t": str(t)}
        digits = 0
    else:
        c, info = _resolve_c(args, cfg)
        cover = build_cover(c, n, args.precision_bits, c_depth=info["c_depth"])
        orb = orbit_quadratic(c, cover_orbit_length(n), args.precision_bits)
        digits = min(orb.certified_digits) if len(orb) else 1
        info = {**info, "source": "quadratic", "c": c}
    rows = _cover_rows(cover, digits)
    return CommandResult(
        summary={**info, "level": n, "count": cover.count, "gaps": [list(g) for g in cover.gaps()]},
        table=pd.DataFrame(rows, columns=_COVER_COLUMNS),
        depths={"level": n},
    )


def _cmd_scaling(args: argparse.Namespace, cfg: FibmapConfig) -> CommandResult:
    c, info = _resolve_c(args, cfg)
    depth = _usable_depth(args.depth, info, 4, "scaling")
    rep = scaling_report(
        c, depth, args.precision_bits, window=args.window, c_depth=info["c_depth"]
    )
    last = sorted(rep.ratios)[-4:]
    return CommandResult(
        summary={
            **info,
            "c": c,
            "slope": rep.slope,
            "expected_slope": -1.0 / 3.0,
            "a": rep.a,
            "window": list(rep.window),
            "sup_lambda": rep.sup_lambda,
            "sup_lambda_pair": rep.sup_lambda_pair,
            "last_ratios": [rep.ratios[n] for n in last],
            "expected_ratio": CUBE_ROOT_HALF,
            "beta": rep.beta,
            "gamma": rep.gamma,
            "measure_q": rep.measure_q,
            "measure_levels": len(rep.measure),
            "depth": depth,
        },
        table=pd.DataFrame(rep.rows()),
        precision_used=args.precision_bits,
        depths={"N": depth, "measure": len(rep.measure)},
    )


def _cmd_growth(args: argparse.Namespace, cfg: FibmapConfig) -> CommandResult:
    c, info = _resolve_c(args, cfg)
    g = derivative_growth_fit(c, args.iterations, args.precision_bits, c_depth=info["c_depth"])
    rows = [{"m": m, "index": idx, "log2_derivative": v} for m, idx, v in g.peak_growth]
    return CommandResult(
        summary={
            **info,
            "c": c,
            "slope_m_coeff": g.slope_m_coeff,
            "gamma": g.gamma,
            "delta": g.delta,
            "residual_bound": g.residual_bound,
            "r2": g.fit.r2,
            "fibonacci_slope": None if g.fibonacci_slope is None else g.fibonacci_slope.slope,
            "horizon": g.horizon,
        },
        table=pd.DataFrame(rows, columns=["m", "index", "log2_derivative"]),
        precision_used=args.precision_bits,
        depths={"iterations": g.horizon},
    )


def _cmd_series(args: argparse.Namespace, cfg: FibmapConfig) -> CommandResult:
    c, info = _resolve_c(args, cfg)
    rep = summability_series(
        c,
        args.alpha,
        args.iterations,
        args.precision_bits,
        c_depth=info["c_depth"],
        precision_cap=cfg.precision_cap,
    )
    rows = [
        {"n": n, "increment": inc, "partial_sum": s}
        for n, (inc, s) in enumerate(zip(rep.increments, rep.partial_sums), start=1)
    ]
    return CommandResult(
        summary={
            **info,
            "c": c,
            "alpha": rep.alpha,
            "total": rep.total,
            "first_small_index": rep.first_small_index,
            "threshold": rep.threshold,
            "block_increments": {str(k): v for k, v in rep.block_increments.items()},
            "horizon": rep.horizon,
        },
        table=pd.DataFrame(rows, columns=["n", "increment", "partial_sum"]),
        precision_used=args.precision_bits,
        depths={"iterations": rep.horizon},
    )


def _cmd_dimension(args: argparse.Namespace, cfg: FibmapConfig) -> CommandResult:
    c, info = _resolve_c(args, cfg)
    c_depth = info["c_depth"]
    top = args.depth if c_depth is None else min(args.depth, c_depth - 2)
    if top < args.start:
        raise PrecisionError(
            f"c resolves covers through level {top}, below --start {args.start}; "
            "pass more digits or --locate"
        )
    orb = escalating_orbit(c, cover_orbit_length(top), args.precision_bits, cfg.precision_cap)
    covers = [
        build_cover(c, n, orb.precision, orbit=orb, c_depth=c_depth) for n in range(2, top + 1)
    ]
    t = args.t if args.t is not None else cfg.model_t_fraction
    params = ModelParams(t)
    model_covers = [build_model_cover(n, params) for n in range(2, top + 1)]

    rows = []
    quad = dimension_estimate(covers, args.start)
    model = dimension_estimate(model_covers, args.start)
    for source, points in (("quadratic", quad), ("model", model)):
        for pt in points:
            rows.append(
                {
                    "source": source,
                    "n": pt.n,
                    "count": pt.count,
                    "max_length": pt.max_length,
                    "estimate": pt.estimate,
                }
            )
    q_est = [pt.estimate for pt in quad]
    return CommandResult(
        summary={
            **info,
            "c": c,
            "t": str(t),
            "quadratic_decreasing": all(a > b for a, b in zip(q_est, q_est[1:])),
            "quadratic_top": q_est[-1] if q_est else None,
            "model_top": model[-1].estimate if model else None,
            "quadratic_below_half": bool(q_est) and q_est[-1] < 0.5,
            "top_level": top,
        },
        table=pd.DataFrame(rows, columns=["source", "n", "count", "max_length", "estimate"]),
        precision_used=args.precision_bits,
        depths={"top_level": top},
    )


def _orbit_rows(orb: Any, seq: Any) -> List[Dict[str, Any]]:
    rows = []
    with workprec(orb.working_bits):
        for i in range(1, len(orb) + 1):
            rows.append(
                {
                    "i": i,
                    "x": render(orb.x(i), max(1, orb.digits(i))),
                    "digits": orb.digits(i),
                    "symbol": seq.at(i) if i <= len(seq) else "",
                }
            )
    return rows


def _cmd_example(args: argparse.Namespace, cfg: FibmapConfig) -> CommandResult:
    fmap = two_branch_example(args.big_c, args.lam, args.v, 2 * args.precision_bits + 64)
    orb, seq, escape = class_a_orbit(fmap, args.iterations, args.precision_bits)
    target = fib_classA(1, len(seq))
    return CommandResult(
        summary={
            "map": fmap.to_dict(),
            "kneading": seq.to_string(),
            "matches_fibonacci": seq.first_disagreement(target) is None,
            "escape": None if escape is None else str(escape),
        },
        table=pd.DataFrame(_orbit_rows(orb, seq), columns=["i", "x", "digits", "symbol"]),
        maps={"example": fmap.to_dict()},
        precision_used=args.precision_bits,
    )


def _cmd_tune(args: argparse.Namespace, cfg: FibmapConfig) -> CommandResult:
    vi = tune_v(args.big_c, args.lam, args.depth, args.precision_bits, precision_cap=cfg.precision_cap)
    fmap = two_branch_example(args.big_c, args.lam, vi.v, 2 * vi.precision + 64)
    rows = [{"i": i, "symbol": s} for i, s in enumerate(vi.kneading, start=1)]
    with workprec(2 * vi.precision + 64):
        width = vi.width
        if width > 0 and vi.v != 0:
            digits = int(mpmath.floor(mpmath.log10(abs(vi.v) / width)))
        else:
            digits = int(vi.precision * LOG10_2)
        v = render(vi.v, max(1, digits))
    return CommandResult(
        summary={
            "c": args.big_c,
            "lam": args.lam,
            "v": v,
            "depth": vi.depth,
            "iterations": vi.iterations,
            "precision": vi.precision,
            "kneading": vi.kneading,
        },
        table=pd.DataFrame(rows, columns=["i", "symbol"]),
        maps={"tuned": fmap.to_dict()},
        precision_used=vi.precision,
        depths={"N": args.depth},
    )


def _cmd_renorm(args: argparse.Namespace, cfg: FibmapConfig) -> CommandResult:
    p = args.precision_bits
    info: Dict[str, Any]
    if args.example:
        big_c, lam = args.example
        vi = tune_v(big_c, lam, args.depth, p, precision_cap=cfg.precision_cap)
        base = two_branch_example(big_c, lam, vi.v, 2 * vi.precision + 64)
        base_orbit = None
        info = {"base": "two_branch_example", "c": big_c, "lam": lam}
    else:
        c, info = _resolve_c(args, cfg)
        length = max(inclusion_orbit_length(args.levels), fib(10))
        base_orbit = orbit_quadratic(c, length, p)
        surgery = surgery_from_unimodal(c, p, orbit=base_orbit)
        base = surgery.fmap
        info = {**info, "base": "surgery", "c": c, "orbit_stays": surgery.orbit_stays}
    tower = renormalization_tower(base, args.levels, p, base_orbit=base_orbit)
    rows = []
    for lm in tower:
        rows.append(
            {
                "level": lm.level,
                "T_lo": float(lm.T.lo),
                "T_hi": float(lm.T.hi),
                "J_lo": float(lm.J.lo),
                "J_hi": float(lm.J.hi),
                "t_iter": lm.t_iter,
                "j_iter": lm.j_iter,
                "sigma": lm.sigma,
                "component": lm.component,
                "inclusions_ok": None if lm.inclusions is None else lm.inclusions.ok,
            }
        )
    law = index_law_check(tower, args.m_max)
    return CommandResult(
        summary={
            **info,
            "levels": args.levels,
            "components": [lm.component for lm in tower],
            "index_law_max_residual": max((r.residual for r in law), default=None),
        },
        table=pd.DataFrame(rows),
        maps={f"level_{lm.level}": lm.to_dict() for lm in tower},
        precision_used=p,
        depths={"levels": args.levels},
    )


def _cmd_geometry(args: argparse.Namespace, cfg: FibmapConfig) -> CommandResult:
    params = args.params or tuple((str(c), str(l)) for c, l in DEFAULT_GEOMETRY_PARAMS)
    rep = geometry_experiment(params, args.depth, args.precision_bits)
    rows = [
        {
            "c": r.c,
            "lam": r.lam,
            "v": r.v,
            "lambda0": r.lambda0,
            "a_estimate": r.a_estimate,
            "a_ratio": r.a_ratio,
            "reference_level": r.reference_level,
        }
        for r in rep.rows
    ]
    return CommandResult(
        summary={
            "depth": rep.depth,
            "a_decreasing_in_c": rep.a_decreasing_in_c,
            "expected_ratio": rep.expected_ratio,
            "rows": rows,
        },
        table=pd.DataFrame(rows),
        precision_used=args.precision_bits,
        depths={"N": args.depth},
    )


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

_EPILOGS: Dict[str, str] = {
    "zeck": "CSV columns: n, u_n\nJSON keys: m, indices, representation, sigma, successor, epsilon",
    "knead": "CSV columns: i, sign, epsilon, class_a\nJSON keys: length, signs, admissible, failing_m, failing_i, class_a, component, renormalized",
    "entropy": "CSV columns: horizon, root, root_doubled, growth_rate, entropy\nJSON keys: s, h and the CSV columns",
    "find-c": "CSV columns: depth, lo, hi, c, width_bits, matched_horizon, precision, iterations, reference_digits, contains_reference\nJSON keys: the CSV columns plus schedule",
    "verify": "CSV columns: n, d_n\nJSON keys: c_source, c, ok, first_failure, failures, x4_negative",
    "model": "CSV columns: m, y_m, y_m_float, F_matches, phi_m\nJSON keys: t, count, mismatches, gap_slopes",
    "cover": "CSV columns: name, label, level, k, p, q, lo, hi, length\nJSON keys: source, level, count, gaps",
    "scaling": "CSV columns: n, d_n, lambda_n, ratio, a_n, measure, recursion_ratio, subinterval_ratio\nJSON keys: slope, a, window, sup_lambda, sup_lambda_pair, last_ratios, beta, gamma, measure_q, measure_levels, depth",
    "growth": "CSV columns: m, index, log2_derivative\nJSON keys: slope_m_coeff, gamma, delta, residual_bound, r2, fibonacci_slope, horizon",
    "series": "CSV columns: n, increment, partial_sum\nJSON keys: alpha, total, first_small_index, threshold, block_increments, horizon",
    "dimension": "CSV columns: source, n, count, max_length, estimate\nJSON keys: quadratic_decreasing, quadratic_top, model_top, quadratic_below_half, top_level",
    "example": "CSV columns: i, x, digits, symbol\nJSON keys: map, kneading, matches_fibonacci, escape",
    "tune": "CSV columns: i, symbol\nJSON keys: c, lam, v, depth, iterations, precision, kneading",
    "renorm": "CSV columns: level, T_lo, T_hi, J_lo, J_hi, t_iter, j_iter, sigma, component, inclusions_ok\nJSON keys: base, levels, components, index_law_max_residual",
    "geometry": "CSV columns: c, lam, v, lambda0, a_estimate, a_ratio, reference_level\nJSON keys: depth, a_decreasing_in_c, expected_ratio, rows",
    "replay": "Re-runs a recorded run_manifest.json and compares CSV digests; exit 0 only on a full match.",
}

Runner = Callable[[argparse.Namespace, FibmapConfig], CommandResult]


def build_parser(cfg: Optional[FibmapConfig] = None) -> argparse.ArgumentParser:
    cfg = cfg or load_config()

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--precision-bits", type=int, default=cfg.precision_bits)
    common.add_argument("--depth", type=int, default=cfg.depth, help="Fibonacci level N")
    common.add_argument("--window", type=_window, default=None, help="fit window LO:HI")
    common.add_argument("--out", type=Path, default=None, help="existing output root for a run directory")
    mode = common.add_mutually_exclusive_group()
    mode.add_argument("--json", action="store_true", help="print the summary as JSON")
    mode.add_argument("--csv", action="store_true", help="print the table as CSV")
    common.add_argument("--seedless", action="store_true", help="reserved; rejected (nothing here is random)")
    common.add_argument("--log-level", default=cfg.log_level)
    common.add_argument("--target-bits", type=int, default=cfg.target_bits)

    quad = argparse.ArgumentParser(add_help=False)
    quad.add_argument("--c", type=_decimal, default=None, help=f"quadratic parameter (default {REFERENCE_C})")
    quad.add_argument("--locate", action="store_true", help="run find-c at --depth + 2 first")

    model = argparse.ArgumentParser(add_help=False)
    model.add_argument("--t", type=_rational, default=None, help="model parameter as a rational")

    ap = argparse.ArgumentParser(
        prog="fibmap",
        description="Fibonacci unimodal maps: combinatorics, certified orbits and renormalization.",
    )
    sub = ap.add_subparsers(dest="subcommand", required=True)

    def add(name: str, runner: Optional[Runner], parents: Sequence[argparse.ArgumentParser], help_text: str):
        sp = sub.add_parser(
            name,
            parents=list(parents),
            help=help_text,
            epilog=_EPILOGS[name],
            formatter_class=argparse.RawDescriptionHelpFormatter,
        )
        sp.set_defaults(runner=runner)
        return sp

    sp = add("zeck", _cmd_zeck, [common], "Zeckendorf representation of M")
    sp.add_argument("m", type=int)

    sp = add("knead", _cmd_knead, [common], "Fibonacci sign and class A sequences")
    sp.add_argument("--length", type=int, default=None)
    sp.add_argument("--component", type=int, choices=(1, -1), default=1)

    sp = add("entropy", _cmd_entropy, [common], "growth rate from the kneading series")
    sp.add_argument("--truncation", type=int, default=None, help="series truncation N (default depth/2)")

    add("find-c", _cmd_find_c, [common], "locate the Fibonacci parameter")
    add("verify", _cmd_verify, [common, quad], "closest-return checks")

    sp = add("model", _cmd_model, [common, model], "piecewise-linear model map")
    sp.add_argument("--count", type=int, default=100)

    sp = add("cover", _cmd_cover, [common, quad, model], "level-n covering M^n")
    sp.add_argument("--level", type=int, default=5)
    sp.add_argument("--model", action="store_true", help="use exact model points")

    add("scaling", _cmd_scaling, [common, quad], "λ_n scaling law")

    sp = add("growth", _cmd_growth, [common, quad], "derivative growth along the critical orbit")
    sp.add_argument("--iterations", type=int, default=1000)

    sp = add("series", _cmd_series, [common, quad], "summability of inverse derivatives")
    sp.add_argument("--alpha", type=float, default=0.5)
    sp.add_argument("--iterations", type=int, default=10000)

    sp = add("dimension", _cmd_dimension, [common, quad, model], "dimension trend of the covers")
    sp.add_argument("--start", type=int, default=4)

    sp = add("example", _cmd_example, [common], "two-branch class A map")
    sp.add_argument("big_c", metavar="C", type=_decimal)
    sp.add_argument("lam", metavar="LAM", type=_decimal)
    sp.add_argument("v", metavar="V", type=_decimal)
    sp.add_argument("--iterations", type=int, default=89)

    sp = add("tune", _cmd_tune, [common], "tune v so the example is Fibonacci")
    sp.add_argument("big_c", metavar="C", type=_decimal)
    sp.add_argument("lam", metavar="LAM", type=_decimal)

    sp = add("renorm", _cmd_renorm, [common, quad], "numeric renormalization tower")
    sp.add_argument("--levels", type=int, default=3)
    sp.add_argument("--m-max", type=int, default=30)
    sp.add_argument("--example", nargs=2, metavar=("C", "LAM"), type=_decimal, default=None)

    sp = add("geometry", _cmd_geometry, [common], "a-estimates across the two-branch family")
    sp.add_argument("--params", type=_geometry_params, default=None, help="C:LAM,C:LAM,...")

    sp = add("replay", None, [common], "replay a recorded run")
    sp.add_argument("manifest", type=Path)

    return ap


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------


def _strip_out(argv: Sequence[str]) -> List[str]:
    out: List[str] = []
    skip = False
    for a in argv:
        if skip:
            skip = False
            continue
        if a == "--out":
            skip = True
            continue
        if a.startswith("--out="):
            continue
        out.append(a)
    return out


def _numeric_parameters(args: argparse.Namespace) -> Dict[str, Any]:
    params: Dict[str, Any] = {}
    for k, v in sorted(vars(args).items()):
        if k == "runner":
            continue
        if isinstance(v, bool) or v is None:
            continue
        if isinstance(v, (int, float)):
            params[k] = v
        elif isinstance(v, (str, Fraction)):
            params[k] = str(v)
        elif isinstance(v, tuple):
            params[k] = json.loads(json.dumps(v, default=str))
    return params


def _emit(result: CommandResult, args: argparse.Namespace) -> None:
    if args.json:
        print(json.dumps(result.summary, indent=2, sort_keys=True, default=str))
        return
    if args.csv:
        result.table.to_csv(sys.stdout, index=False)
        return
    if result.headline:
        print(result.headline)
    for k, v in result.summary.items():
        if isinstance(v, (dict, list)) and len(v) > 12:
            continue
        print(f"[fibmap] {k}: {v}")
    print(f"[fibmap] rows: {len(result.table)}")


def _persist(
    result: CommandResult, args: argparse.Namespace, argv: Sequence[str], cfg: FibmapConfig
) -> Path:
    run = create_run(args.out, run_alias=args.subcommand, metadata={"subcommand": args.subcommand})
    name = args.subcommand.replace("-", "_")
    write_table(run.run_dir, name, result.table, write_parquet=cfg.write_parquet)
    write_json(run.maps_dir / f"{name}.json", result.summary)
    for key, payload in result.maps.items():
        write_json(run.maps_dir / f"{key}.json", payload)

    outputs = digest_outputs(run.run_dir)
    manifest = RunManifest(
        created_utc=utc_now_iso(),
        subcommand=args.subcommand,
        argv=_strip_out(argv),
        parameters=_numeric_parameters(args),
        precision_schedule={
            "start_bits": args.precision_bits,
            "cap": cfg.precision_cap,
            "used_bits": result.precision_used,
        },
        depths=dict(result.depths),
        versions=library_versions(),
        outputs=outputs,
    )
    write_json(run.run_dir / RUN_MANIFEST_NAME, manifest.to_dict())
    update_manifest(
        run.run_dir,
        {"subcommand": args.subcommand, "outputs": outputs, "timestamp_utc": utc_now_iso()},
        section="artifacts",
    )
    return run.run_dir


def _replay(args: argparse.Namespace) -> int:
    path: Path = args.manifest
    if path.is_dir():
        path = path / RUN_MANIFEST_NAME
    if not path.exists():
        raise DomainError(f"run manifest not found: {path}")
    recorded = run_manifest_from_dict(read_json(path))
    if not recorded.argv:
        raise DomainError(f"run manifest has no argv: {path}")
    out_root = args.out if args.out is not None else path.parent.parent

    # the replayed command runs quietly; only the comparison is reported
    replay_argv = list(recorded.argv) + ["--out", str(out_root)]
    replay_args = build_parser().parse_args(replay_argv)
    replay_args.json = replay_args.csv = False
    run_dir = _run(replay_args, replay_argv, load_config(), emit=False)
    assert run_dir is not None
    fresh = run_manifest_from_dict(read_json(run_dir / RUN_MANIFEST_NAME))

    mismatched = []
    for rel, digest in sorted(recorded.csv_outputs().items()):
        now = fresh.outputs.get(rel)
        if now is None and (run_dir / rel).exists():
            now = file_digest(run_dir / rel)
        if now != digest:
            mismatched.append(rel)
    print(f"[fibmap] replay_dir: {run_dir}")
    print(f"[fibmap] compared: {len(recorded.csv_outputs())}")
    print(f"[fibmap] mismatched: {mismatched}")
    return 0 if not mismatched else 1


def _run(
    args: argparse.Namespace, argv: Sequence[str], cfg: FibmapConfig, *, emit: bool = True
) -> Optional[Path]:
    result = args.runner(args, cfg)
    if emit:
        _emit(result, args)
    if args.out is None:
        return None
    run_dir = _persist(result, args, argv, cfg)
    if emit and not (args.json or args.csv):
        print(f"[fibmap] run_dir: {run_dir}")
    return run_dir


def dispatch(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    cfg = load_config()
    parser = build_parser(cfg)
    args = parser.parse_args(argv)

    if args.seedless:
        parser.error("--seedless is reserved and rejected: no computation here draws random numbers")

    logging.basicConfig(
        level=getattr(logging, str(args.log_level).upper(), logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
    )

    if args.out is not None and not Path(args.out).is_dir():
        print(f"ERROR: DomainError: output directory does not exist: {args.out}", file=sys.stderr)
        return 1

    try:
        if args.subcommand == "replay":
            return _replay(args)
        _run(args, argv, cfg)
    except FibmapError as exc:
        print(f"ERROR: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> int:
    return dispatch()


if __name__ == "__main__":
    raise SystemExit(main())

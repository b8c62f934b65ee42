"""Command-line front end.

Subcommands: ``eval``, ``direct``, ``compare``, ``poles``, ``residue``,
``boundary-scan`` and ``selftest``.  Exit codes: 0 success, 1 usage or
config error, 2 tolerance not met, 3 domain error, 4 capacity exceeded.
Failures also write a one-line JSON error record to stderr.

``MEROCONT_THREADS`` caps the number of worker threads used for grid
points; output always follows grid order.
"""

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .boundary import CounterexampleSeries, boundary_scan
from .config import load_config
from .engine import evaluate_extension
from .errors import MeroContError
from .oracle import MAX_TERMS, compare_point, direct_sum
from .poles import predicted_poles, residue_at, verify_pole
from .report import emit_report
from .selftest import format_text, run_selftest

POLE_COLUMNS = ["re", "im", "shift", "residue_re", "residue_im", "status"]
SCAN_COLUMNS = ["offset", "height", "re_s", "im_s", "t2_abs", "t2_re", "t2_im", "n_used"]
EVAL_COLUMNS = [
    "re_s", "im_s", "value_re", "value_im", "error_bound", "certified",
    "N", "nu", "K_max", "M_max",
]
DIRECT_COLUMNS = ["re_s", "im_s", "value_re", "value_im", "error_bound", "terms_used"]
COMPARE_COLUMNS = [
    "re_s", "im_s", "extension_re", "extension_im", "extension_bound",
    "oracle_re", "oracle_im", "oracle_bound", "discrepancy", "within_budget",
]


class UsageError(MeroContError):
    """Malformed command-line argument."""


def parse_complex(text):
    """``"-0.5+0i"``, ``"2"``, ``"1-3j"`` and similar."""
    t = text.strip().replace(" ", "").replace("i", "j")
    try:
        return complex(t)
    except ValueError as exc:
        raise UsageError(f"cannot parse complex number {text!r}") from exc


def _axis(spec):
    parts = spec.split(":")
    try:
        if len(parts) == 1:
            return [float(parts[0])]
        if len(parts) != 3:
            raise ValueError
        a, b, step = (float(p) for p in parts)
    except ValueError as exc:
        raise UsageError(f"axis must be 'a:b:step' or a single value, got {spec!r}") from exc
    if not step > 0 or b < a:
        raise UsageError(f"axis {spec!r} needs step > 0 and a <= b")
    n = int(np.floor((b - a) / step + 1e-9)) + 1
    return [a + i * step for i in range(n)]


def parse_grid(text):
    """``"re=a:b:step,im=c:d:step"`` to a list of complex points.

    Points run real-major, imaginary-minor.  A missing axis defaults to 0.
    """
    axes = {"re": [0.0], "im": [0.0]}
    for item in text.split(","):
        key, sep, val = item.partition("=")
        key = key.strip()
        if not sep or key not in axes:
            raise UsageError(f"grid items are re=a:b:step or im=c:d:step, got {item!r}")
        axes[key] = _axis(val.strip())
    return [complex(r, i) for r in axes["re"] for i in axes["im"]]


def parse_floats(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from exc


def thread_count():
    raw = os.environ.get("MEROCONT_THREADS", "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise UsageError(f"MEROCONT_THREADS must be an integer, got {raw!r}") from exc
    return max(1, n)


def ordered_map(fn, items):
    """``map`` over a thread pool of ``MEROCONT_THREADS`` workers, in order."""
    items = list(items)
    n = min(thread_count(), max(1, len(items)))
    if n == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def _points(args):
    if args.s is not None and args.grid is not None:
        raise UsageError("give --s or --grid, not both")
    if args.s is not None:
        return [parse_complex(args.s)], False
    if args.grid is not None:
        return parse_grid(args.grid), True
    raise UsageError("one of --s or --grid is required")


def _perturbed(series):
    if isinstance(series, CounterexampleSeries):
        return series.as_perturbed_series()
    return series


def _format(args, is_grid):
    if args.out is not None:
        return args.out
    return "csv" if is_grid else "json"


def _eval_record(s, v):
    plan = v.plan
    return {
        "re_s": s.real,
        "im_s": s.imag,
        "value_re": v.value.real,
        "value_im": v.value.imag,
        "error_bound": v.error_bound,
        "certified": v.certified,
        "N": plan.N,
        "nu": plan.nu,
        "K_max": plan.K_max,
        "M_max": plan.M_max,
    }


def cmd_eval(args):
    series = _perturbed(load_config(args.config))
    pts, is_grid = _points(args)
    vals = ordered_map(lambda s: evaluate_extension(series, s, args.tol, N=args.N), pts)
    fmt = _format(args, is_grid)
    if not is_grid and fmt == "json":
        v = vals[0]
        emit_report({
            "s": pts[0],
            "value": v.value,
            "error_bound": v.error_bound,
            "plan": {
                "N": v.plan.N, "nu": v.plan.nu,
                "K_max": v.plan.K_max, "M_max": v.plan.M_max,
            },
            "certified": v.certified,
        }, "json", args.output)
    else:
        emit_report([_eval_record(s, v) for s, v in zip(pts, vals)], fmt, args.output,
                    EVAL_COLUMNS)
    return 0


def cmd_direct(args):
    series = _perturbed(load_config(args.config))
    pts, is_grid = _points(args)
    vals = ordered_map(lambda s: direct_sum(series, s, args.tol, args.max_terms), pts)
    rows = [{
        "re_s": s.real, "im_s": s.imag,
        "value_re": v.value.real, "value_im": v.value.imag,
        "error_bound": v.error_bound, "terms_used": v.terms_used,
    } for s, v in zip(pts, vals)]
    fmt = _format(args, is_grid)
    emit_report(rows[0] if (fmt == "json" and not is_grid) else rows, fmt, args.output,
                DIRECT_COLUMNS)
    return 0


def cmd_compare(args):
    series = _perturbed(load_config(args.config))
    pts, is_grid = _points(args)
    recs = ordered_map(
        lambda s: compare_point(series, s, args.tol, args.max_terms, args.oracle_tol), pts
    )
    emit_report([r.as_dict() for r in recs], args.out or "csv", args.output, COMPARE_COLUMNS)
    return 0 if all(r.within_budget for r in recs) else 2


def _rect(text):
    vals = parse_floats(text)
    if len(vals) != 4:
        raise UsageError("--rect is re_lo,re_hi,im_lo,im_hi")
    return tuple(vals)


def cmd_poles(args):
    series = _perturbed(load_config(args.config))
    cands = predicted_poles(series, _rect(args.rect), args.shift_cap)
    if args.verify:
        cands = ordered_map(lambda c: verify_pole(series, c, tol=args.tol), cands)
    emit_report([c.as_dict() for c in cands], args.out or "csv", args.output, POLE_COLUMNS)
    return 0


def cmd_residue(args):
    series = _perturbed(load_config(args.config))
    center = parse_complex(args.center)
    res, budget, max_err = residue_at(series, center, args.radius, args.tol, args.nodes)
    emit_report({
        "re": center.real,
        "im": center.imag,
        "residue_re": res.real,
        "residue_im": res.imag,
        "budget": budget,
        "max_error_bound": max_err,
    }, args.out or "json", args.output)
    return 0


def cmd_boundary_scan(args):
    series = load_config(args.config)
    if not isinstance(series, CounterexampleSeries):
        raise UsageError("boundary-scan needs a config of type 'counterexample'")
    recs = boundary_scan(series, parse_floats(args.offsets), parse_floats(args.heights),
                         args.n_max)
    emit_report([r.as_dict() for r in recs], args.out or "csv", args.output, SCAN_COLUMNS)
    return 0


def cmd_selftest(args):
    results = run_selftest()
    fmt = args.out or "text"
    if fmt == "text":
        text = format_text(results)
        if args.output is None:
            sys.stdout.write(text)
        else:
            with open(args.output, "w", encoding="utf-8") as fh:
                fh.write(text)
    else:
        emit_report([r.as_dict() for r in results], fmt, args.output,
                    ["name", "status", "measured", "limit"])
    return 0 if all(r.passed for r in results) else 2


def build_parser():
    p = argparse.ArgumentParser(
        prog="merocont",
        description="Meromorphic extension of perturbed Dirichlet series.",
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, fmts=("csv", "json")):
        sp.add_argument("--out", choices=fmts, default=None, help="output format")
        sp.add_argument("--output", default=None, help="output file (default stdout)")

    def with_config(sp):
        sp.add_argument("--config", required=True, help="series definition (JSON)")

    def with_points(sp):
        sp.add_argument("--s", default=None, help='single point, e.g. "-0.5+0i"')
        sp.add_argument("--grid", default=None, help='"re=a:b:step,im=c:d:step"')

    sp = sub.add_parser("eval", help="evaluate the meromorphic extension")
    with_config(sp)
    with_points(sp)
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("--N", type=int, default=None, help="force the truncation order")
    common(sp)
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("direct", help="brute-force sum where it converges absolutely")
    with_config(sp)
    with_points(sp)
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("--max-terms", type=int, default=MAX_TERMS)
    common(sp)
    sp.set_defaults(func=cmd_direct)

    sp = sub.add_parser("compare", help="extension against the direct sum")
    with_config(sp)
    with_points(sp)
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("--oracle-tol", type=float, default=None)
    sp.add_argument("--max-terms", type=int, default=MAX_TERMS)
    common(sp)
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("poles", help="candidate poles in a rectangle")
    with_config(sp)
    sp.add_argument("--rect", required=True, help="re_lo,re_hi,im_lo,im_hi")
    sp.add_argument("--shift-cap", type=float, default=None)
    sp.add_argument("--verify", action="store_true", help="estimate residues")
    sp.add_argument("--tol", type=float, default=1e-10)
    common(sp)
    sp.set_defaults(func=cmd_poles)

    sp = sub.add_parser("residue", help="contour residue of the extension")
    with_config(sp)
    sp.add_argument("--center", required=True)
    sp.add_argument("--radius", type=float, default=None)
    sp.add_argument("--nodes", type=int, default=256)
    sp.add_argument("--tol", type=float, default=1e-10)
    common(sp)
    sp.set_defaults(func=cmd_residue)

    sp = sub.add_parser("boundary-scan", help="lacunary term along the boundary line")
    with_config(sp)
    sp.add_argument("--offsets", default="0.1,0.01,0.001")
    sp.add_argument("--heights", default="0")
    sp.add_argument("--n-max", type=int, default=None)
    common(sp)
    sp.set_defaults(func=cmd_boundary_scan)

    sp = sub.add_parser("selftest", help="run the invariant checks")
    common(sp, ("text", "csv", "json"))
    sp.set_defaults(func=cmd_selftest)
    return p


def _error_record(exc, code):
    rec = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    sys.stderr.write(json.dumps(rec) + "\n")


#: Options whose values may start with "-" (negative coordinates).
_SIGNED_OPTIONS = ("--s", "--center", "--rect", "--grid", "--offsets", "--heights")


def _attach_signed_values(argv):
    """``["--s", "-0.5"]`` to ``["--s=-0.5"]`` so argparse keeps the sign."""
    out = []
    it = iter(argv)
    for tok in it:
        if tok in _SIGNED_OPTIONS:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def run_cli(argv=None):
    """Parse ``argv``, run the subcommand and return its exit code."""
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parser.parse_args(_attach_signed_values(argv))
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except MeroContError as exc:
        _error_record(exc, exc.exit_code)
        return exc.exit_code
    except (ValueError, OSError) as exc:
        _error_record(exc, 1)
        return 1


def main():
    sys.exit(run_cli())

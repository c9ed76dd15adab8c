"""Command-line interface: ``fracap <subcommand> [options]``.

Exit status: 0 when every verification passes, 1 when one fails, 2 on a
malformed shape/function description or invalid argument, 3 when an
integrator does not converge (best estimates are still written).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from .besov import besov_seminorm, coarea_decompose
from .capacity import capacity_bracket, capacity_limit_checks, is_convex, sharp_kappa
from .constants import AlphaContext, tau, unit_ball_volume
from .dsl import parse_function, parse_shape
from .errors import ConvergenceFailure, DslParseError, FracapError
from .inequalities import (verify_cap_perimeter, verify_cap_strong_sobolev, verify_chain,
                           verify_isocapacitary, verify_isoperimetric, verify_sobolev,
                           verify_truncation)
from .numerics import McSpec, QuadratureSpec
from .perimeter import (ALPHA0_GRID, ALPHA1_GRID, EPS0, ball_perimeter, frac_perimeter,
                        limit_alpha0_check, limit_alpha1_check)

PROVENANCE = ("value", "error", "method", "samples", "seed")
FUNCTION_INEQS = ("eq1", "eq3", "sobolev")
SHAPE_INEQS = ("eq2", "eq4", "isocap", "isoper")
LIMIT_TOL = 0.02


# ---------------------------------------------------------------------------
# output


def fmt_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, ".17g")


def _to_json(obj) -> str:
    if isinstance(obj, bool) or obj is None:
        return {True: "true", False: "false", None: "null"}[obj]
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        # non-finite values are not valid JSON numbers
        return fmt_float(x) if math.isfinite(x) else json.dumps(fmt_float(x))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{_to_json(str(k))}: {_to_json(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_to_json(v) for v in obj) + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(records: list[dict]) -> str:
    """JSON array, one record per line, floats with 17 significant digits."""
    if not records:
        return "[]\n"
    return "[\n" + ",\n".join("  " + _to_json(r) for r in records) + "\n]\n"


def to_csv(records: list[dict]) -> str:
    keys: list[str] = []
    for r in records:
        keys += [k for k in r if k not in keys]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(keys)
    for r in records:
        row = []
        for k in keys:
            v = r.get(k, "")
            if isinstance(v, bool):
                v = str(v).lower()
            elif isinstance(v, (float, np.floating)):
                v = fmt_float(float(v))
            elif isinstance(v, (list, tuple)):
                v = " ".join(fmt_float(float(x)) for x in v)
            row.append(v)
        w.writerow(row)
    return buf.getvalue()


def _record(base: dict, est=None, **extra) -> dict:
    rec = dict(base)
    if est is not None:
        rec.update(est.as_dict())
    rec.update(extra)
    for k, default in zip(PROVENANCE, (math.nan, 0.0, "quadrature", 0, 0)):
        rec.setdefault(k, default)
    return rec


# ---------------------------------------------------------------------------
# argument handling


def _alpha_grid(text: str) -> list[float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("alpha grid must be a:b:steps")
    try:
        a, b, steps = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError("alpha grid must be a:b:steps") from None
    if steps < 1:
        raise argparse.ArgumentTypeError("steps must be positive")
    return [a] if steps == 1 else list(np.linspace(a, b, steps))


def _default_seed() -> int:
    try:
        return int(os.environ.get("FRACAP_SEED", "0"))
    except ValueError:
        return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, default=None, help="dimension")
    common.add_argument("--alpha", type=float, default=None, help="fractional order in (0, 1)")
    common.add_argument("--alpha-grid", type=_alpha_grid, default=None, metavar="A:B:STEPS")
    common.add_argument("--method", choices=("auto", "quad", "mc"), default="auto")
    common.add_argument("--samples", type=int, default=200_000)
    common.add_argument("--seed", type=int, default=_default_seed())
    common.add_argument("--chunks", type=int, default=16)
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--tol", type=float, default=None, help="relative quadrature tolerance")
    common.add_argument("--eps0", type=float, default=EPS0, help="MC importance exponent shift")
    common.add_argument("--output", choices=("json", "csv"), default="json")
    common.add_argument("--csv", dest="output", action="store_const", const="csv",
                        help="shorthand for --output csv")
    common.add_argument("--out", default=None, metavar="PATH")

    parser = argparse.ArgumentParser(prog="fracap", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("constants", parents=[common], help="omega_n, tau_n, kappa tables")
    p = sub.add_parser("perimeter", parents=[common], help="fractional perimeter")
    p.add_argument("--shape", required=True)
    p = sub.add_parser("besov", parents=[common], help="seminorm by both routes")
    p.add_argument("--function", required=True)
    p = sub.add_parser("capacity", parents=[common], help="capacity bracket")
    p.add_argument("--shape", required=True)
    p.add_argument("--family", choices=("dilates", "neighborhoods"), default="dilates")
    p = sub.add_parser("verify", parents=[common], help="check the sharp inequalities")
    p.add_argument("--ineq", default="all",
                   choices=("all",) + FUNCTION_INEQS + SHAPE_INEQS + ("chain",))
    p.add_argument("--function", default=None)
    p.add_argument("--shape", default=None)
    p.add_argument("--family", choices=("dilates", "neighborhoods"), default="dilates")
    p = sub.add_parser("limits", parents=[common], help="alpha -> 0 and alpha -> 1 scans")
    p.add_argument("--shape", required=True)
    p.add_argument("--end", type=int, choices=(0, 1), default=None)
    p.add_argument("--limit-tol", type=float, default=LIMIT_TOL)
    return parser


def _alphas(args, default=(0.5,)) -> list[float]:
    if args.alpha_grid is not None:
        return [float(a) for a in args.alpha_grid]
    if args.alpha is not None:
        return [args.alpha]
    return list(default)


def _perimeter_kwargs(args) -> dict:
    kw = {"method": {"quad": "quadrature", "mc": "monte-carlo"}.get(args.method, "auto"),
          "mc": McSpec(args.samples, args.seed, args.chunks), "eps0": args.eps0,
          "workers": args.workers}
    if args.tol is not None:
        kw["quad"] = QuadratureSpec(abs_tol=args.tol * 1e-3, rel_tol=args.tol)
    return kw


def _check_n(args, n):
    if args.n is not None and args.n != n:
        raise FracapError(f"--n {args.n} does not match the input dimension {n}")


# ---------------------------------------------------------------------------
# subcommands


def cmd_constants(args) -> tuple[list, bool]:
    dims = [args.n] if args.n is not None else [1, 2, 3]
    recs = []
    for n in dims:
        for a in _alphas(args):
            ctx = AlphaContext(n, a)
            pb = ball_perimeter(ctx)
            recs.append(_record({"n": n, "alpha": a, "omega": unit_ball_volume(n),
                                 "tau": tau(n), "p_ball": pb.value, "kappa": sharp_kappa(ctx)},
                                value=sharp_kappa(ctx), error=pb.rel_error * sharp_kappa(ctx)))
    return recs, True


def cmd_perimeter(args) -> tuple[list, bool]:
    s = parse_shape(args.shape)
    _check_n(args, s.n)
    recs = []
    for a in _alphas(args):
        est = frac_perimeter(s, AlphaContext(s.n, a), **_perimeter_kwargs(args))
        recs.append(_record({"shape": args.shape, "n": s.n, "alpha": a}, est))
    return recs, True


def cmd_besov(args) -> tuple[list, bool]:
    f = parse_function(args.function)
    _check_n(args, f.n)
    recs = []
    ok = True
    for a in _alphas(args):
        ctx = AlphaContext(f.n, a)
        b = besov_seminorm(f, ctx)
        c = coarea_decompose(f, ctx, workers=args.workers)
        agree = abs(b.value - c.value) <= b.error + c.error
        ok &= agree
        base = {"function": args.function, "n": f.n, "alpha": a}
        recs.append(_record(dict(base, route="seminorm"), b))
        recs.append(_record(dict(base, route="coarea"), c, agree=agree))
    return recs, ok


def cmd_capacity(args) -> tuple[list, bool]:
    s = parse_shape(args.shape)
    _check_n(args, s.n)
    kw = _perimeter_kwargs(args)
    recs = []
    for a in _alphas(args):
        ctx = AlphaContext(s.n, a)
        br = capacity_bracket(s, ctx, args.family, **kw)
        method = "monte-carlo" if kw["method"] == "monte-carlo" else "quadrature"
        recs.append(_record({"shape": args.shape}, None, **br.as_dict(), value=br.upper,
                            error=br.upper_error, method=method,
                            samples=kw["mc"].samples if method == "monte-carlo" else 0,
                            seed=args.seed if method == "monte-carlo" else 0))
    return recs, True


def _report_record(base, rep) -> dict:
    return _record(base, None, **rep.as_dict(), value=rep.ratio, error=rep.tol * rep.ratio)


def cmd_verify(args) -> tuple[list, bool]:
    want = args.ineq
    if args.function is None and args.shape is None:
        raise FracapError("verify needs --function and/or --shape")
    if want in FUNCTION_INEQS + ("chain",) and args.function is None:
        raise FracapError(f"{want} needs --function")
    if want in SHAPE_INEQS and args.shape is None:
        raise FracapError(f"{want} needs --shape")
    f = parse_function(args.function) if args.function else None
    s = parse_shape(args.shape) if args.shape else None
    for obj in (f, s):
        if obj is not None:
            _check_n(args, obj.n)
    kw = _perimeter_kwargs(args)
    recs = []
    for a in _alphas(args):
        if f is not None and want in ("all", "chain") + FUNCTION_INEQS:
            ctx = AlphaContext(f.n, a)
            base = {"function": args.function, "n": f.n, "alpha": a}
            if want in ("all", "chain"):
                reps = verify_chain(f, ctx)
            else:
                reps = [{"eq1": verify_cap_strong_sobolev, "eq3": verify_truncation,
                         "sobolev": verify_sobolev}[want](f, ctx)]
            recs += [_report_record(base, r) for r in reps]
        if s is not None and want in ("all",) + SHAPE_INEQS:
            ctx = AlphaContext(s.n, a)
            base = {"shape": args.shape, "n": s.n, "alpha": a}
            todo = SHAPE_INEQS if want == "all" else (want,)
            for name in todo:
                if name == "eq2":
                    r = verify_isocapacitary(s, ctx, family=args.family, **kw)
                elif name == "isocap":
                    r = verify_isocapacitary(s, ctx, inequality_id="isocapacitary",
                                             family=args.family, **kw)
                elif name == "eq4":
                    r = verify_cap_perimeter(s, ctx, args.family, **kw)
                else:
                    r = verify_isoperimetric(s, ctx, **kw)
                recs.append(_report_record(base, r))
    return recs, all(r["status"] == "pass" for r in recs)


def cmd_limits(args) -> tuple[list, bool]:
    s = parse_shape(args.shape)
    _check_n(args, s.n)
    kw = _perimeter_kwargs(args)
    ends = (0, 1) if args.end is None else (args.end,)
    recs = []
    ok = True
    for end in ends:
        grid = args.alpha_grid or (ALPHA0_GRID if end == 0 else ALPHA1_GRID)
        scan = (limit_alpha0_check if end == 0 else limit_alpha1_check)(s, grid, **kw)
        scans = [("perimeter", scan)]
        if is_convex(s):
            caps = capacity_limit_checks(s, grid if end == 0 else ALPHA0_GRID,
                                         grid if end == 1 else ALPHA1_GRID, **kw)
            scans.append(("capacity", caps[end]))
        for kind, res in scans:
            passed = res.rel_err <= args.limit_tol
            ok &= passed
            recs.append(_record({"shape": args.shape, "n": s.n, "kind": kind, "end": end},
                                None, **res.as_dict(), value=res.extrapolated,
                                status="pass" if passed else "fail"))
    return recs, ok


COMMANDS = {"constants": cmd_constants, "perimeter": cmd_perimeter, "besov": cmd_besov,
            "capacity": cmd_capacity, "verify": cmd_verify, "limits": cmd_limits}


def _emit(records, args, stdout):
    text = dumps(records) if args.output == "json" else to_csv(records)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        stdout.write(text)


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        records, ok = COMMANDS[args.command](args)
    except DslParseError as exc:
        stderr.write(f"fracap: {exc}\n")
        return 2
    except ConvergenceFailure as exc:
        stderr.write(f"fracap: convergence failure: {exc}\n")
        if exc.estimate is not None:
            _emit([_record({"command": args.command, "status": "convergence-failure"},
                           exc.estimate)], args, stdout)
        return 3
    except FracapError as exc:
        stderr.write(f"fracap: {exc}\n")
        return 2
    _emit(records, args, stdout)
    return 0 if ok else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

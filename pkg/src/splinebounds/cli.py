"""Command-line interface.

Exit status: 0 when everything checked passes, 1 when an estimate is
violated, 2 for usage or configuration errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from . import constants as C
from .errors import SplineBoundsError
from .experiments import emit_figure, load_config, run_convergence, run_verify
from .projectors import estimate_constant
from .spline_core import SplineSpace, uniform_knots

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2


def _num(v: float) -> float:
    # json writes the shortest round-trip repr, at most 17 significant digits
    return float(v)


def _breakdown_json(b: C.BoundBreakdown) -> str:
    d = b.as_dict()
    d["candidates"] = {k: _num(v) for k, v in d["candidates"].items()}
    d["extras"] = {k: _num(v) for k, v in d["extras"].items()}
    d["minimum"] = _num(d["minimum"])
    return json.dumps(d, indent=2, sort_keys=True)


def _cmd_constants(args) -> int:
    text = emit_figure(args.figure, args.out, args.max_degree)
    if args.out is None:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_bound(args) -> int:
    k = args.p - 1 if args.k is None else args.k
    if args.kind == "reduced":
        h_hat = args.h_hat if args.h_hat is not None else args.h
        v = C.reduced_bound(args.parity, args.variant, args.p, args.h, h_hat)
        b = C.BoundBreakdown.from_candidates({f"reduced_{args.parity}_{args.variant}": v})
    else:
        q = args.q if args.q is not None else (1 if args.kind == "q" else 0)
        query = C.EstimateQuery(p=args.p, k=k, r=args.r, h=args.h, L=args.length, q=q, ell=args.ell)
        if args.kind == "C":
            b = C.C_hpkr(query)
        elif args.kind == "max_smooth":
            b = C.max_smooth_bounds(query)
        elif args.kind == "ritz":
            b = C.ritz_bound(query)
        else:
            b = C.BoundBreakdown.from_candidates({"q_product": C.q_bound(query)})
    print(_breakdown_json(b))
    return EXIT_OK


def _report(report, out) -> int:
    if out:
        report.write_csv(out)
    else:
        sys.stdout.write(report.to_csv())
    bad = [r for r in report.rows if r.violated]
    print(f"{report.name}: {len(report.rows)} rows, {len(bad)} violations, "
          f"max effectivity {report.max_effectivity:.6g}", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_VIOLATION


def _cmd_project(args) -> int:
    return _report(run_verify(load_config(args.config)), args.out)


def _cmd_convergence(args) -> int:
    return _report(run_convergence(load_config(args.config)), args.out)


def _cmd_opnorm(args) -> int:
    space = SplineSpace(uniform_knots(args.a, args.b, args.N), args.p, args.k)
    est = estimate_constant(space, args.r, args.grid)
    out = {"p": args.p, "k": args.k, "N": args.N, "r": args.r, "grid": est.grid, "value": _num(est.value)}
    try:
        out["bound"] = _num(C.C_value(space.knots.h, args.p, args.k, args.r, space.knots.length))
    except SplineBoundsError:
        out["bound"] = None
    print(json.dumps(out, sort_keys=True))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="splinebounds", description="Explicit spline approximation error bounds.")
    sub = parser.add_subparsers(dest="command", required=True)

    c = sub.add_parser("constants", help="emit the data behind a constant figure as CSV")
    c.add_argument("--figure", type=int, choices=[1, 2, 3, 4], required=True)
    c.add_argument("--out")
    c.add_argument("--max-degree", type=int, default=10)
    c.set_defaults(func=_cmd_constants)

    b = sub.add_parser("bound", help="print a bound breakdown as JSON")
    b.add_argument("--p", type=int, required=True)
    b.add_argument("--k", type=int, help="smoothness (default p - 1)")
    b.add_argument("--r", type=int, default=1)
    b.add_argument("--h", type=float, required=True)
    b.add_argument("--length", type=float, default=1.0)
    b.add_argument("--kind", choices=["C", "max_smooth", "ritz", "q", "reduced"], default="C")
    b.add_argument("--q", type=int)
    b.add_argument("--ell", type=int, default=0)
    b.add_argument("--parity", choices=["even", "odd"], default="even")
    b.add_argument("--variant", choices=["strict", "bar"], default="strict")
    b.add_argument("--h-hat", type=float)
    b.set_defaults(func=_cmd_bound)

    for name, func, text in (("project", _cmd_project, "verify estimates for a JSON config"),
                             ("convergence", _cmd_convergence, "verify estimates and fitted rates")):
        s = sub.add_parser(name, help=text)
        s.add_argument("--config", required=True)
        s.add_argument("--out")
        s.set_defaults(func=func)

    o = sub.add_parser("opnorm", help="estimate the operator norm ||(I - Z) K^r|| from below")
    o.add_argument("--p", type=int, required=True)
    o.add_argument("--k", type=int, required=True)
    o.add_argument("--N", type=int, required=True)
    o.add_argument("--r", type=int, required=True)
    o.add_argument("--grid", type=int, default=400)
    o.add_argument("--a", type=float, default=0.0)
    o.add_argument("--b", type=float, default=1.0)
    o.set_defaults(func=_cmd_opnorm)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on usage errors
    try:
        return args.func(args)
    except SplineBoundsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

"""Command-line front end: ``affine-dr {monotone,dr,poisson,toeplitz-inverse}``.

Exit codes: 0 success, 2 mathematical infeasibility (empty solution set,
singular matrix, iteration cap), 3 usage or parse error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys

import numpy as np

from . import engine, monotone, poisson, relations, structured
from .errors import (
    AffineDRError,
    EmptySum,
    MaxIterExceeded,
    NoFixedPoint,
    NoSolution,
    NotMaximal,
    ParseError,
    SingularMatrix,
)
from .specs import parse_function, parse_matrix, parse_relation, parse_vector

log = logging.getLogger("affine_dr")

EXIT_OK, EXIT_INFEASIBLE, EXIT_USAGE = 0, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _clean(value):
    """Replace non-finite floats so the JSON stays standard."""
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, np.ndarray):
        return _clean(value.tolist())
    if isinstance(value, (float, np.floating)) and not math.isfinite(value):
        return None
    return value


def _dump(obj):
    return json.dumps(_clean(obj), sort_keys=True, indent=2, default=_json_default) + "\n"


def _write(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _grid_text(values, n):
    rows = np.asarray(values, dtype=float).reshape(n, -1)
    return "".join(" ".join(f"{v:.17g}" for v in row) + "\n" for row in rows)


def _spec_text(parts):
    return " ".join(parts)


def cmd_monotone(args):
    spec = parse_matrix(_spec_text(args.spec))
    m = spec.matrix
    report = {
        "n": m.shape[0],
        "monotone": monotone.is_monotone(m, args.tol),
        "symmetric": monotone.is_symmetric(m),
        "min_symmetric_eigenvalue": monotone.min_symmetric_eigenvalue(m),
    }
    report["paramonotone"] = monotone.is_paramonotone_linear(m) if report["monotone"] else None
    if m.shape[0] <= 64:
        report["eigenvalue_real_parts"] = monotone.eigenvalue_real_parts(m)
        report["eigenvalue_real_parts_nonnegative"] = bool(np.min(report["eigenvalue_real_parts"]) >= -1e-8)
    if m.shape == (2, 2):
        report["monotone_2x2"] = monotone.is_monotone_2x2(m)
    if spec.tridiag is not None:
        t = spec.tridiag
        report["tridiag"] = {"alpha": t.alpha, "beta": t.beta, "gamma": t.gamma, "n": t.n}
        report["threshold"] = structured.monotone_threshold(t)
        report["monotone_tridiag"] = structured.is_monotone_tridiag(t)
    _write(args.out, _dump(report))
    return EXIT_OK


def _starting_point(text, n, seed):
    key = text.strip().lower()
    if key == "random":
        return np.random.default_rng(seed).standard_normal(n)
    if key == "zeros":
        return np.zeros(n)
    return parse_vector(text, n)


def cmd_dr(args):
    a = parse_relation(_spec_text(args.A))
    b = parse_relation(_spec_text(args.B))
    if a.dim != b.dim:
        raise UsageError(f"A acts on R^{a.dim} but B acts on R^{b.dim}")
    x0 = _starting_point(args.x0, a.dim, args.seed)
    T = engine.dr_operator(a, b)
    trace = engine.run_dr(a, b, x0, args.max_iter, args.tol)
    pair = relations.attouch_thera(a, b)
    pz = pair.Z.project(x0)
    summary = {
        "n": a.dim,
        "x0": x0,
        "iterations": trace.iterations,
        "converged": trace.converged,
        "final_residual": trace.residuals[-1] if trace.residuals else 0.0,
        "final_point": trace.final,
        "final_shadow": trace.final_shadow,
        "P_Z_x0": pz,
        "shadow_gap_to_PZ": float(np.linalg.norm(trace.final_shadow - pz)),
        "fitted_rate": trace.fitted_rate,
        "spectral_rate": engine.spectral_rate(T),
        "dim_Z": pair.Z.dim,
        "dim_K": pair.K.dim if pair.K is not None else None,
        "K_route_gap": pair.route_gap,
    }
    summary["shadow_reaches_PZ"] = bool(summary["shadow_gap_to_PZ"] <= 1e-6 * (1.0 + np.linalg.norm(pz)))
    fix = relations.fix_decomposition_check(a, b)
    summary["fix_decomposition"] = {
        "fix_equals_Z_plus_K": fix.equal,
        "distance": fix.distance,
        "K_perp_Zdiff": fix.k_perp_z,
        "Kdiff_perp_Zdiff": fix.kdiff_perp_zdiff,
    }
    pred = relations.shadow_limit_predicate(a, b, seed=args.seed)
    summary["shadow_predicate"] = {
        "paramonotone": pred.paramonotone,
        "K_perp_Zdiff": pred.k_perp_zdiff,
        "predicts_shadow_to_PZ": pred.predicts_shadow_to_PZ,
        "identity_gap": pred.identity_gap,
    }
    csv_text = trace.to_csv()
    if args.out:
        _write(args.out, csv_text)
    _write(None, csv_text if args.format == "csv" else _dump(summary))
    return EXIT_OK


def _poisson_from_file(path):
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc.msg}", exc.pos) from None
    if not isinstance(data, dict) or "n" not in data:
        raise ParseError(f"{path}: expected an object with key 'n'")
    n = data["n"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 2:
        raise ParseError(f"{path}: 'n' must be an integer >= 2")
    h = 1.0 / (n + 1)
    t = np.arange(1, n + 1) * h
    f = data.get("f", 0.0)
    if isinstance(f, str):
        xx, yy = np.meshgrid(t, t)
        f = parse_function(f)(xx, yy)
    boundary = data.get("boundary", 0.0)
    sides = {}
    zero, one = np.zeros(n), np.ones(n)
    coords = {"bottom": (t, zero), "top": (t, one), "left": (zero, t), "right": (one, t)}
    for side in poisson.SIDES:
        value = boundary.get(side, 0.0) if isinstance(boundary, dict) else boundary
        if isinstance(value, str):
            value = parse_function(value)(*coords[side])
        sides[side] = value
    try:
        return poisson.PoissonProblem(n, np.array(f, dtype=float), **sides)
    except (ValueError, TypeError) as exc:
        raise ParseError(f"{path}: {exc}") from None


def cmd_poisson(args):
    if args.input:
        p = _poisson_from_file(args.input)
    else:
        if args.n is None:
            raise UsageError("either --n or --input is required")
        p = poisson.PoissonProblem.from_functions(args.n, parse_function(args.f), parse_function(args.g))
    result = poisson.solve_poisson_dr(p, tol=args.tol, max_iter=args.max_iter)
    summary = {
        "n": p.n,
        "h": p.h,
        "iterations": result.trace.iterations,
        "converged": result.trace.converged,
        "residual": result.residual,
        "direct_gap": result.direct_gap,
    }
    if args.out:
        _write(args.out, _grid_text(result.solution, p.n))
    if args.trace:
        _write(args.trace, result.trace.to_csv())
    if args.format == "csv":
        _write(None, result.trace.to_csv())
    elif args.format == "grid":
        _write(None, _grid_text(result.solution, p.n))
    else:
        _write(None, _dump(summary))
    return EXIT_OK


_METHODS = {
    "closed": structured.invert_closed_form,
    "recurrence": structured.invert_recurrence,
    "triangular": structured.invert_triangular_case,
}


def cmd_toeplitz_inverse(args):
    t = structured.TridiagToeplitz(args.alpha, args.beta, args.gamma, args.n)
    method = args.method
    if method == "auto":
        method = "triangular" if t.alpha * t.gamma == 0 else "recurrence"
    if method != "triangular" and t.alpha * t.gamma != 0:
        structured.check_invertible(t)
    inv = _METHODS[method](t)
    others = {"dense": np.linalg.inv(structured.to_dense(t))}
    if t.alpha * t.gamma != 0:
        for name in ("closed", "recurrence"):
            if name != method:
                others[name] = _METHODS[name](t)
    scale = max(1.0, float(np.max(np.abs(inv))))
    discrepancy = {k: float(np.max(np.abs(inv - v))) / scale for k, v in sorted(others.items())}
    report = {
        "alpha": t.alpha, "beta": t.beta, "gamma": t.gamma, "n": t.n,
        "method": method,
        "inverse": inv,
        "max_discrepancy": max(discrepancy.values()),
        "discrepancy": discrepancy,
    }
    if args.out:
        _write(args.out, _grid_text(inv, t.n) + f"# max_discrepancy {report['max_discrepancy']:.3e}\n")
    if args.format == "csv":
        rows = "".join(",".join(f"{v:.17g}" for v in row) + "\n" for row in inv)
        _write(None, rows + f"# max_discrepancy,{report['max_discrepancy']:.3e}\n")
    else:
        _write(None, _dump(report))
    return EXIT_OK


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--tol", type=float, default=1e-10, help="tolerance (default 1e-10)")
    common.add_argument("--max-iter", type=int, default=100_000, help="iteration cap")
    common.add_argument("--seed", type=int, default=0, help="seed for random starting points")
    common.add_argument("--out", default=None, help="output file")

    parser = _Parser(prog="affine-dr", description="Douglas-Rachford splitting for affine monotone relations.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("monotone", parents=[common], help="monotonicity report for a matrix expression")
    p.add_argument("spec", nargs="+", help="matrix expression, e.g. 'tridiag -1 2 -1 5'")
    p.add_argument("--format", choices=["json"], default="json")
    p.set_defaults(func=cmd_monotone)

    p = sub.add_parser("dr", parents=[common], help="run Douglas-Rachford on two relations")
    p.add_argument("--A", nargs="+", required=True, help="relation expression for A")
    p.add_argument("--B", nargs="+", required=True, help="relation expression for B")
    p.add_argument("--x0", default="random", help="starting point: JSON list, 'random' or 'zeros'")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.set_defaults(func=cmd_dr)

    p = sub.add_parser("poisson", parents=[common], help="solve the Dirichlet-Poisson demo")
    p.add_argument("--n", type=int, default=None, help="interior grid points per side")
    p.add_argument("--f", default="0", help="source f(x, y) with Δu = f")
    p.add_argument("--g", default="0", help="Dirichlet boundary values g(x, y)")
    p.add_argument("--input", default=None, help="JSON problem file")
    p.add_argument("--trace", default=None, help="write the iteration trace CSV here")
    p.add_argument("--format", choices=["json", "csv", "grid"], default="json")
    p.set_defaults(func=cmd_poisson)

    p = sub.add_parser("toeplitz-inverse", parents=[common], help="invert a tridiagonal Toeplitz matrix")
    p.add_argument("alpha", type=float)
    p.add_argument("beta", type=float)
    p.add_argument("gamma", type=float)
    p.add_argument("n", type=int)
    p.add_argument("method", nargs="?", default="auto", choices=["auto", "closed", "recurrence", "triangular"])
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.set_defaults(func=cmd_toeplitz_inverse)
    return parser


def _configure_logging():
    level = os.environ.get("AFFINE_DR_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def _validate(args):
    if getattr(args, "tol", 1.0) <= 0 or not math.isfinite(args.tol):
        raise UsageError("--tol must be positive")
    if getattr(args, "max_iter", 1) < 1:
        raise UsageError("--max-iter must be at least 1")
    if getattr(args, "n", None) is not None and args.command in ("poisson",) and args.n < 2:
        raise UsageError("--n must be at least 2")


def main(argv=None):
    _configure_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(sys.stderr)
            return EXIT_USAGE
        _validate(args)
        return args.func(args)
    except (UsageError, ParseError) as exc:
        print(f"affine-dr: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SingularMatrix as exc:
        lam = exc.eigenvalue
        if isinstance(lam, complex) and lam.imag == 0:
            lam = lam.real
        print(f"affine-dr: singular matrix: {exc}; offending eigenvalue {lam}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except MaxIterExceeded as exc:
        print(f"affine-dr: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (NoSolution, NoFixedPoint, EmptySum, NotMaximal) as exc:
        print(f"affine-dr: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ArithmeticError as exc:
        print(f"affine-dr: numerical failure: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ValueError, OSError, AffineDRError) as exc:
        print(f"affine-dr: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

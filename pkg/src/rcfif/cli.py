"""Command-line front end.

Exit codes: 0 success, 2 validation failure, 3 infeasible shape, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import analysis
from .core import (
    DEFAULT_KAPPA,
    FifError,
    FifParameters,
    InfeasibleShapeError,
    ShapeClass,
    build_fif,
)
from .estimate import arithmetic_mean_derivatives
from .evaluation import EvalSettings, evaluate, sample_attractor
from .io import DatasetError, fmt, parse_dataset, read_curve, svg_polyline, write_csv
from .shape import alpha_bounds, check_shape_parameters, r_bound, select_parameters, verify_shape

EXIT_OK, EXIT_INVALID, EXIT_INFEASIBLE, EXIT_IO = 0, 2, 3, 4

GENERATORS = {
    "sin": (np.sin, np.cos, lambda x: -np.sin(x), lambda x: -np.cos(x), np.sin),
    "cos": (np.cos, lambda x: -np.sin(x), lambda x: -np.cos(x), np.sin, np.cos),
    "exp": (np.exp,) * 5,
    "linear": (lambda x: 2.0 * x + 1.0, lambda x: np.full_like(x, 2.0),
               np.zeros_like, np.zeros_like, np.zeros_like),
}


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _plain(v):
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    raise TypeError(f"not JSON serializable: {type(v).__name__}")


def _emit(args, payload, text):
    if getattr(args, "json", False):
        print(json.dumps(payload, indent=2, sort_keys=True, default=_plain))
    else:
        print(text)


def _load(args):
    dataset = parse_dataset(args.data)
    data, provenance = dataset.hermite()
    return data, provenance


def _parameters(args, data, shape):
    """Explicit --alpha/--r when given, otherwise automatic selection."""
    m = data.intervals
    if args.alpha is None:
        return select_parameters(data, shape, args.t, args.r, kappa=args.kappa)
    alpha = np.broadcast_to(np.asarray(args.alpha), (m,)).astype(float) \
        if len(args.alpha) in (1, m) else None
    if alpha is None:
        raise DatasetError(f"--alpha needs 1 or {m} values, got {len(args.alpha)}")
    if args.r is not None:
        if len(args.r) not in (1, m):
            raise DatasetError(f"--r needs 1 or {m} values, got {len(args.r)}")
        r = np.broadcast_to(np.asarray(args.r), (m,)).astype(float)
    else:
        r = r_bound(data, shape, alpha).optimal
    return FifParameters(alpha, r, args.kappa)


def _fit(args):
    data, provenance = _load(args)
    shape = ShapeClass(args.shape)
    params = _parameters(args, data, shape)
    violations = check_shape_parameters(data, params, shape)
    fif = build_fif(data, params)
    return data, provenance, shape, params, fif, violations


def cmd_bounds(args):
    data, provenance = _load(args)
    shape = ShapeClass(args.shape)
    rep = alpha_bounds(data, shape, kappa=args.kappa)
    payload = rep.to_dict()
    payload["provenance"] = provenance
    names = []
    for b in rep.intervals:
        names += [k for k in b.terms if k not in names]
    lines = [f"# {provenance}", f"shape: {shape.value}  kappa: {rep.kappa}"]
    head = ["interval", "alpha<", "data-only", "binding", *names, "r_lower", "r_opt"]
    rows = []
    for b in rep.intervals:
        cells = [str(b.interval), f"{b.upper:.4f}", f"{b.data_upper:.4f}", b.binding]
        cells += [f"{b.terms[k]:.4f}" if k in b.terms else "-" for k in names]
        k = b.interval - 1
        cells += [f"{rep.r_lower[k]:.4f}", f"{rep.r_optimal[k]:.4f}"]
        rows.append(cells)
    widths = [max(len(r[c]) for r in [head, *rows]) for c in range(len(head))]
    for r in [head, *rows]:
        lines.append("  ".join(cell.rjust(w) for cell, w in zip(r, widths)))
    lines += [f"note: {n}" for n in rep.notes()]
    lines += [f"violated: {d}" for d in rep.diagnostics]
    _emit(args, payload, "\n".join(lines))
    if not rep.feasible:
        print("necessary conditions violated: " + "; ".join(rep.diagnostics), file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_fit(args):
    data, provenance, shape, params, fif, violations = _fit(args)
    payload = {
        "shape": shape.value,
        "provenance": provenance,
        "alpha": params.alpha.tolist(),
        "r": params.r.tolist(),
        "kappa": params.kappa,
        "classical": bool(np.all(params.alpha == 0)),
        "valid": not violations,
        "violations": [v.message for v in violations],
        "coefficients": {k: fif.num[j].tolist() for j, k in enumerate("ABCD")},
    }
    lines = [f"# {provenance}", f"shape: {shape.value}"]
    if payload["classical"]:
        lines.append("classical rational cubic spline (all scaling factors zero)")
    lines.append(f"{'i':>3}  {'alpha':>14}  {'r':>14}  {'A':>14}  {'B':>14}  {'C':>14}  {'D':>14}")
    for i in range(data.intervals):
        vals = [params.alpha[i], params.r[i], *fif.num[:, i]]
        lines.append(f"{i + 1:>3}  " + "  ".join(f"{fmt(v):>14}" for v in vals))
    lines.append("validation: " + ("passed" if not violations else "FAILED"))
    lines += [f"  {v.message}" for v in violations]
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK if not violations else EXIT_INVALID


def cmd_sample(args):
    data, provenance, shape, params, fif, violations = _fit(args)
    sample = sample_attractor(fif, args.depth)
    comments = [provenance, f"shape: {shape.value}",
                "alpha: " + ",".join(fmt(v) for v in params.alpha),
                "r: " + ",".join(fmt(v) for v in params.r),
                f"sample depth: {args.depth}"]
    cols = [sample.x.tolist(), sample.y.tolist(), sample.dy.tolist(),
            sample.generation.tolist()]
    out = args.out or sys.stdout
    write_csv(out, ["x", "S", "S1", "depth"], cols, comments)
    if args.out:
        print(f"wrote {len(sample)} points to {args.out}", file=sys.stderr)
    return EXIT_OK


def cmd_eval(args):
    data, provenance, shape, params, fif, violations = _fit(args)
    settings = EvalSettings(tol=args.tol, max_depth=args.max_depth)
    res = evaluate(fif, np.asarray(args.x), settings, derivative=args.derivative)
    ok = bool(np.all(res.bound <= args.tol))
    payload = {
        "quantity": "S1" if args.derivative else "S",
        "points": [{"x": float(x), "value": float(v), "bound": float(b), "depth": int(k)}
                   for x, v, b, k in zip(args.x, res.value, res.bound, res.depth)],
        "tolerance": args.tol,
        "tolerance_met": ok,
    }
    name = "S1" if args.derivative else "S"
    lines = [f"{'x':>14}  {name:>20}  {'certified error':>16}  depth"]
    lines += [f"{fmt(x):>14}  {fmt(v):>20}  {b:16.3e}  {k}"
              for x, v, b, k in zip(args.x, res.value, res.bound, res.depth)]
    _emit(args, payload, "\n".join(lines))
    if not ok:
        print(f"tolerance {args.tol:g} not met within {args.max_depth} levels "
              f"(achieved {res.bound.max():.3e})", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


def cmd_check(args):
    data, provenance, shape, params, fif, violations = _fit(args)
    result = verify_shape(fif, shape, args.depth, args.tol)
    payload = result.to_dict()
    payload["parameter_violations"] = [v.message for v in violations]
    text = f"{shape.value}: {'PASS' if result.passed else 'FAIL'} ({result.points} points, depth {args.depth})"
    if not result.passed:
        text += f"\nwitness: {fmt(result.witness[0])} .. {fmt(result.witness[1])}\n{result.detail}"
    _emit(args, payload, text)
    return EXIT_OK if result.passed else EXIT_INVALID


def cmd_converge(args):
    f, df, *higher = GENERATORS[args.function]
    res = analysis.convergence_order(
        f, df, tuple(args.interval), args.sizes, args.alpha_rule, args.r_rule,
        r_value=args.r_value, alpha_fraction=args.alpha_fraction, higher=higher, tol=args.tol,
    )
    lines = [f"{'N':>6}  {'h':>12}  {'max error':>12}  {'C4 bound':>12}"]
    lines += [f"{r.n:>6}  {r.h:12.6g}  {r.error:12.4e}  {r.bound:12.4e}" for r in res.rows]
    lines.append("order: exact" if res.exact else f"order: {res.order:.4f}")
    _emit(args, res.to_dict(), "\n".join(lines))
    return EXIT_OK


def cmd_estimate(args):
    dataset = parse_dataset(args.data)
    d = arithmetic_mean_derivatives(dataset.x, dataset.y)
    out = args.out or sys.stdout
    write_csv(out, ["x", "y", "d"], [dataset.x.tolist(), dataset.y.tolist(), d.tolist()],
              ["derivatives: estimated (arithmetic mean)"])
    return EXIT_OK


def cmd_plot(args):
    x, y = read_curve(args.sample)
    markers = None
    if args.knots:
        ds = parse_dataset(args.knots)
        markers = (ds.x, ds.y)
    svg = svg_polyline(x, y, width=args.width, height=args.height, markers=markers,
                       title=args.title)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(svg)
    else:
        sys.stdout.write(svg)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rcfif", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, data=True, fit=True):
        if data:
            sp.add_argument("data", help="CSV (x,y[,d]) or JSON dataset")
        sp.add_argument("--json", action="store_true", help="machine-readable output")
        if fit:
            sp.add_argument("--shape", default=ShapeClass.UNCONSTRAINED.value,
                            choices=[s.value for s in ShapeClass])
            sp.add_argument("--t", type=float, default=0.5, help="fractality dial in [0, 1)")
            sp.add_argument("--alpha", type=_floats, help="explicit scaling factors")
            sp.add_argument("--r", type=_floats, help="explicit shape parameters")
            sp.add_argument("--kappa", type=float, default=DEFAULT_KAPPA)

    sp = sub.add_parser("bounds", help="admissible parameter bounds for a shape class")
    sp.add_argument("data")
    sp.add_argument("--json", action="store_true")
    sp.add_argument("--shape", default=ShapeClass.MONOTONE_INCREASING.value,
                    choices=[s.value for s in ShapeClass])
    sp.add_argument("--kappa", type=float, default=DEFAULT_KAPPA)
    sp.set_defaults(func=cmd_bounds)

    sp = sub.add_parser("fit", help="fit a model and report parameters and coefficients")
    common(sp)
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("sample", help="exact attractor sample to CSV")
    common(sp)
    sp.add_argument("--depth", type=int, default=4)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_sample)

    sp = sub.add_parser("eval", help="certified point evaluation")
    common(sp)
    sp.add_argument("--x", type=_floats, required=True)
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("--max-depth", type=int, default=10_000)
    sp.add_argument("--derivative", action="store_true")
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("check", help="verify the shape on an exact sample")
    common(sp)
    sp.add_argument("--depth", type=int, default=6)
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("converge", help="empirical convergence order")
    sp.add_argument("--json", action="store_true")
    sp.add_argument("--function", choices=sorted(GENERATORS), default="sin")
    sp.add_argument("--interval", type=_floats, default=[0.0, 1.0])
    sp.add_argument("--sizes", type=_ints, default=[9, 17, 33, 65])
    sp.add_argument("--alpha-rule", choices=sorted(analysis.ALPHA_RULES), default="a4")
    sp.add_argument("--alpha-fraction", type=float, default=0.5)
    sp.add_argument("--r-rule", choices=analysis.R_RULES, default="fixed")
    sp.add_argument("--r-value", type=float, default=3.0)
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.set_defaults(func=cmd_converge)

    sp = sub.add_parser("estimate-derivs", help="arithmetic-mean derivative estimates to CSV")
    sp.add_argument("data")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_estimate)

    sp = sub.add_parser("plot", help="SVG polyline of a sample CSV")
    sp.add_argument("sample")
    sp.add_argument("--out")
    sp.add_argument("--knots", help="dataset whose knots are drawn as markers")
    sp.add_argument("--width", type=int, default=640)
    sp.add_argument("--height", type=int, default=400)
    sp.add_argument("--title", default="")
    sp.set_defaults(func=cmd_plot)
    return p


def _fail(args, code, kind, message):
    if getattr(args, "json", False):
        print(json.dumps({"error": kind, "message": message, "exit": code}), file=sys.stderr)
    else:
        print(f"error: {message}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InfeasibleShapeError as exc:
        return _fail(args, EXIT_INFEASIBLE, "infeasible-shape", str(exc))
    except OSError as exc:
        return _fail(args, EXIT_IO, "io", str(exc))
    except (FifError, ValueError) as exc:
        return _fail(args, EXIT_INVALID, "validation", str(exc))


if __name__ == "__main__":
    raise SystemExit(main())

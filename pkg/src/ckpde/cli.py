"""Command-line front end: JSON in, JSON or text report out, verdict in the exit status.

Exit status 0 means the verdict is positive (compatible, clean, admissible,
integral, nondegenerate), 1 means it is negative, and 2 signals an input or
usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from collections.abc import Mapping, Sequence
from fractions import Fraction

from . import cauchy, compat, eds, geometry, mongeampere
from .errors import (
    CharacteristicSlopeError,
    CKError,
    IncompatibilityError,
    NotIntegralError,
    PolarSpaceError,
    ResidualError,
    SingularSystemError,
)
from .series import TruncatedSeries, series_from_json
from .system import SystemSpec

OK, NEGATIVE, USAGE = 0, 1, 2

# errors that are verdicts rather than bad input
_NEGATIVE_ERRORS = (IncompatibilityError, ResidualError, CharacteristicSlopeError,
                    NotIntegralError, PolarSpaceError, SingularSystemError)


class InputError(Exception):
    """Unreadable or malformed input file; carries the location."""


def default_order() -> int:
    raw = os.environ.get("CK_DEFAULT_ORDER")
    if raw is None:
        return 8
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"CK_DEFAULT_ORDER={raw!r} is not an integer") from None


# ---------------------------------------------------------------------- loading
def _load(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON ({exc.msg})") from exc


def _frac(v, where):
    try:
        return Fraction(v) if isinstance(v, (str, int)) else Fraction(str(v))
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise InputError(f"{where}: expected a rational, got {v!r}") from exc


def _series(doc, where, order=None) -> TruncatedSeries:
    """A series document, or a plain coefficient list for a univariate series."""
    if isinstance(doc, Mapping):
        try:
            s = series_from_json(doc)
        except ValueError as exc:
            raise InputError(f"{where}: {exc}") from exc
        return s if order is None else s.truncate(min(order, s.order))
    if isinstance(doc, Sequence) and not isinstance(doc, str):
        coeffs = [_frac(c, f"{where}[{i}]") for i, c in enumerate(doc)]
        return TruncatedSeries.univariate(coeffs, order if order is not None else max(len(coeffs), 1))
    raise InputError(f"{where}: expected a series object or a coefficient list")


def _with_path(path, fn, *args):
    try:
        return fn(*args)
    except (InputError, *_NEGATIVE_ERRORS):
        raise
    except CKError as exc:
        raise InputError(f"{path}: {exc}") from exc


def load_system(path) -> SystemSpec:
    return _with_path(path, SystemSpec.from_json, _load(path))


def _slope_of(doc, path):
    slope = doc.get("slope") if isinstance(doc, Mapping) else doc
    if slope is None:
        return None
    if not isinstance(slope, Sequence):
        raise InputError(f"{path}: slope must be a matrix (list of rows)")
    return [[_frac(v, f"{path}: slope") for v in row] for row in slope]


# ---------------------------------------------------------------------- formatting
def fmt_rational(q) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q} ({float(q):.6g})"


def _matrix_text(rows) -> str:
    return "[" + "; ".join(", ".join(fmt_rational(v) for v in r) for r in rows) + "]"


# ---------------------------------------------------------------------- commands
def cmd_compat(args):
    sysm = load_system(args.system)
    order = args.order if args.order is not None else default_order()
    rep = compat.check_compatibility(sysm, samples=args.samples, seed=args.seed, order=order)
    lines = [rep.summary(), f"samples: {len(rep.points)} (seed {rep.seed})"]
    for w in rep.witnesses[:5]:
        lines.append(f"witness: {w.label()} = {fmt_rational(w.difference)}")
    lines += [f"note: {n}" for n in rep.notes]
    return (OK if rep.compatible else NEGATIVE), rep.to_json(), lines


def _order_from(args, doc):
    if args.order is not None:
        return args.order
    if isinstance(doc, Mapping) and "order" in doc:
        return int(doc["order"])
    return default_order()


def cmd_solve(args):
    sysm = load_system(args.system)
    doc = _load(args.data)
    order = _order_from(args, doc)
    _check_order(order)
    if not isinstance(doc, Mapping) or "data" not in doc:
        raise InputError(f"{args.data}: needs a list 'data'")
    data = _with_path(args.data, cauchy.CauchyData,
                      tuple(_series(s, f"{args.data}: data[{i}]", None if isinstance(s, Mapping) else order)
                            for i, s in enumerate(doc["data"])))
    slope = _slope_of(doc, args.data)
    sol = _with_path(args.data, lambda: cauchy.solve(sysm, data, order, slope=slope, check=False))
    eq, mismatch = cauchy.residual(sysm, sol, data)
    summary = cauchy.residual_summary(eq, mismatch)
    report = {"solution": sol.to_json(), "residual": summary,
              "text": [s.format() for s in sol.u]}
    lines = [f"residual: {summary}", f"order: {order}"]
    lines += [f"u^{a} = {s.format()}" for a, s in enumerate(sol.u, start=1)]
    return (OK if summary == "clean" else NEGATIVE), report, lines


def cmd_jet(args):
    sysm = load_system(args.system)
    slope = _slope_of(_load(args.slope), args.slope) if args.slope else None
    if args.data is None:
        if slope is not None:
            ok, d = cauchy.slope_noncharacteristic(sysm, slope)
            if not ok:
                raise CharacteristicSlopeError(f"slope is characteristic (det V = {d})", determinant=d)
        ok = cauchy.approximately_solvable(sysm)
        text = "approximately solvable for all data" if ok else "not approximately solvable"
        return (OK if ok else NEGATIVE), {"approximately_solvable": ok, "summary": text}, [text]
    doc = _load(args.data)
    data = _with_path(args.data, cauchy.CauchyData.from_json, doc)
    if slope is None:
        jet = _with_path(args.data, cauchy.approximate_jet, sysm, data)
    else:
        jet = _with_path(args.data, cauchy.tilted_approximate_jet, sysm, slope, data)
    lines = ["approximate 2-jet"]
    lines += [f"u^{a} = {fmt_rational(v)}" for a, v in sorted(jet.u.items())]
    lines += [f"u^{a}_{i} = {fmt_rational(v)}" for (a, i), v in sorted(jet.du.items())]
    lines += [f"u^{a}_{i}{j} = {fmt_rational(v)}" for (a, i, j), v in sorted(jet.ddu.items())]
    return OK, {"jet": jet.to_json(), "summary": "approximate 2-jet"}, lines


def cmd_slope(args):
    sysm = load_system(args.system)
    slope = _slope_of(_load(args.slope), args.slope)
    if slope is None:
        raise InputError(f"{args.slope}: no slope given")
    slope = _with_path(args.slope, cauchy.normalize_slope, sysm, slope)
    V = cauchy.slope_matrix(sysm, slope)
    ok, d = cauchy.slope_noncharacteristic(sysm, slope)
    text = "non-characteristic" if ok else "characteristic"
    report = {"noncharacteristic": ok, "determinant": str(d), "summary": f"{text} (det V = {d})",
              "V": [[str(v) for v in r] for r in V]}
    return (OK if ok else NEGATIVE), report, [f"{text}", f"det V = {fmt_rational(d)}",
                                              f"V = {_matrix_text(V)}"]


def cmd_eds(args):
    sysm = load_system(args.system)
    doc = _load(args.element)
    if not isinstance(doc, Mapping) or "z" not in doc or "basis" not in doc:
        raise InputError(f"{args.element}: needs keys 'z' and 'basis'")
    z = _with_path(args.element, eds.JetPoint.from_flat, sysm, doc["z"])
    basis = _with_path(args.element, eds.IntegralElementBasis.from_json, doc["basis"])
    _with_path(args.element, basis.check_shape, sysm)
    res = _with_path(args.element, eds.element_residuals, sysm, z, basis)
    report = {"residuals": res.to_json(), "integral": res.all_zero()}
    if not res.all_zero():
        bad = res.nonzero()
        report["summary"] = f"not integral ({len(bad)} nonzero residuals)"
        lines = [report["summary"]] + [f"{name}{list(key)} = {fmt_rational(v)}" for name, key, v in bad[:8]]
        return NEGATIVE, report, lines
    ps = eds.polar_space(sysm, z, basis)
    report["polar_space"] = ps.to_json()
    report["summary"] = f"integral; dim H(E) = {ps.dim}"
    lines = [report["summary"]]
    if ps.determinant is not None:
        lines.append(f"projected slope det V = {fmt_rational(ps.determinant)}")
    lines += [f"note: {n}" for n in ps.notes]
    return OK, report, lines


def _load_rhs(path):
    return _with_path(path, mongeampere.MongeRhs.from_json, _load(path))


def cmd_monge(args):
    rhs = _load_rhs(args.rhs)
    order = args.order if args.order is not None else default_order()
    _check_order(order)
    rep = mongeampere.classify_rhs(rhs, order)
    report = {"classification": rep.to_json(), "summary": rep.summary()}
    lines = [rep.summary()]
    if rep.verdict == "inadmissible":
        return NEGATIVE, report, lines
    if args.data:
        doc = _load(args.data)
        if not isinstance(doc, Mapping) or "a" not in doc or "a_normal" not in doc:
            raise InputError(f"{args.data}: needs keys 'a' and 'a_normal'")
        if "order" in doc and args.order is None:
            order = int(doc["order"])
            _check_order(order)
        a = _series(doc["a"], f"{args.data}: a", order)
        a_normal = [_series(s, f"{args.data}: a_normal[{i}]", order - 1)
                    for i, s in enumerate(doc["a_normal"])]
        if order < 3:
            raise InputError("the second-order solve needs order >= 3")
        sol = _with_path(args.data, mongeampere.solve_full, rhs, a, a_normal, order, False)
        profile = mongeampere.hessian_rank_profile(sol.u)
        report["solution"] = sol.to_json()
        report["residual"] = "clean"
        report["hessian"] = profile.summary()
        lines += ["residual: clean", f"hessian: {profile.summary()}",
                  f"u = {sol.u.format(mongeampere._xnames(rhs.n))}"]
    return OK, report, lines


def _load_curve(path):
    return _with_path(path, geometry.SphereCurve.from_json, _load(path))


def _levi(model, args):
    j_max = args.j_max
    rep = geometry.nondegeneracy_analysis(model, j_max)
    lines = [rep.summary(), "span dims: " + ", ".join(map(str, rep.span_dims)),
             f"Levi form rank at 0: {rep.levi_form_rank}"]
    return (NEGATIVE if rep.contained else OK), rep, lines


def cmd_gauss(args):
    curve = _load_curve(args.curve)
    order = args.order if args.order is not None else min(default_order(), curve.order)
    _check_order(order)
    model = _with_path(args.curve, geometry.construct_from_curve, curve, order)
    names = mongeampere._xnames(model.n)
    report = {"model": model.to_json(), "rank_one": True,
              "summary": f"rank-one Gauss map; u = {model.u.format(names)}"}
    lines = [report["summary"]]
    status = OK
    if args.then == "levi":
        status, rep, more = _levi(model, args)
        report["levi"] = rep.to_json()
        report["summary"] += "; " + rep.summary()
        lines += more
    return status, report, lines


def cmd_levi(args):
    if bool(args.model) == bool(args.curve):
        raise InputError("levi needs exactly one of --model or --curve")
    if args.curve:
        curve = _load_curve(args.curve)
        order = args.order if args.order is not None else min(default_order(), curve.order)
        _check_order(order)
        model = _with_path(args.curve, geometry.construct_from_curve, curve, order)
    else:
        doc = _load(args.model)
        if not isinstance(doc, Mapping) or "u" not in doc:
            raise InputError(f"{args.model}: needs a series 'u'")
        model = geometry.HypersurfaceModel(_series(doc["u"], f"{args.model}: u"))
    if args.j_max is not None and args.j_max > model.order - 1:
        raise InputError(f"--j-max {args.j_max} exceeds order - 1 = {model.order - 1}")
    status, rep, lines = _levi(model, args)
    return status, rep.to_json(), lines


COMMANDS = {"compat": cmd_compat, "solve": cmd_solve, "jet": cmd_jet, "slope": cmd_slope,
            "eds": cmd_eds, "monge": cmd_monge, "gauss": cmd_gauss, "levi": cmd_levi}


# ---------------------------------------------------------------------- parser
def _check_order(order):
    if order < 2:
        raise InputError(f"order must be at least 2, got {order}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--order", type=int, default=None,
                        help="truncation order N (default: CK_DEFAULT_ORDER or 8)")
    common.add_argument("--samples", type=int, default=16, help="sample points for compat")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--output", "-o", default=None, help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "text"), default="json")

    parser = argparse.ArgumentParser(prog="ckpde", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compat", parents=[common], help="check the compatibility conditions")
    p.add_argument("--system", required=True)

    p = sub.add_parser("solve", parents=[common], help="power-series solution of the Cauchy problem")
    p.add_argument("--system", required=True)
    p.add_argument("--data", required=True, help='{"data": [series...], "order": N, "slope": [[...]]}')

    p = sub.add_parser("jet", parents=[common], help="approximate 2-jet at the base point")
    p.add_argument("--system", required=True)
    p.add_argument("--data", default=None)
    p.add_argument("--slope", default=None)

    p = sub.add_parser("slope", parents=[common], help="characteristic test for a tilted plane")
    p.add_argument("--system", required=True)
    p.add_argument("--slope", required=True)

    p = sub.add_parser("eds", parents=[common], help="integral-element residuals and polar space")
    p.add_argument("--system", required=True)
    p.add_argument("--element", required=True, help='{"z": [...], "basis": {...}}')

    p = sub.add_parser("monge", parents=[common], help="classify and solve a Monge-Ampere system")
    p.add_argument("--rhs", required=True)
    p.add_argument("--data", default=None, help='{"a": series, "a_normal": [series...]}')

    p = sub.add_parser("gauss", parents=[common], help="rank-one Gauss map hypersurface from a curve")
    p.add_argument("--curve", required=True)
    p.add_argument("--then", choices=("levi",), default=None)
    p.add_argument("--j-max", type=int, default=None)

    p = sub.add_parser("levi", parents=[common], help="nondegeneracy of the tube over a graph")
    p.add_argument("--model", default=None, help='{"u": series}')
    p.add_argument("--curve", default=None)
    p.add_argument("--j-max", type=int, default=None)
    return parser


def render(report, lines, fmt) -> str:
    if fmt == "text":
        return "\n".join(lines) + "\n"
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def run(args) -> tuple[int, str]:
    """Dispatch a parsed command; returns (exit status, rendered report)."""
    try:
        if args.samples < 1:
            raise InputError("--samples must be at least 1")
        if args.order is not None:
            _check_order(args.order)
        status, report, lines = COMMANDS[args.command](args)
    except InputError as exc:
        return USAGE, render({"error": str(exc), "status": "input-error"}, [f"error: {exc}"], args.format)
    except _NEGATIVE_ERRORS as exc:
        report = {"error": str(exc), "kind": type(exc).__name__, "status": "negative"}
        where = getattr(exc, "where", None)
        if where is not None:
            report["where"] = [str(w) for w in where]
        return NEGATIVE, render(report, [f"{type(exc).__name__}: {exc}"], args.format)
    except (CKError, ValueError, KeyError, TypeError) as exc:
        return USAGE, render({"error": str(exc), "status": "input-error"}, [f"error: {exc}"], args.format)
    report.setdefault("status", "positive" if status == OK else "negative")
    return status, render(report, lines, args.format)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    status, text = run(args)
    if args.output:
        try:
            with open(args.output, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"error: cannot write {args.output}: {exc}", file=sys.stderr)
            return USAGE
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())

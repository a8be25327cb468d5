"""Command-line interface.

Commands: density, chain, order, verify, limit-density, integrability.
Output is JSON by default (--csv switches to trajectory CSV where one
exists); identical argv yields byte-identical output.  Exit status: 0 on
success, 1 when a bound or verdict fails, 2 on usage errors, 3 on numerical
non-convergence or violated preconditions.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
from typing import Optional

import numpy as np

from .density import (check_chain, density_trajectory, estimate_density)
from .errors import ConvergenceError, PreconditionError, PsiDensityError
from .expr import Num
from .functions import ConstFn, ExpressionFn, parse_fn_spec
from .growth import (DELTA_RULES, GrowthFunction, estimate_orders,
                     estimate_type, geometric_delta, growth_from_fn,
                     make_unbounded_zigzag, make_zigzag, power_growth)
from .intervals import parse_set_spec
from .limits import density_limit_certify, divergence_witness
from .radius import Radius, parse_radius
from .scales import make_scale, parse_psi_spec
from .verify import (LimitSetSpec, spec_from_zigzag, verify_comparison,
                     verify_growth_corollary, verify_limsup_sets)

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


def _jsonable(obj):
    """Make numpy scalars and non-finite floats JSON-friendly."""
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        obj = float(obj)
    if isinstance(obj, float):
        if math.isnan(obj):
            return "nan"
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
    return obj


def _emit(args, payload, csv_text: Optional[str] = None) -> None:
    if getattr(args, "csv", False) and csv_text is not None:
        text = csv_text
    else:
        text = json.dumps(_jsonable(payload), sort_keys=True, indent=2)
    out = getattr(args, "out", None)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def _radius(text: str) -> Radius:
    return parse_radius(text)


def _parse_params(text: Optional[str]) -> dict:
    out = {}
    for chunk in (text or "").split(","):
        if not chunk.strip():
            continue
        key, sep, val = chunk.partition("=")
        if not sep:
            raise PreconditionError(f"bad --params chunk {chunk!r}")
        key, val = key.strip(), val.strip()
        try:
            out[key] = float(val)
        except ValueError:
            out[key] = val
    return out


def _delta_rule(text: Optional[str]):
    if text is None or text == "harmonic":
        return DELTA_RULES["harmonic"]
    if text.startswith("geo:"):
        first, q = (float(v) for v in text[4:].split(","))
        return geometric_delta(first, q)
    if text.startswith("fixed:"):
        c = float(text[6:])
        return lambda n: c
    raise PreconditionError(f"unknown delta rule {text!r}")


def _parse_zigzag(text: str, delta_text: Optional[str]) -> GrowthFunction:
    ell_s, _, L_s = text.partition(",")
    ell = float(ell_s)
    if L_s.strip() in ("inf", "Inf", "INF"):
        return make_unbounded_zigzag(ell=ell)
    return make_zigzag(ell, float(L_s), delta=_delta_rule(delta_text))


_POWER_RE = re.compile(r"^t\^(\d+(?:\.\d*)?)$")


def _growth_arg(fn_text: str, delta_text: Optional[str]) -> GrowthFunction:
    t = fn_text.strip()
    if t.startswith("zigzag:"):
        return _parse_zigzag(t[len("zigzag:"):], delta_text)
    m = _POWER_RE.match(t)
    if m:  # plain powers keep an exact log form, usable at any radius
        return power_growth(float(m.group(1)))
    return growth_from_fn(parse_fn_spec(t))


def _phi_arg(fn_text: str):
    fn = parse_fn_spec(fn_text)
    if isinstance(fn, ExpressionFn) and isinstance(fn.expression.ast, Num):
        return ConstFn(fn.expression.ast.value)
    return fn


def _reports_payload(reports) -> tuple[list[dict], bool]:
    dicts = [r.as_dict() for r in reports]
    ok = all(r.passed for r in reports if r.applicable)
    return dicts, ok


# -- command handlers ---------------------------------------------------------------


def _cmd_density(args) -> int:
    E = parse_set_spec(args.set)
    psi = parse_psi_spec(args.psi)
    cutoff = _radius(args.cutoff)
    est = estimate_density(E, psi, cutoff, args.tail_window)
    payload = {"command": "density", "set": args.set, "psi": psi.name,
               "cutoff": args.cutoff, **est.as_dict()}
    csv_rows = ["log_r,r,ratio"]
    for x, d in density_trajectory(E, psi, cutoff):
        r = math.exp(x) if x < 700 else math.inf
        csv_rows.append(f"{x!r},{r!r},{d!r}")
    _emit(args, payload, "\n".join(csv_rows))
    return EXIT_OK


def _cmd_chain(args) -> int:
    E = parse_set_spec(args.set)
    psi = parse_psi_spec(args.psi)
    reports = check_chain(E, psi, _radius(args.cutoff), args.tail_window)
    dicts, ok = _reports_payload(reports)
    _emit(args, {"command": "chain", "set": args.set, "psi": psi.name,
                 "cutoff": args.cutoff, "reports": dicts})
    return EXIT_OK if ok else EXIT_FAILED


def _cmd_order(args) -> int:
    gf = _growth_arg(args.fn, args.delta)
    cutoff = _radius(args.cutoff)
    est = estimate_orders(gf, cutoff, args.tail_window)
    payload = {"command": "order", "fn": args.fn, "cutoff": args.cutoff,
               **est.as_dict()}
    if args.type_rho is not None:
        payload["type_rho"] = args.type_rho
        payload["type_value"] = estimate_type(gf, args.type_rho, cutoff,
                                              args.tail_window)
    csv_text = None
    if gf.zig is not None:
        xs, ys = gf._bps(cutoff.x)
        rows = ["x_log_r,y_log_T,ratio"]
        rows += [f"{x!r},{y!r},{y / x!r}" for x, y in zip(xs, ys) if x <= cutoff.x]
        csv_text = "\n".join(rows)
    _emit(args, payload, csv_text)
    return EXIT_OK


def _cmd_verify(args) -> int:
    cutoff = _radius(args.cutoff)
    params = _parse_params(args.params)
    psi = parse_psi_spec(args.psi)
    ident = args.id

    if ident in ("thm3.1", "prop3.2"):
        if args.zigzag:
            gf = _parse_zigzag(args.zigzag, args.delta)
            spec = spec_from_zigzag(gf, psi, eps=params.get("eps", 0.5),
                                    M=params.get("M"))
        else:
            if args.fn is None:
                raise PreconditionError("verify thm3.1 needs --zigzag or --fn")
            spec = LimitSetSpec(phi=_phi_arg(args.fn), psi=psi,
                                K=params["K"], k=params["k"],
                                eps=params.get("eps", 0.5), M=params.get("M"),
                                analytic=False)
        reports = verify_limsup_sets(spec, cutoff, args.tail_window)
        if ident == "prop3.2":
            reports = [r for r in reports if r.id.startswith("prop3.2")]
    elif ident == "cor3.3":
        if args.fn is None or (args.fn2 is None and args.zigzag is None):
            raise PreconditionError("verify cor3.3 needs --fn and --fn2/--zigzag")
        phi1 = _phi_arg(args.fn)
        phi2 = _parse_zigzag(args.zigzag, args.delta) if args.zigzag \
            else _phi_arg(args.fn2)
        reports = verify_comparison(phi1, phi2, psi,
                                    params.get("mode", "limsup"), cutoff,
                                    k1=params.get("k1"), k2=params.get("k2"),
                                    tail_window=args.tail_window)
    elif ident.startswith("cor4."):
        if ident in ("cor4.5", "cor4.6"):
            if args.fn is None or (args.fn2 is None and args.zigzag is None):
                raise PreconditionError(f"verify {ident} needs --fn and --fn2/--zigzag")
            T1 = _growth_arg(args.fn, args.delta)
            T2 = _parse_zigzag(args.zigzag, args.delta) if args.zigzag \
                else _growth_arg(args.fn2, args.delta)
            reports = verify_growth_corollary(ident, params, (T1, T2), cutoff,
                                              args.tail_window)
        else:
            if args.zigzag:
                T = _parse_zigzag(args.zigzag, args.delta)
            elif args.fn:
                T = _growth_arg(args.fn, args.delta)
            else:
                raise PreconditionError(f"verify {ident} needs --zigzag or --fn")
            reports = verify_growth_corollary(ident, params, T, cutoff,
                                              args.tail_window)
    else:
        raise PreconditionError(f"unknown verification id {ident!r}")

    dicts, ok = _reports_payload(reports)
    _emit(args, {"command": "verify", "id": ident, "params": args.params or "",
                 "cutoff": args.cutoff, "reports": dicts})
    return EXIT_OK if ok else EXIT_FAILED


def _parse_limit_value(text: str) -> float:
    if text in ("inf", "+inf"):
        return math.inf
    if text == "-inf":
        return -math.inf
    return float(text)


def _cmd_limit_density(args) -> int:
    fn = parse_fn_spec(args.fn)
    psi = parse_psi_spec(args.psi)
    eps_grid = [float(v) for v in args.eps_grid.split(",")] if args.eps_grid else None
    verdict = density_limit_certify(fn, _parse_limit_value(args.l), psi,
                                    eps_grid=eps_grid,
                                    cutoff=_radius(args.cutoff),
                                    threshold=args.threshold)
    csv_rows = ["eps,upper_density"] + \
        [f"{e!r},{d!r}" for e, d in verdict.evidence]
    _emit(args, {"command": "limit-density", "fn": args.fn, "l": args.l,
                 "psi": psi.name, "cutoff": args.cutoff,
                 **verdict.as_dict()}, "\n".join(csv_rows))
    return EXIT_OK if verdict.kind == "psi-density-limit" else EXIT_FAILED


def _cmd_integrability(args) -> int:
    fn = parse_fn_spec(args.fn)
    psi = parse_psi_spec(args.psi)
    rmax = float(args.rmax)
    r0 = args.r0 if args.r0 is not None else psi.domain.r0
    n = max(args.points, 8)
    r_values = np.geomspace(r0 * 4.0, rmax, n).tolist()
    verdict = divergence_witness(fn, psi, r_values, tol=args.tol, r_start=r0,
                                 period_hint=args.period_hint)
    csv_rows = ["r,weighted_average"] + \
        [f"{r!r},{v!r}" for r, v in verdict.evidence]
    _emit(args, {"command": "integrability", "fn": args.fn, "psi": psi.name,
                 "rmax": args.rmax, **verdict.as_dict()}, "\n".join(csv_rows))
    return EXIT_OK if verdict.kind == "divergence-witness" else EXIT_FAILED


# -- parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="psidensity",
        description="Weighted (psi-) densities of radial sets, growth orders, "
                    "and density-limit certification.",
        epilog="Expressions use the single variable t with operators + - * / ^ "
               "(^ is right-associative), functions sin cos exp log sqrt abs "
               "pow min max, and constants pi, e.  No implicit multiplication. "
               "Radii accept scientific notation plus the forms B^E and e^X "
               "(e.g. 2^81, e^262144) so horizons beyond float range stay "
               "exact in log coordinates.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, tail=True):
        sp.add_argument("--json", action="store_true", help="JSON output (default)")
        sp.add_argument("--csv", action="store_true", help="CSV trajectory output")
        sp.add_argument("--out", help="write output to this path instead of stdout")
        if tail:
            sp.add_argument("--tail-window", type=int, default=8, dest="tail_window",
                            help="trailing extrema window for limsup/liminf (default 8)")

    sp = sub.add_parser("density", help="upper/lower psi-density of a set")
    sp.add_argument("--set", required=True,
                    help="generator name (geo2, accel4, finlog) or list 'a:b,c:d'")
    sp.add_argument("--psi", default="log",
                    help="linear|log|loglog|powlog:<beta>|neglog1m|exp:<name>")
    sp.add_argument("--cutoff", required=True, help="horizon radius")
    common(sp)
    sp.set_defaults(handler=_cmd_density)

    sp = sub.add_parser("chain", help="lifted-density chain check for a set")
    sp.add_argument("--set", required=True)
    sp.add_argument("--psi", default="log")
    sp.add_argument("--cutoff", required=True)
    common(sp)
    sp.set_defaults(handler=_cmd_chain)

    sp = sub.add_parser("order", help="order/lower order of a growth function")
    sp.add_argument("--fn", required=True,
                    help="expression in t, or zigzag:<ell>,<L> (L may be inf)")
    sp.add_argument("--delta", help="zig-zag delta rule: harmonic|geo:a,q|fixed:c")
    sp.add_argument("--cutoff", required=True)
    sp.add_argument("--type-rho", type=float, dest="type_rho",
                    help="also report the type with respect to this order")
    common(sp)
    sp.set_defaults(handler=_cmd_order)

    sp = sub.add_parser("verify", help="run a bound-catalog check")
    sp.add_argument("--id", required=True,
                    help="thm3.1|prop3.2|cor3.3|cor4.1..cor4.7")
    sp.add_argument("--zigzag", help="'ell,L' (L may be inf)")
    sp.add_argument("--delta", help="zig-zag delta rule")
    sp.add_argument("--fn", help="expression in t (phi1 / T / T1 depending on id)")
    sp.add_argument("--fn2", help="second expression (phi2 / T2)")
    sp.add_argument("--psi", default="log")
    sp.add_argument("--params", help="comma list k=v, e.g. 'a=2,b=2' or 'eps=0.5'")
    sp.add_argument("--cutoff", required=True)
    common(sp)
    sp.set_defaults(handler=_cmd_verify)

    sp = sub.add_parser("limit-density", help="certify a limit in psi-density")
    sp.add_argument("--fn", required=True, help="expression in t or builtin (eq51)")
    sp.add_argument("--l", required=True, help="limit value, or inf / -inf")
    sp.add_argument("--psi", default="linear")
    sp.add_argument("--cutoff", required=True)
    sp.add_argument("--eps-grid", dest="eps_grid",
                    help="decreasing comma list (default 1,0.3,0.1,0.03,0.01)")
    sp.add_argument("--threshold", type=float, default=1e-2)
    common(sp, tail=False)
    sp.set_defaults(handler=_cmd_limit_density)

    sp = sub.add_parser("integrability", help="divergence witness via weighted averages")
    sp.add_argument("--fn", required=True)
    sp.add_argument("--psi", default="log")
    sp.add_argument("--rmax", required=True, type=float)
    sp.add_argument("--r0", type=float, help="integration start (default: scale's r0)")
    sp.add_argument("--tol", type=float, default=0.02)
    sp.add_argument("--points", type=int, default=25)
    sp.add_argument("--period-hint", type=float, dest="period_hint",
                    help="oscillation period of the integrand, if known")
    common(sp, tail=False)
    sp.set_defaults(handler=_cmd_integrability)
    return p


def run(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.handler(args)
    except (PreconditionError, ConvergenceError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_NUMERIC
    except PsiDensityError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()

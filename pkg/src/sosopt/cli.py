"""Command-line interface: ``sosopt <command> ...``.

Exit status: 0 when a certificate/verdict is found (or the demo verifies),
2 when the problem is infeasible or no certificate exists, 1 on errors.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
from pathlib import Path

import numpy as np

from . import certify, demos
from .compiler import assemble
from .extract import sossolve
from .model import ModelError, parse
from .polynomial import PolyMatrix, Polynomial, PolynomialError, format_number, infer_vars, poly_parse
from .sdp import SolveOptions
from .sdpa import SdpaError, sdpa_export

EXIT_OK, EXIT_ERROR, EXIT_NONE = 0, 1, 2


def _common(p: argparse.ArgumentParser):
    p.add_argument("--tol", type=float, default=1e-8, help="relative duality-gap tolerance")
    p.add_argument("--max-iter", type=int, default=100, help="interior-point iteration limit")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.add_argument("--export-sdpa", metavar="PATH", help="write the compiled SDP in SDPA sparse format")
    p.add_argument("--digits", type=int, default=5, help="significant digits when printing (default 5)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sosopt", description="Sum-of-squares programming toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("demo", help="run a bundled example (1..10 or 'all')")
    p.add_argument("which", nargs="?", help="demo number 1..10, or 'all'")
    p.add_argument("--all", action="store_true", help="run every demo")
    p.add_argument("--m", type=int, default=1, help="demo 4: multiplier exponent")
    p.add_argument("--gamma", type=float, help="demo 5/6: fixed gamma")
    p.add_argument("--bisect", action="store_true", help="demo 5: bisection on [0.8, 1.0]")
    p.add_argument("--n", type=int, default=3, help="demo 7: polynomial degree")
    p.add_argument("--allow-large", action="store_true", help="demo 7: permit n > 13")
    _common(p)

    p = sub.add_parser("solve", help="solve a program stored as JSON")
    p.add_argument("file")
    _common(p)

    p = sub.add_parser("findsos", help="SOS decomposition of a polynomial or polynomial matrix")
    p.add_argument("poly", help="polynomial, or matrix rows separated by ';' with entries separated by ','")
    p.add_argument("--vars", help="comma-separated variable order")
    p.add_argument("--rational", action="store_true", help="exact rational certificate")
    _common(p)

    p = sub.add_parser("findlyap", help="polynomial Lyapunov function search")
    p.add_argument("field", help="comma-separated vector field components")
    p.add_argument("--vars", required=True, help="comma-separated state variables")
    p.add_argument("--degree", type=int, default=2)
    p.add_argument("--eps", type=float, default=1e-6)
    _common(p)

    p = sub.add_parser("findbound", help="lower bound of a polynomial, optionally on a semialgebraic set")
    p.add_argument("poly")
    p.add_argument("--ineq", action="append", default=[], help="constraint g >= 0 (repeatable or comma-separated)")
    p.add_argument("--eq", action="append", default=[], help="constraint h = 0 (repeatable or comma-separated)")
    p.add_argument("--degree", type=int)
    p.add_argument("--vars", help="comma-separated variable order")
    _common(p)

    p = sub.add_parser("export-sdpa", help="compile a JSON program and write SDPA sparse format")
    p.add_argument("file")
    p.add_argument("output", nargs="?", help="output path (stdout when omitted)")
    return ap


def _options(args) -> SolveOptions:
    return SolveOptions(tol=args.tol, max_iter=args.max_iter)


def _split(values) -> list:
    out = []
    for v in values:
        out.extend(s.strip() for s in v.split(",") if s.strip())
    return out


def _names(args, *texts):
    if getattr(args, "vars", None):
        return tuple(v.strip() for v in args.vars.split(",") if v.strip())
    seen = []
    for t in texts:
        for v in infer_vars(t):
            if v not in seen:
                seen.append(v)
    return tuple(seen)


def _fmt(v, digits):
    return format_number(v, digits)


def _clean(p: Polynomial, digits: int, rtol: float = 1e-9) -> Polynomial:
    """Drop solver noise (terms far below the largest coefficient) before printing."""
    terms = p.coeff_dict()
    big = max((abs(float(c)) for c in terms.values()), default=0.0)
    kept = {m: c for m, c in terms.items() if abs(float(c)) > rtol * big}
    return Polynomial(kept, p.vars).round_display(digits)


def _emit(args, payload: dict, lines: list):
    if args.json:
        print(json.dumps(payload, default=_json_default, sort_keys=True))
    else:
        for line in lines:
            print(line)


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    return str(o)


def _matrix_lines(Q, digits) -> list:
    return ["  [" + ", ".join(_fmt(float(v), digits) for v in row) + "]" for row in np.asarray(Q, dtype=float)]


def _export_path(args, suffix=""):
    path = getattr(args, "export_sdpa", None)
    if path and suffix:
        p = Path(path)
        return str(p.with_name(f"{p.stem}{suffix}{p.suffix}"))
    return path


def cmd_demo(args) -> int:
    if args.all or args.which == "all":
        ids = sorted(demos.DEMOS)
    elif args.which is None:
        raise ValueError("demo: give a demo number 1..10 or 'all'")
    else:
        ids = [int(args.which)]
        if ids[0] not in demos.DEMOS:
            raise ValueError(f"demo: unknown demo {ids[0]} (expected 1..10)")
    opts = _options(args)
    all_ok = True
    payload = []
    for i in ids:
        params = {}
        if i == 4:
            params["m"] = args.m
        elif i == 5:
            params["bisect"] = args.bisect
            if args.gamma is not None:
                params["gamma"] = args.gamma
        elif i == 6 and args.gamma is not None:
            params["gamma"] = args.gamma
        elif i == 7:
            params.update(n=args.n, allow_large=args.allow_large)
        rep = demos.run_demo(i, opts, export_sdpa=_export_path(args, f"-demo{i}" if len(ids) > 1 else ""), **params)
        all_ok &= rep.ok
        payload.append(rep.to_dict())
        if not args.json:
            print(f"demo {i} ({rep.title}): {rep.verdict} [{'ok' if rep.ok else 'FAILED'}]")
            for line in rep.lines:
                print(f"  {line}")
    if args.json:
        print(json.dumps(payload if len(payload) > 1 else payload[0], default=_json_default, sort_keys=True))
    return EXIT_OK if all_ok else EXIT_ERROR


def cmd_solve(args) -> int:
    prog = parse(Path(args.file).read_text())
    sol = sossolve(prog, _options(args), export_sdpa=args.export_sdpa)
    r = sol.report
    values = {prog.decvars[d]: float(sol.values[d]) for d in prog.user_decvars}
    payload = {
        "status": r.status,
        "feasible": sol.feasible,
        "objective": sol.objective_value() if prog.objective else None,
        "decvars": values,
        "report": {
            "iterations": r.iterations,
            "residual_norm": r.residual_norm,
            "gap": r.gap,
            "feasratio": r.feasratio,
            "pinf": r.pinf,
            "dinf": r.dinf,
            "numerr": r.numerr,
            "cpusec": r.cpusec,
        },
    }
    lines = [
        f"status: {r.status}",
        f"iterations: {r.iterations}  residual: {r.residual_norm:.2e}  gap: {r.gap:.2e}  feasratio: {r.feasratio:.4f}",
        f"pinf: {r.pinf}  dinf: {r.dinf}  numerr: {r.numerr}  cpusec: {r.cpusec:.3f}",
    ]
    if prog.objective:
        lines.append(f"objective: {_fmt(sol.objective_value(), args.digits)}")
    lines += [f"{k} = {_fmt(v, args.digits)}" for k, v in values.items()]
    # coefficient names of variables declared with wscoeff
    coeffs = {}
    for v in prog.vars:
        if v.wscoeff:
            coeffs.update({prog.decvars[d]: float(sol.values[d]) for d in range(v.start, v.stop)})
    if coeffs:
        payload["coefficients"] = coeffs
        lines += [f"{k} = {_fmt(v, args.digits)}" for k, v in coeffs.items()]
    _emit(args, payload, lines)
    if r.pinf or r.dinf:
        return EXIT_NONE
    return EXIT_OK if sol.feasible else EXIT_ERROR


def _parse_matrix(text, names) -> PolyMatrix:
    rows = [[poly_parse(e, names) for e in row.split(",")] for row in text.split(";")]
    return PolyMatrix(rows)


def cmd_findsos(args) -> int:
    names = _names(args, args.poly.replace(";", "+").replace(",", "+"))
    mode = "rational" if args.rational else "float"
    target = _parse_matrix(args.poly, names) if ";" in args.poly else poly_parse(args.poly, names)
    try:
        cert = certify.findsos(target, mode, _options(args), export_sdpa=args.export_sdpa)
    except certify.RoundingError as e:
        _emit(args, {"status": "rounding_failed", "message": str(e)}, [f"rational rounding failed: {e}"])
        return EXIT_NONE
    if cert is None:
        _emit(args, {"status": "infeasible"}, ["not SOS (no certificate found)"])
        return EXIT_NONE
    if isinstance(cert, certify.RationalCertificate):
        payload = {"status": "sos", "Z": [str(z) for z in cert.Z], "Qnum": cert.Qnum, "D": cert.D}
        lines = ["SOS (exact rational certificate p = Z' Q Z / D)", "Z = " + ", ".join(payload["Z"]), f"D = {cert.D}", "Q ="]
        lines += ["  [" + ", ".join(str(v) for v in row) + "]" for row in cert.Qnum]
    else:
        payload = {
            "status": "sos",
            "Z": [str(z) for z in cert.Z],
            "Q": cert.Q,
            "factors": [str(_clean(f, args.digits)) for f in cert.factors],
        }
        lines = ["SOS", "Z = " + ", ".join(payload["Z"]), "Q ="] + _matrix_lines(cert.Q, args.digits)
        lines += [f"f{k + 1} = {f}" for k, f in enumerate(payload["factors"])]
        if cert.H is not None:
            payload["H"] = [[str(_clean(e, args.digits)) for e in row] for row in cert.H.entries]
            lines.append("H =")
            lines += ["  [" + ", ".join(row) + "]" for row in payload["H"]]
    _emit(args, payload, lines)
    return EXIT_OK


def cmd_findlyap(args) -> int:
    states = _names(args)
    f = [poly_parse(s, states) for s in _split([args.field])]
    V = certify.findlyap(f, states, args.degree, eps=args.eps, options=_options(args), export_sdpa=args.export_sdpa)
    if V is None:
        _emit(args, {"status": "infeasible"}, ["no Lyapunov function found"])
        return EXIT_NONE
    V = _clean(V, args.digits)
    _emit(args, {"status": "found", "V": str(V)}, [f"V = {V}"])
    return EXIT_OK


def cmd_findbound(args) -> int:
    ineqs, eqs = _split(args.ineq), _split(args.eq)
    names = _names(args, args.poly, *ineqs, *eqs)
    f = poly_parse(args.poly, names)
    opts = _options(args)
    if ineqs or eqs or args.degree is not None:
        res = certify.findbound_constrained(
            f,
            [poly_parse(g, names) for g in ineqs],
            [poly_parse(h, names) for h in eqs],
            args.degree,
            opts,
            export_sdpa=args.export_sdpa,
        )
    else:
        res = certify.findbound(f, opts, export_sdpa=args.export_sdpa)
    if math.isnan(res.bound):
        _emit(args, {"status": res.status}, [f"solver failed: {res.status}"])
        return EXIT_ERROR
    bound = "-inf" if res.bound == -math.inf else _fmt(res.bound, args.digits)
    payload = {"status": res.status, "bound": bound if res.bound == -math.inf else res.bound, "vars": list(res.vars)}
    lines = [f"bound = {bound}"]
    if res.minimizer is not None:
        payload["minimizer"] = res.minimizer
        lines.append("minimizer: " + ", ".join(f"{k} = {_fmt(v, args.digits)}" for k, v in res.minimizer.items()))
    _emit(args, payload, lines)
    return EXIT_NONE if res.bound == -math.inf else EXIT_OK


def cmd_export(args) -> int:
    prog = parse(Path(args.file).read_text())
    text = sdpa_export(assemble(prog), args.output)
    if args.output is None:
        sys.stdout.write(text)
    return EXIT_OK


COMMANDS = {
    "demo": cmd_demo,
    "solve": cmd_solve,
    "findsos": cmd_findsos,
    "findlyap": cmd_findlyap,
    "findbound": cmd_findbound,
    "export-sdpa": cmd_export,
}


def _option_strings(parser) -> set:
    out = set()
    for action in parser._actions:
        out.update(action.option_strings)
        if isinstance(action, argparse._SubParsersAction):
            for sub in action.choices.values():
                out |= _option_strings(sub)
    return out


def _protect_negatives(parser, argv) -> list:
    # "-x^2" is a polynomial, not an option; a leading space keeps argparse from treating it as one
    known = _option_strings(parser)
    return [a if not a.startswith("-") or a.split("=", 1)[0] in known else " " + a for a in argv]


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(_protect_negatives(parser, argv))
    try:
        return COMMANDS[args.command](args)
    except (ModelError, PolynomialError, SdpaError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

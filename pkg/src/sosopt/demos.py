"""The ten bundled example programs, each with its own verification."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .certify import _extract_minimizer, findsos, sos_matrix_decompose
from .extract import gram_of, sosgetsol, sossolve
from .model import ModelError, SosProgram
from .polynomial import PolyMatrix, Polynomial, monomials, poly_parse
from .sdp import SolveOptions

MAX_CHEBYSHEV_N = 13
MU_REFERENCE = 0.8723  # known value of mu for the bundled matrix


@dataclass
class DemoReport:
    id: int
    title: str
    ok: bool
    verdict: str
    values: dict = field(default_factory=dict)
    lines: list = field(default_factory=list)
    reports: list = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {"id": self.id, "title": self.title, "ok": self.ok, "verdict": self.verdict, "values": self.values}


def _P(text, names):
    return poly_parse(text, names)


def _vars(*names):
    return [Polynomial.var(n) for n in names]


def _verdict(sol) -> str:
    r = sol.report
    if r.pinf:
        return "infeasible"
    if r.dinf:
        return "unbounded"
    return "feasible" if sol.feasible else r.status


def demo1_program():
    names = ["x1", "x2"]
    p = _P("2*x1^4 + 2*x1^3*x2 - x1^2*x2^2 + 5*x2^4", names)
    prog = SosProgram(names)
    prog.ineq(p)
    return prog, p


def demo1(options=None, export_sdpa=None) -> DemoReport:
    prog, p = demo1_program()
    sol = sossolve(prog, options, export_sdpa=export_sdpa)
    verdict = _verdict(sol)
    out = DemoReport(1, "sum of squares test", False, verdict, reports=[sol.report])
    if verdict != "feasible":
        return out
    cert = gram_of(prog, sol, 0)
    res = float(np.abs(np.array([float(c) for c in (p - cert.reconstruct()).coeffs] or [0.0])).max())
    out.ok = res <= 1e-6
    out.values = {"Z": [str(z) for z in cert.Z], "Q": cert.Q.tolist(), "residual": res}
    out.lines = ["p is SOS", "Z = " + ", ".join(out.values["Z"]), f"reconstruction residual {res:.2e}"]
    out.lines += [f"f{k + 1} = {f.round_display(5)}" for k, f in enumerate(cert.factors)]
    return out


def demo2_program():
    names = ["x1", "x2", "x3"]
    x1, x2, x3 = _vars(*names)
    # vector field times (x3^2 + 1) to clear the rational term
    f = [
        (-x1**3 - x1 * x3**2) * (x3**2 + 1),
        (-x2 - x1**2 * x2) * (x3**2 + 1),
        (-x3 + 3 * x1**2 * x3) * (x3**2 + 1) - 3 * x3,
    ]
    prog = SosProgram(names)
    V = prog.polyvar([x1**2, x2**2, x3**2])
    prog.ineq(V - (x1**2 + x2**2 + x3**2))
    vdot = V.diff("x1") * f[0] + V.diff("x2") * f[1] + V.diff("x3") * f[2]
    prog.ineq(-vdot)
    return prog, V, f


def demo2(options=None, export_sdpa=None) -> DemoReport:
    prog, V, f = demo2_program()
    sol = sossolve(prog, options, export_sdpa=export_sdpa)
    verdict = _verdict(sol)
    out = DemoReport(2, "Lyapunov function search", False, verdict, reports=[sol.report])
    if verdict != "feasible":
        return out
    Vs = sosgetsol(prog, sol, V)
    x1, x2, x3 = _vars("x1", "x2", "x3")
    Vc = Polynomial(Vs.coeff_dict())
    c1 = findsos(Vc - (x1**2 + x2**2 + x3**2))
    c2 = findsos(-(Vc.diff("x1") * f[0] + Vc.diff("x2") * f[1] + Vc.diff("x3") * f[2]))
    out.ok = c1 is not None and c2 is not None
    out.values = {"V": str(Vs), "positivity_certified": c1 is not None, "decrease_certified": c2 is not None}
    out.lines = [f"V = {Vs}", f"V - |x|^2 SOS: {c1 is not None}", f"-dV/dt SOS: {c2 is not None}"]
    return out


GOLDSTEIN_PRICE = (
    "(1+(x1+x2+1)^2*(19-14*x1+3*x1^2-14*x2+6*x1*x2+3*x2^2))"
    "*(30+(2*x1-3*x2)^2*(18-32*x1+12*x1^2+48*x2-36*x1*x2+27*x2^2))"
)


def demo3_program():
    names = ("x1", "x2")
    f = _P(GOLDSTEIN_PRICE, names)
    prog = SosProgram(names, ["gam"])
    gam = prog.decvar("gam")
    prog.ineq(f - gam)
    prog.setobj(-gam)
    return prog, f


def demo3(options=None, export_sdpa=None) -> DemoReport:
    names = ("x1", "x2")
    prog, f = demo3_program()
    sol = sossolve(prog, options, export_sdpa=export_sdpa)
    verdict = _verdict(sol)
    out = DemoReport(3, "bound on global extremum", False, verdict, reports=[sol.report])
    if verdict != "feasible":
        return out
    g = sol.decvar_value("gam")
    pt = _extract_minimizer(prog, sol, names)
    if pt is not None and abs(f.evaluate_float(pt) - g) > 1e-4 * (1 + abs(g)):
        pt = None
    out.ok = abs(g - 3) <= 1e-4 and (pt is None or max(abs(pt["x1"]), abs(pt["x2"] + 1)) <= 1e-3)
    out.values = {"gamma": g, "minimizer": pt}
    out.lines = [f"gamma_opt = {g:.6f}"]
    if pt is not None:
        out.lines.append(f"minimizer x1 = {pt['x1']:.6f}, x2 = {pt['x2']:.6f}")
    return out


HORN = [
    [1, -1, 1, 1, -1],
    [-1, 1, -1, 1, 1],
    [1, -1, 1, -1, 1],
    [1, 1, -1, 1, -1],
    [-1, 1, 1, -1, 1],
]


def demo4_program(m: int = 1):
    names = [f"x{i + 1}" for i in range(5)]
    xs = _vars(*names)
    sq = [x * x for x in xs]
    form = Polynomial()
    for i in range(5):
        for j in range(5):
            if HORN[i][j]:
                form = form + sq[i] * sq[j] * HORN[i][j]
    r = sum(sq, Polynomial())
    R = r**m * form
    prog = SosProgram(names)
    prog.ineq(R)
    return prog


def demo4(options=None, export_sdpa=None, m: int = 1) -> DemoReport:
    if m < 0:
        raise ModelError("multiplier exponent m must be non-negative")
    prog = demo4_program(m)
    sol = sossolve(prog, options, export_sdpa=export_sdpa)
    verdict = _verdict(sol)
    expected = "feasible" if m >= 1 else "infeasible"
    out = DemoReport(4, "matrix copositivity", verdict == expected, verdict, {"m": m}, reports=[sol.report])
    out.lines = [f"m = {m}: R(x) SOS program {verdict}"]
    if verdict == "feasible":
        out.lines.append("J is copositive")
    return out


def mu_matrix() -> np.ndarray:
    alpha = 3 + math.sqrt(3)
    beta = math.sqrt(3) - 1
    a = math.sqrt(2 / alpha)
    b = 1 / math.sqrt(alpha)
    c = b
    d = -math.sqrt(beta / alpha)
    f = (1 + 1j) * math.sqrt(1 / (alpha * beta))
    U = np.array([[a, 0], [b, b], [c, 1j * c], [d, f]])
    V = np.array([[0, a], [b, -b], [c, -1j * c], [-1j * f, -d]])
    return U @ V.conj().T


def demo5_program(gamma: float = 0.8724):
    M = mu_matrix()
    n = M.shape[0]
    names = [f"x{i + 1}" for i in range(2 * n)]
    xs = _vars(*names)
    Z = monomials(names, [1])
    A = []
    for i in range(n):
        H = np.outer(M[i, :].conj(), M[i, :])
        H[i, i] -= gamma**2
        Hr = np.block([[H.real, -H.imag], [H.imag, H.real]])
        q = Polynomial()
        for k in range(2 * n):
            for l in range(2 * n):
                if Hr[k, l] != 0:
                    q = q + xs[k] * xs[l] * Fraction(float(Hr[k, l]))
        A.append(q)
    prog = SosProgram(names)
    Q = [prog.sosvar(Z) for _ in range(n)]
    r = {}
    for i in range(n):
        for j in range(i + 1, n):
            r[i, j] = prog.sosvar([tuple([0] * (2 * n))])
    expr = -sum((Q[i] * A[i] for i in range(n)), Polynomial())
    expr = expr - sum((r[i, j] * A[i] * A[j] for (i, j) in r), Polynomial())
    expr = expr - sum((x**4 for x in xs), Polynomial())
    prog.ineq(expr)
    return prog


def _demo5_feasible(gamma, options, export_sdpa=None):
    prog = demo5_program(gamma)
    sol = sossolve(prog, options, export_sdpa=export_sdpa)
    return _verdict(sol), sol


def demo5(options=None, export_sdpa=None, gamma: float = 0.8724, bisect: bool = False) -> DemoReport:
    if bisect:
        lo, hi = 0.8, 1.0
        reports = []
        while hi - lo > 1e-4:
            mid = 0.5 * (lo + hi)
            v, sol = _demo5_feasible(mid, options, export_sdpa)
            reports.append(sol.report)
            if v == "feasible":
                hi = mid
            else:
                lo = mid
        out = DemoReport(5, "structured singular value bound", True, "feasible", {"mu_upper": hi}, reports=reports)
        out.lines = [f"mu(M, Delta) < {hi:.5f} (bisection)"]
        return out
    verdict, sol = _demo5_feasible(gamma, options, export_sdpa)
    expected = "feasible" if gamma > MU_REFERENCE else "infeasible"
    out = DemoReport(5, "structured singular value bound", verdict == expected, verdict, {"gamma": gamma}, reports=[sol.report])
    out.lines = [f"gamma = {gamma}: {verdict}"]
    if verdict == "feasible":
        out.lines.append(f"mu(M, Delta) < {gamma}")
    return out


def demo6_program(gamma: float = 4):
    names = [f"x{i + 1}" for i in range(5)]
    xs = _vars(*names)
    f = Fraction(5, 2) - Fraction(1, 2) * sum((xs[i] * xs[(i + 1) % 5] for i in range(5)), Polynomial())
    g = Fraction(gamma) - f
    prog = SosProgram(names)
    p1 = prog.sosvar(monomials(names, [0, 1]))
    expr = p1 * g
    for x in xs:
        expr = expr + prog.polyvar(monomials(names, [0, 1, 2])) * (x * x - 1)
    prog.ineq(expr - g * g)
    return prog


def demo6(options=None, export_sdpa=None, gamma: float = 4) -> DemoReport:
    sol = sossolve(demo6_program(gamma), options, export_sdpa=export_sdpa)
    verdict = _verdict(sol)
    expected = "feasible" if gamma >= 4 else "infeasible"
    out = DemoReport(6, "MAX CUT", verdict == expected, verdict, {"gamma": gamma}, reports=[sol.report])
    out.lines = [f"gamma = {gamma}: {verdict}"]
    if verdict == "feasible":
        out.lines.append(f"max cut of the 5-cycle <= {gamma}")
    return out


def demo7_program(n: int = 3):
    prog = SosProgram(["x"], ["gam"])
    gam = prog.decvar("gam")
    x = Polynomial.var("x")
    P = prog.polyvar(monomials(["x"], list(range(n)))) + gam * x**n
    prog.ineq(1 - P, (-1, 1))
    prog.ineq(1 + P, (-1, 1))
    prog.setobj(-gam)
    return prog, P


def demo7(options=None, export_sdpa=None, n: int = 3, allow_large: bool = False) -> DemoReport:
    if n < 1:
        raise ModelError("degree n must be at least 1")
    if n > MAX_CHEBYSHEV_N and not allow_large:
        raise ModelError(f"n > {MAX_CHEBYSHEV_N} is numerically unreliable; pass allow_large to override")
    prog, P = demo7_program(n)
    sol = sossolve(prog, options, export_sdpa=export_sdpa)
    verdict = _verdict(sol)
    out = DemoReport(7, "Chebyshev polynomials", False, verdict, {"n": n}, reports=[sol.report])
    if verdict != "feasible":
        return out
    g = sol.decvar_value("gam")
    target = 2.0 ** (n - 1)
    out.ok = abs(g - target) <= 1e-3 * target
    out.values.update(gamma=g, p=str(sosgetsol(prog, sol, P)))
    out.lines = [f"gamma* = {g:.6f} (2^(n-1) = {target:g})", f"p_n(x) = {out.values['p']}"]
    return out


def demo8_program(m0=1, m1=1, m2=Fraction(5, 4)):
    prog = SosProgram(["x"], ["a", "b", "c"])
    a, b, c = (prog.decvar(v) for v in "abc")
    x = Polynomial.var("x")
    P = a + b * x + c * x**2
    prog.ineq(P, (0, 5))
    prog.ineq(P - 1, (4, 5))
    prog.setobj(a * m0 + b * m1 + c * Fraction(m2))
    return prog, P


def demo8(options=None, export_sdpa=None) -> DemoReport:
    prog, P = demo8_program()
    sol = sossolve(prog, options, export_sdpa=export_sdpa)
    verdict = _verdict(sol)
    out = DemoReport(8, "bounds in probability", False, verdict, reports=[sol.report])
    if verdict != "feasible":
        return out
    bound = sol.objective_value()
    abc = [sol.decvar_value(v) for v in "abc"]
    ref = [121 / 1369, -264 / 1369, 144 / 1369]
    out.ok = abs(bound - 1 / 37) <= 1e-5 and max(abs(u - v) for u, v in zip(abc, ref)) <= 1e-3
    out.values = {"bound": bound, "a": abc[0], "b": abc[1], "c": abc[2]}
    out.lines = [f"worst-case probability bound = {bound:.7f} (1/37 = {1 / 37:.7f})", f"P(x) = {sosgetsol(prog, sol, P)}"]
    return out


def demo9_matrix() -> PolyMatrix:
    names = ["x1", "x2", "x3"]
    off = _P("x1*x2*x3^2 - x1^3*x2 - x1*x2*(x2^2 + 2*x3^2)", names)
    return PolyMatrix(
        [
            [_P("x1^4 + x1^2*x2^2 + x1^2*x3^2", names), off],
            [off, _P("x1^2*x2^2 + x2^2*x3^2 + (x2^2 + 2*x3^2)^2", names)],
        ]
    )


def demo9_program():
    P = demo9_matrix()
    prog = SosProgram(tuple(sorted(P.used_vars())))
    prog.matrixineq(P, "Mineq")
    return prog, P


def demo9(options=None, export_sdpa=None) -> DemoReport:
    P = demo9_matrix()
    res = sos_matrix_decompose(P, options=options, export_sdpa=export_sdpa)
    if res is None:
        return DemoReport(9, "SOS matrix decomposition", False, "infeasible")
    Q, Z, H, cert = res
    HtH = H.T @ H
    diff = HtH - P
    err = max((abs(float(c)) for row in diff.entries for e in row for c in e.coeffs), default=0.0)
    out = DemoReport(9, "SOS matrix decomposition", err <= 1e-5, "feasible", {"residual": err, "Z": [str(z) for z in Z]})
    out.lines = ["P is an SOS matrix", "Z = " + ", ".join(out.values["Z"]), f"max |H'H - P| coefficient = {err:.2e}"]
    return out


def demo10_program():
    names = ["x1", "x2"]
    x1, x2 = _vars(*names)
    p = x1**2 + x2**2
    gamma = theta = 1
    g0 = 2 * x1
    prog = SosProgram(names)
    s = prog.sosvar(monomials(names, [0, 1, 2]))
    g1 = prog.polyvar(monomials(names, [2, 3]))
    Sc = PolyMatrix([[theta**2 - s * (gamma - p), g0 + g1], [g0 + g1, Polynomial.const(1)]])
    prog.matrixineq(Sc, "quadraticMineq")
    return prog, s, g1


def demo10(options=None, export_sdpa=None) -> DemoReport:
    prog, s, g1 = demo10_program()
    sol = sossolve(prog, options, export_sdpa=export_sdpa)
    verdict = _verdict(sol)
    out = DemoReport(10, "set containment", verdict == "feasible", verdict, reports=[sol.report])
    if verdict == "feasible":
        out.values = {"s": str(sosgetsol(prog, sol, s)), "g1": str(sosgetsol(prog, sol, g1))}
        out.lines = [f"s(x) = {out.values['s']}", f"g1(x) = {out.values['g1']}", "set containment certified"]
    return out


def demo_programs() -> dict:
    """The SOS program behind each demo at its default parameters."""
    builders = {
        1: demo1_program,
        2: demo2_program,
        3: demo3_program,
        4: demo4_program,
        5: demo5_program,
        6: demo6_program,
        7: demo7_program,
        8: demo8_program,
        9: demo9_program,
        10: demo10_program,
    }
    out = {}
    for i, build in builders.items():
        built = build()
        out[i] = built[0] if isinstance(built, tuple) else built
    return out


DEMOS = {1: demo1, 2: demo2, 3: demo3, 4: demo4, 5: demo5, 6: demo6, 7: demo7, 8: demo8, 9: demo9, 10: demo10}


def run_demo(i: int, options: SolveOptions | None = None, export_sdpa=None, **params) -> DemoReport:
    if i not in DEMOS:
        raise ModelError(f"unknown demo {i}; choose 1..10")
    return DEMOS[i](options, export_sdpa, **params)

"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v`` or ``python tests/test_acceptance.py``.
"""

import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sosopt.certify import findbound, findbound_constrained, findsos  # noqa: E402
from sosopt.compiler import assemble  # noqa: E402
from sosopt.demos import GOLDSTEIN_PRICE, demo2_program, demo_programs, run_demo  # noqa: E402
from sosopt.extract import sosgetsol, sossolve  # noqa: E402
from sosopt.model import SosProgram  # noqa: E402
from sosopt.polynomial import Polynomial, exponents_of_degree, poly_parse  # noqa: E402
from sosopt.sdp import SolveOptions, sdp_solve  # noqa: E402
from sosopt.sdpa import sdpa_export, sdpa_import  # noqa: E402

from sdp_instances import random_sdp, rel_gap  # noqa: E402

NEWTON_P = "4*x^4*y^6 + x^2 - x*y^2 + y^2"


@pytest.fixture
def verdict(request):
    """``verdict(n, ok, detail)`` prints the criterion line and asserts."""
    capman = request.config.pluginmanager.getplugin("capturemanager")
    t0 = time.perf_counter()

    def emit(n, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail} ({time.perf_counter() - t0:.1f}s)"
        if capman is not None:
            with capman.global_and_fixture_disabled():
                print("\n" + line)
        else:
            print(line)
        assert ok, line

    return emit


def max_coeff(p) -> float:
    return max((abs(float(c)) for c in p.coeffs), default=0.0)


def test_criterion_01_demo1(verdict):
    rep = run_demo(1)
    res = rep.values.get("residual", float("inf"))
    verdict(1, rep.verdict == "feasible" and res <= 1e-6, f"demo1 SOS, reconstruction residual {res:.2e}")


def test_criterion_02_demo2(verdict):
    prog, V, f = demo2_program()
    sol = sossolve(prog)
    Vs = Polynomial(sosgetsol(prog, sol, V).coeff_dict())
    x = [Polynomial.var(n) for n in ("x1", "x2", "x3")]
    pos = findsos(Vs - sum((v * v for v in x), Polynomial())) is not None
    dec = findsos(-sum((Vs.diff(f"x{i + 1}") * f[i] for i in range(3)), Polynomial())) is not None
    ok = sol.feasible and pos and dec and run_demo(2).ok
    verdict(2, ok, f"demo2 V = {Vs.round_display(5)}, both conditions certified post hoc: {pos and dec}")


def test_criterion_03_goldstein_price(verdict):
    rep = run_demo(3)
    g = rep.values.get("gamma", float("nan"))
    r = findbound(poly_parse(GOLDSTEIN_PRICE, ("x1", "x2")))
    pt = r.minimizer
    ok = abs(g - 3) <= 1e-4 and abs(r.bound - 3) <= 1e-4
    if pt is not None:
        ok &= abs(pt["x1"]) <= 1e-3 and abs(pt["x2"] + 1) <= 1e-3
    verdict(3, ok, f"bound {g:.6f} (findbound {r.bound:.6f}), minimizer {pt}")


def test_criterion_04_copositivity(verdict):
    r0, r1 = run_demo(4, m=0), run_demo(4, m=1)
    ok = r0.verdict == "infeasible" and r1.verdict == "feasible"
    verdict(4, ok, f"m=0 {r0.verdict}, m=1 {r1.verdict}")


def test_criterion_05_mu_bound(verdict):
    hi, lo = run_demo(5, gamma=0.8724), run_demo(5, gamma=0.86)
    ok = hi.verdict == "feasible" and lo.verdict == "infeasible"
    verdict(5, ok, f"gamma=0.8724 {hi.verdict}, gamma=0.86 {lo.verdict}")


def test_criterion_06_max_cut(verdict):
    a, b = run_demo(6, gamma=4), run_demo(6, gamma=3.9)
    ok = a.verdict == "feasible" and b.verdict == "infeasible"
    verdict(6, ok, f"gamma=4 {a.verdict}, gamma=3.9 {b.verdict}")


def test_criterion_07_chebyshev(verdict):
    got = {}
    ok = True
    for n in (2, 3, 4, 5):
        rep = run_demo(7, n=n)
        g = rep.values.get("gamma", float("nan"))
        got[n] = round(g, 6)
        ok &= abs(g - 2 ** (n - 1)) <= 1e-3 * 2 ** (n - 1)
    verdict(7, ok, f"gamma* by n: {got}")


def test_criterion_08_probability_bound(verdict):
    rep = run_demo(8)
    v = rep.values
    ref = {"a": 121 / 1369, "b": -264 / 1369, "c": 144 / 1369}
    ok = abs(v.get("bound", 0) - 1 / 37) <= 1e-5 and all(abs(v.get(k, 1e9) - r) <= 1e-3 for k, r in ref.items())
    verdict(8, ok, f"bound {v.get('bound', float('nan')):.8f} vs 1/37, quadratic ({v.get('a')}, {v.get('b')}, {v.get('c')})")


def test_criterion_09_sos_matrix(verdict):
    rep = run_demo(9)
    err = rep.values.get("residual", float("inf"))
    verdict(9, rep.verdict == "feasible" and err <= 1e-5, f"max |H'H - P| coefficient {err:.2e}")


def test_criterion_10_set_containment(verdict):
    rep = run_demo(10)
    verdict(10, rep.verdict == "feasible", f"set containment {rep.verdict}")


def _newton_program(option):
    prog = SosProgram(["x", "y"])
    prog.ineq(poly_parse(NEWTON_P, ["x", "y"]), option)
    return prog


def test_criterion_11_newton_fixture(verdict):
    red, full = assemble(_newton_program("sparse")), assemble(_newton_program(None))
    a = sossolve(_newton_program("sparse")).feasible
    b = sossolve(_newton_program(None)).feasible
    ok = red.cone.psd == (5,) and red.m == 13 and full.cone.psd == (11,) and full.m == 32 and a == b
    verdict(11, ok, f"reduced {red.cone.psd[0]}/{red.m}, unreduced {full.cone.psd[0]}/{full.m}, verdicts {a}/{b}")


def test_criterion_12_rational_certificate(verdict):
    p = poly_parse(NEWTON_P)
    rc = findsos(p, "rational")
    ok = rc is not None and rc.reconstruct() == p and rc.is_psd()
    verdict(12, ok, f"exact certificate with denominator {rc.D if rc else None}, Z'QZ == p and Q PSD in rationals")


def test_criterion_13_four_variable_bound(verdict):
    f = poly_parse("(a^4+1)*(b^4+1)*(c^4+1)*(d^4+1) + 2*a + 3*b + 4*c + 5*d")
    b = findbound(f).bound
    verdict(13, abs(b + 7.759027) <= 1e-3, f"bound {b:.6f}")


def test_criterion_14_constrained_bound(verdict):
    V = ("x1", "x2")
    f = poly_parse("x1 + x2", V)
    g = [poly_parse("x1", V), poly_parse("x2 - 0.5", V)]
    h = [poly_parse("x1^2 + x2^2 - 1", V), poly_parse("x2 - x1^2 - 0.5", V)]
    r = findbound_constrained(f, g, h, 4)
    pt = r.minimizer
    ok = abs(r.bound - 1.3911) <= 1e-3 and pt is not None
    ok = ok and abs(pt["x1"] - 0.5682) <= 1e-2 and abs(pt["x2"] - 0.8229) <= 1e-2
    verdict(14, ok, f"bound {r.bound:.6f}, minimizer {pt}")


def _rand_poly(rng, names, deg, nterms):
    pool = [e for d in range(deg + 1) for e in exponents_of_degree(len(names), d)]
    idx = rng.choice(len(pool), size=min(nterms, len(pool)), replace=False)
    coeffs = [int(v) or 1 for v in rng.integers(-5, 6, size=len(idx))]
    return Polynomial.from_degmat(names, [pool[i] for i in idx], coeffs)


def _sos_instance(seed):
    rng = np.random.default_rng(seed)
    names = ("x", "y", "z")[: int(rng.integers(1, 4))]
    p = Polynomial()
    for _ in range(int(rng.integers(1, 4))):
        f = _rand_poly(rng, names, int(rng.integers(1, 3)), int(rng.integers(1, 4)))
        p = p + f * f
    return p


def _negate_leading(p):
    top = max(sum(e) for e, _ in p.terms)
    e, c = next(t for t in p.terms if sum(t[0]) == top)
    return p - 2 * c * Polynomial.monomial(p.vars, e)


def test_criterion_15_property_suites(verdict):
    opts = SolveOptions()
    gaps = []
    for seed in range(100):
        P = random_sdp(seed)
        sol = sdp_solve(P, opts)
        gaps.append(rel_gap(P, sol) if sol.report.status == "optimal" else float("inf"))
    sdp_ok = max(gaps) <= 1e-7

    certified = 0
    for seed in range(100):
        p = _sos_instance(1000 + seed)
        cert = findsos(p)
        certified += cert is not None and max_coeff(cert.reconstruct() - p) <= 1e-6 * (1 + max_coeff(p))

    agree = 0
    for seed in range(100):
        p = _sos_instance(2000 + seed)
        if seed % 2:
            p = _negate_leading(p)
        agree += (findsos(p) is not None) == (findsos(p, reduction="full") is not None)

    laws = 0
    for seed in range(100):
        rng = np.random.default_rng(3000 + seed)
        a, b, c = (_rand_poly(rng, ("x", "y", "z"), 3, 4) for _ in range(3))
        laws += (
            (a + b) * c == a * c + b * c
            and (a * b) * c == a * (b * c)
            and a * b == b * a
            and a + (b + c) == (a + b) + c
            and a - a == Polynomial()
        )
    ok = sdp_ok and certified == 100 and agree == 100 and laws == 100
    verdict(
        15,
        ok,
        f"SDP worst gap {max(gaps):.1e} over 100, SOS certified {certified}/100, "
        f"reduction agreement {agree}/100, ring laws {laws}/100",
    )


def test_criterion_16_sdpa_round_trip(verdict):
    worst = 0.0
    for prog in demo_programs().values():
        P = assemble(prog)
        Q = sdpa_import(sdpa_export(P))
        scale = 1 + max(np.abs(P.A.data).max(initial=0), np.abs(P.b).max(initial=0), np.abs(P.c).max(initial=0))
        d = max(
            abs(P.A - Q.A).max() if P.A.nnz or Q.A.nnz else 0.0,
            np.abs(P.b - Q.b).max(initial=0),
            np.abs(P.c - Q.c).max(initial=0),
        )
        worst = max(worst, d / scale)
        assert P.cone == Q.cone
    verdict(16, worst <= 1e-15, f"worst relative deviation {worst:.1e} over 10 demo SDPs")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))

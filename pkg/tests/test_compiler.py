from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sosopt.compiler import (
    CompileError,
    Cone,
    SdpProblem,
    assemble,
    build_zz,
    full_basis,
    heuristic_reduce,
    multipartite_reduce,
    newton_reduce,
    smat,
    svec,
)
from sosopt.model import ModelError, sosprogram
from sosopt.polynomial import PolyMatrix, Polynomial, poly_parse

NEWTON_P = "4*x^4*y^6 + x^2 - x*y^2 + y^2"


def in_hull_2d(points, q) -> bool:
    """Exact membership by exhaustive search over points, segments and triangles."""
    pts = [tuple(Fraction(v) for v in p) for p in set(points)]
    q = tuple(Fraction(v) for v in q)
    if q in pts:
        return True
    for a, b in combinations(pts, 2):
        cross = (b[0] - a[0]) * (q[1] - a[1]) - (b[1] - a[1]) * (q[0] - a[0])
        if cross == 0 and min(a[0], b[0]) <= q[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= q[1] <= max(a[1], b[1]):
            return True
    for a, b, c in combinations(pts, 3):
        det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])
        if det == 0:
            continue
        l1 = ((b[1] - c[1]) * (q[0] - c[0]) + (c[0] - b[0]) * (q[1] - c[1])) / det
        l2 = ((c[1] - a[1]) * (q[0] - c[0]) + (a[0] - c[0]) * (q[1] - c[1])) / det
        if l1 >= 0 and l2 >= 0 and l1 + l2 <= 1:
            return True
    return False


def brute_newton_2d(support):
    hx = max(s[0] for s in support) // 2
    hy = max(s[1] for s in support) // 2
    return sorted(
        (i, j) for i in range(hx + 1) for j in range(hy + 1) if in_hull_2d(support, (2 * i, 2 * j))
    )


def test_build_zz_examples():
    ZZ, T = build_zz([(1, 0), (0, 1)])
    assert ZZ == [(2, 0), (1, 1), (0, 2)]
    assert sorted(T) == [(0, 0, 0, 1), (0, 1, 1, 2), (1, 1, 2, 1)]
    assert build_zz([(0,)])[0] == [(0,)]
    ZZ3, _ = build_zz([(1, 0, 0), (0, 1, 0), (0, 0, 1)])
    assert len(ZZ3) == 6


@settings(max_examples=40)
@given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3)), min_size=1, max_size=6, unique=True))
def test_build_zz_rows_are_pair_sums(Z):
    ZZ, T = build_zz(Z)
    sums = {tuple(a + b for a, b in zip(Z[i], Z[j])) for i in range(len(Z)) for j in range(len(Z))}
    assert set(ZZ) == sums and len(ZZ) == len(set(ZZ))
    assert len(T) == len(Z) * (len(Z) + 1) // 2
    for i, j, r, w in T:
        assert ZZ[r] == tuple(a + b for a, b in zip(Z[i], Z[j]))
        assert w == (1 if i == j else 2)


def test_newton_fixture_basis():
    support = [(4, 6), (2, 0), (1, 2), (0, 2)]
    assert sorted(newton_reduce(support).Z) == sorted([(1, 0), (0, 1), (1, 1), (1, 2), (2, 3)])
    assert newton_reduce([(2,)]).Z == [(1,)]


def test_newton_degenerate_affine_hull():
    # support on the line x + y = 4 in 3 variables, third variable unused
    support = [(4, 0, 0), (2, 2, 0), (0, 4, 0)]
    Z = newton_reduce(support).Z
    assert sorted(Z) == [(0, 2, 0), (1, 1, 0), (2, 0, 0)]


@settings(max_examples=60)
@given(st.lists(st.tuples(st.integers(0, 8), st.integers(0, 8)).filter(lambda e: sum(e) <= 8), min_size=1, max_size=6, unique=True))
def test_newton_matches_exhaustive_hull_oracle(support):
    assert sorted(newton_reduce(support).Z) == brute_newton_2d(support)


@settings(max_examples=60)
@given(st.lists(st.tuples(st.integers(0, 6), st.integers(0, 6), st.integers(0, 4)), min_size=1, max_size=6, unique=True))
def test_basis_inclusions(support):
    newton = set(newton_reduce(support).Z)
    heur = set(heuristic_reduce(support).Z)
    full = set(full_basis(support).Z)
    assert newton <= heur <= full


def test_heuristic_examples():
    assert heuristic_reduce([(4, 0), (3, 1), (0, 4)]).Z == [(2, 0), (1, 1), (0, 2)]
    assert heuristic_reduce([(4,), (0,)]).Z == [(0,), (1,), (2,)]
    demo1 = [(4, 0), (3, 1), (2, 2), (0, 4)]
    assert len(heuristic_reduce(demo1).Z) == 3


def test_newton_candidate_cap():
    with pytest.raises(CompileError, match="candidates"):
        newton_reduce([(0,) * 6, (16,) * 6])


def test_multipartite_reduce():
    # y'Sy for S = [[x^2-2x+2, x],[x, x^2]], variables (x, y1, y2)
    p = poly_parse("(x^2-2*x+2)*y1^2 + 2*x*y1*y2 + x^2*y2^2", ["x", "y1", "y2"])
    support = [e for e, _ in p.terms]
    Z = multipartite_reduce(support, [[0], [1, 2]]).Z
    assert set(Z) <= {(0, 1, 0), (1, 1, 0), (0, 0, 1), (1, 0, 1)}
    assert all(z[1] + z[2] == 1 for z in Z)
    single = [(4, 2), (2, 0), (0, 2)]
    assert multipartite_reduce(single, [[0, 1]]).Z == newton_reduce(single).Z
    with pytest.raises(CompileError, match="homogeneous"):
        multipartite_reduce([(2, 2), (2, 0)], [[0], [1]])


def test_svec_smat_inverse_and_inner_product():
    rng = np.random.default_rng(3)
    A = rng.standard_normal((4, 4))
    A = A + A.T
    B = rng.standard_normal((4, 4))
    B = B + B.T
    assert np.allclose(smat(svec(A), 4), A)
    assert np.isclose(svec(A) @ svec(B), np.trace(A @ B))


def _newton_program(option):
    prog = sosprogram(["x", "y"])
    prog.ineq(poly_parse(NEWTON_P, ["x", "y"]), option)
    return prog


def test_assemble_newton_fixture_sizes():
    sdp = assemble(_newton_program("sparse"))
    assert sdp.cone.psd == (5,) and sdp.m == 13
    full = assemble(_newton_program(None))
    assert full.cone.psd == (11,) and full.m == 32


def test_assemble_reduction_override():
    prog = _newton_program(None)
    assert assemble(prog, "newton").cone.psd == (5,)
    assert assemble(prog, "full").cone.psd == (21,)  # all degree <= 5 monomials in 2 vars


def test_assemble_demo1_block():
    prog = sosprogram(["x1", "x2"])
    prog.ineq(poly_parse("2*x1^4 + 2*x1^3*x2 - x1^2*x2^2 + 5*x2^4"))
    sdp = assemble(prog)
    assert sdp.cone == Cone(0, (3,))
    assert sdp.m == 5


def test_assemble_free_only():
    prog = sosprogram(["x"], ["a", "b"])
    prog.eq(prog.decvar("a") + 2 * prog.decvar("b") - 3)
    sdp = assemble(prog)
    assert sdp.cone == Cone(2, ()) and sdp.m == 1


def test_assemble_rejects_empty_program():
    with pytest.raises(ModelError, match="no constraints"):
        assemble(sosprogram(["x"]))


def test_assemble_zero_ineq_is_empty_block():
    prog = sosprogram(["x"], ["a"])
    prog.ineq(Polynomial.const(0))
    prog.eq(prog.decvar("a") - 1)
    sdp = assemble(prog)
    assert sdp.cone.psd in ((), (0,))


def test_rr_round_trip():
    prog = sosprogram(["x", "y"], ["g"])
    s = prog.sosvar([Polynomial.var("x"), Polynomial.const(1)])
    prog.ineq(poly_parse("x^4 + y^2 + 1") - prog.decvar("g") - s)
    prog.matrixineq(PolyMatrix([[Polynomial.var("x") ** 2 + 1, 0], [0, 1]]), "Mineq")
    sdp = assemble(prog)
    assert sorted(sdp.RR.tolist()) == list(range(sdp.n))
    v = np.arange(sdp.n, dtype=float) + 1.0
    assert np.allclose(sdp.to_declaration(sdp.from_declaration(v)), v)
    # free decision variables come first in solver order
    assert sdp.cone.free == 1


def test_constraint_rows_cover_support_and_zz():
    prog = _newton_program("sparse")
    sdp = assemble(prog)
    ev = sdp.extravars[0]
    ZZ, _ = build_zz(ev.Z)
    rows = {tuple(e) for _, e in sdp.row_info}
    assert set(ZZ) | {tuple(z) for z in prog.exprs[0].Z} == rows


def test_sdp_problem_dimension_check():
    with pytest.raises(ValueError, match="mismatch"):
        SdpProblem(np.zeros((1, 2)), np.zeros(1), np.zeros(3), Cone(0, (1,)))

from fractions import Fraction
from math import comb

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from sosopt.polynomial import (
    PolyMatrix,
    Polynomial,
    PolynomialError,
    VarTable,
    format_number,
    monomials,
    mpmonomials,
    poly_parse,
)

from strategies import VARS3, polynomials

X, Y = Polynomial.var("x"), Polynomial.var("y")


def to_sympy(p: Polynomial):
    syms = sympy.symbols(p.vars) if p.vars else ()
    if len(p.vars) == 1:
        syms = (syms,) if not isinstance(syms, tuple) else syms
    expr = sympy.Integer(0)
    for exps, c in p.terms:
        t = sympy.Rational(c.numerator, c.denominator)
        for s, e in zip(syms, exps):
            t *= s**e
        expr += t
    return sympy.expand(expr)


def test_parse_basic_terms():
    p = poly_parse("2*x^2 + 3*x*y + 4*y^4", ["x", "y"])
    assert [e for e, _ in p.terms] == [(2, 0), (1, 1), (0, 4)]
    assert p.coeffs == [2, 3, 4]


def test_parse_zero_and_cancellation():
    assert poly_parse("0").is_zero()
    assert poly_parse("0").nterms == 0
    assert poly_parse("x - x + y", ["x", "y"]) == Y


def test_parse_rational_and_decimal_coefficients():
    p = poly_parse("3/4*x + 0.5*y - 2", ["x", "y"])
    assert p.coefficient(((("x", 1),))) == Fraction(3, 4)
    assert p.coefficient(((("y", 1),))) == Fraction(1, 2)
    assert p.constant_term() == -2


def test_parse_whitespace_insignificant():
    assert poly_parse("2 * x ^ 2+3*x *y", ["x", "y"]) == poly_parse("2*x^2+3*x*y", ["x", "y"])


@pytest.mark.parametrize(
    "text, msg",
    [("x + w", "unknown variable"), ("x^-1", "exponent"), ("x^1.5", "exponent"), ("", "empty"), ("   ", "empty"), ("x +", "end")],
)
def test_parse_errors(text, msg):
    with pytest.raises(PolynomialError, match=msg):
        poly_parse(text, ["x", "y"])


def test_parse_format_round_trip():
    p = poly_parse("-3/7*x^3*y + x*y^2 - 5 + 0.25*y", ["x", "y"])
    assert poly_parse(str(p), ["x", "y"]) == p


@given(polynomials())
def test_format_parse_round_trip_property(p):
    assert poly_parse(str(p), VARS3) == p


def test_binomial_square():
    assert (X + Y) ** 2 == X**2 + 2 * X * Y + Y**2


def test_add_cancels_terms():
    p = poly_parse("2*x^2+3*x*y+4*y^4", ["x", "y"])
    assert p + poly_parse("-3*x*y", ["x", "y"]) == poly_parse("2*x^2+4*y^4", ["x", "y"])


def test_mul_matches_brute_force_convolution():
    a = poly_parse("x^2", ["x"])
    b = poly_parse("1 + x^2", ["x"])
    conv = {}
    for ea, ca in a.terms:
        for eb, cb in b.terms:
            e = tuple(i + j for i, j in zip(ea, eb))
            conv[e] = conv.get(e, 0) + ca * cb
    expected = Polynomial.from_degmat(["x"], list(conv), list(conv.values()))
    assert a * b == expected == X**2 + X**4


def test_power_zero_is_one():
    assert (X + Y) ** 0 == 1


def test_negative_power_rejected():
    with pytest.raises(PolynomialError):
        X ** -1


def test_division_by_polynomial_rejected():
    with pytest.raises(PolynomialError):
        X / Y
    assert (2 * X) / 2 == X


def test_diff_examples():
    p = poly_parse("2*x^2+3*x*y+4*y^4", ["x", "y"])
    assert p.diff("x") == 4 * X + 3 * Y
    assert Polynomial.const(7).diff("x").is_zero()
    assert (X**2 * Y**3).diff("y") == 3 * X**2 * Y**2


def test_eval_examples():
    p = poly_parse("2*x^2+3*x*y+4*y^4", ["x", "y"])
    assert p.evaluate({"x": 1, "y": 1}) == 9
    assert p.evaluate({"x": 0, "y": 0}) == p.constant_term()
    x1, x2 = Polynomial.var("x1"), Polynomial.var("x2")
    gp = (1 + (x1 + x2 + 1) ** 2 * (19 - 14 * x1 + 3 * x1**2 - 14 * x2 + 6 * x1 * x2 + 3 * x2**2)) * (
        30 + (2 * x1 - 3 * x2) ** 2 * (18 - 32 * x1 + 12 * x1**2 + 48 * x2 - 36 * x1 * x2 + 27 * x2**2)
    )
    assert gp.evaluate({"x1": 0, "x2": -1}) == 3


def test_eval_unbound_variable():
    with pytest.raises(PolynomialError, match="no value"):
        (X + Y).evaluate({"x": 1})


def test_subs_polynomial():
    p = X**2 + Y
    assert p.subs({"y": X + 1}) == X**2 + X + 1


def test_canonical_rows_sorted_and_distinct():
    p = Polynomial.from_degmat(["x", "y"], [[1, 0], [0, 2], [1, 0], [2, 0]], [1, 2, 3, 0])
    rows = [e for e, _ in p.terms]
    assert rows == [(1, 0), (0, 2)]
    assert p.coeffs == [4, 2]
    assert Polynomial(p.coeff_dict(), p.vars) == p


def test_monomials_listing():
    got = [str(m) for m in monomials(["x", "y"], [1, 2, 3])]
    assert got == ["x", "y", "x^2", "x*y", "y^2", "x^3", "x^2*y", "x*y^2", "y^3"]
    assert [str(m) for m in monomials(["x"], [0])] == ["1"]
    assert len(monomials(["x", "y", "z"], [2])) == 6


@pytest.mark.parametrize("n", range(1, 6))
@pytest.mark.parametrize("d", range(0, 7))
def test_monomial_count_stars_and_bars(n, d):
    names = [f"v{i}" for i in range(n)]
    ms = monomials(names, [d])
    assert len(ms) == comb(n + d - 1, d)
    assert len(set(ms)) == len(ms)


def test_mpmonomials_bipartite_example():
    out = mpmonomials([["x1", "x2"], ["y1", "y2"], ["z1"]], [[1, 2], [1], [3]])
    assert len(out) == 10
    strs = {str(m) for m in out}
    assert "x1*y1*z1^3" in strs
    assert "x2^2*y2*z1^3" in strs


def test_mpmonomials_reductions():
    assert mpmonomials([["x", "y"]], [[1]]) == monomials(["x", "y"], [1])
    assert mpmonomials([["x"], ["y"]], [[1], [1]]) == [X * Y]
    with pytest.raises(PolynomialError, match="disjoint"):
        mpmonomials([["x"], ["x", "y"]], [[1], [1]])


@given(st.lists(st.integers(1, 3), min_size=1, max_size=3), st.integers(1, 3))
def test_mpmonomials_size_is_product(sizes, d):
    parts, k = [], 0
    for s in sizes:
        parts.append([f"v{k + i}" for i in range(s)])
        k += s
    out = mpmonomials(parts, [[d]] * len(parts))
    assert len(out) == np.prod([comb(s + d - 1, d) for s in sizes])


def test_vartable_rules():
    with pytest.raises(PolynomialError):
        VarTable(["x", "x"])
    with pytest.raises(PolynomialError):
        VarTable([""])


def test_polymatrix_ops():
    M = PolyMatrix([[X, 1], [1, Y]])
    assert M.is_symmetric()
    assert M.T == M
    v = PolyMatrix.column([X, Y])
    q = (v.T @ M @ v)[0, 0]
    assert q == X**3 + 2 * X * Y + Y**3
    with pytest.raises(PolynomialError):
        PolyMatrix([[X, 1], [0, Y]], symmetric=True)


def test_format_number_half_even():
    assert format_number(Fraction(25, 1000), 1) == "0.02"
    assert format_number(Fraction(35, 1000), 1) == "0.04"
    assert format_number(2.5, 1) == "2"
    assert format_number(5.8436e-16, 5) == "5.8436e-16"


# ring laws in exact arithmetic


@settings(max_examples=60)
@given(polynomials(), polynomials(), polynomials())
def test_ring_laws(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a + b == b + a
    assert a * b == b * a
    assert a * (b + c) == a * b + a * c
    assert a - a == 0
    assert a * 1 == a and a + 0 == a


@settings(max_examples=40)
@given(polynomials(), polynomials())
def test_product_matches_sympy(a, b):
    assert to_sympy(a * b) == sympy.expand(to_sympy(a) * to_sympy(b))


@settings(max_examples=40)
@given(polynomials(), polynomials(), st.sampled_from(VARS3))
def test_diff_linear_and_product_rule(a, b, v):
    assert (a + b).diff(v) == a.diff(v) + b.diff(v)
    assert (a * b).diff(v) == a.diff(v) * b + a * b.diff(v)


@given(polynomials())
def test_canonical_idempotent(p):
    q = Polynomial(p.coeff_dict(), p.vars)
    assert Polynomial(q.coeff_dict(), q.vars) == q == p
    assert all(c != 0 for c in p.coeffs)
    rows = [e for e, _ in p.terms]
    assert len(set(rows)) == len(rows)


@given(polynomials(max_deg=3), st.lists(st.integers(-3, 3), min_size=3, max_size=3))
def test_eval_homomorphism(p, pt):
    point = dict(zip(VARS3, pt))
    assert (p * p + p).evaluate(point) == p.evaluate(point) ** 2 + p.evaluate(point)

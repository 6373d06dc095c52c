"""Ready-made routines: findsos, findlyap, findbound and rational rounding."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np

from .extract import GramCertificate, SosSolution, gram_factors, gram_of, moment_matrix, sosgetsol, sossolve, _matrix_factor
from .model import RESERVED_PREFIXES, ModelError, SosProgram
from .polynomial import PolyMatrix, Polynomial, as_poly, monomial_exps, monomials
from .sdp import SolveOptions

RANK_TOL = 1e-6
DEFAULT_DENOMINATORS = tuple(2**k for k in range(21))


class RoundingError(RuntimeError):
    """Float certificate found but no denominator in the schedule gave an exact one."""


@dataclass
class RationalCertificate:
    Qnum: list  # integer matrix (list of lists)
    D: int
    Z: list  # monomials as Polynomials

    @property
    def Q(self) -> list:
        return [[Fraction(v, self.D) for v in row] for row in self.Qnum]

    def reconstruct(self) -> Polynomial:
        from .extract import quadratic_form

        return quadratic_form(self.Q, self.Z)

    def is_psd(self) -> bool:
        return exact_psd(self.Q)


@dataclass
class BoundResult:
    bound: float
    vars: tuple
    minimizer: dict | None = None
    status: str = ""
    solution: SosSolution | None = field(default=None, repr=False)


def _numeric_only(p, what="findsos"):
    names = p.used_vars() if isinstance(p, (Polynomial, PolyMatrix)) else set()
    bad = [n for n in names if n.startswith(RESERVED_PREFIXES)]
    if bad:
        raise ModelError(f"{what}: polynomial contains decision variables {sorted(bad)}")


def _solved(sol: SosSolution) -> bool:
    r = sol.report
    return sol.feasible and not r.pinf and not r.dinf


# exact linear algebra


def exact_psd(Q) -> bool:
    """PSD test by rational LDL'; zero pivots require an all-zero remaining row."""
    A = [[Fraction(v) for v in row] for row in Q]
    n = len(A)
    for k in range(n):
        d = A[k][k]
        if d < 0:
            return False
        if d == 0:
            if any(A[k][j] != 0 for j in range(k + 1, n)):
                return False
            continue
        for i in range(k + 1, n):
            f = A[i][k] / d
            if f == 0:
                continue
            row_i, row_k = A[i], A[k]
            for j in range(k + 1, n):
                if row_k[j]:
                    row_i[j] -= f * row_k[j]
    return True


def _classes(Z):
    """Ordered entry pairs of the Gram matrix grouped by the product monomial."""
    out = {}
    for i, zi in enumerate(Z):
        for j, zj in enumerate(Z):
            out.setdefault(tuple(a + b for a, b in zip(zi, zj)), []).append((i, j))
    return out


def _lcm(vals) -> int:
    out = 1
    for v in vals:
        out = out * v // math.gcd(out, v)
    return out


def rational_round(Q, Z, p: Polynomial, denominators=None, names=None) -> RationalCertificate | None:
    """Round a float Gram matrix to an exact rational certificate of ``p = Z'QZ``.

    ``Z`` holds exponent rows over ``names`` (default ``p.vars``).  For each
    denominator the rounded matrix is projected, in the Frobenius sense, onto
    the affine set of Gram matrices of ``p``; within one product-monomial
    class that projection is a uniform shift, so it stays exact and symmetric.
    """
    names = tuple(names or p.vars)
    pz = p.with_vars(names)
    coef = {e: c for e, c in pz.terms if len(e) == len(names)}
    Z = [tuple(z) for z in Z]
    Q = np.asarray(Q, dtype=float)
    n = len(Z)
    classes = _classes(Z)
    if any(e not in classes for e in coef):
        return None
    if denominators is None:
        L = _lcm(c.denominator for c in coef.values())
        sched = []
        for D in DEFAULT_DENOMINATORS:
            for v in (D, D * L):
                if v not in sched:
                    sched.append(v)
        denominators = sched
    for D in denominators:
        R = [[Fraction(round(D * Q[i, j]), D) for j in range(n)] for i in range(n)]
        for i in range(n):
            for j in range(i + 1, n):
                R[i][j] = R[j][i] = (R[i][j] + R[j][i]) / 2
        for e, pairs in classes.items():
            target = coef.get(e, Fraction(0))
            shift = (target - sum(R[i][j] for i, j in pairs)) / len(pairs)
            if shift:
                for i, j in pairs:
                    R[i][j] += shift
        if not exact_psd(R):
            continue
        den = _lcm(v.denominator for row in R for v in row)
        Qnum = [[int(v * den) for v in row] for row in R]
        return RationalCertificate(Qnum, den, [Polynomial.monomial(names, z) for z in Z])
    return None


# findsos


def findsos(p, mode: str = "float", options: SolveOptions | None = None, reduction: str = "newton", export_sdpa=None):
    """SOS certificate of ``p`` (Polynomial or symmetric PolyMatrix) or ``None``.

    ``mode='rational'`` additionally rounds to an exact certificate and raises
    :class:`RoundingError` if every denominator fails.
    """
    if mode not in ("float", "rational"):
        raise ModelError(f"unknown findsos mode {mode!r}")
    if isinstance(p, PolyMatrix):
        out = sos_matrix_decompose(p, options=options, mode=mode, export_sdpa=export_sdpa)
        if out is None or mode == "rational":
            return out
        return out[3]
    p = as_poly(p)
    _numeric_only(p)
    if p.is_zero():
        return GramCertificate(np.zeros((0, 0)), [], [])
    names = tuple(p.vars) or ("x",)
    prog = SosProgram(names)
    prog.ineq(p, "sparse" if reduction == "newton" else None)
    sol = sossolve(prog, options, reduction=reduction, export_sdpa=export_sdpa)
    if not _solved(sol):
        return None
    cert = gram_of(prog, sol, 0)
    if mode == "float":
        return cert
    ev = sol.sdp.extravars[0]
    rc = rational_round(cert.Q, ev.Z, p, names=names)
    if rc is None:
        raise RoundingError("rational rounding failed for every denominator in the schedule")
    return rc


def sos_matrix_decompose(M: PolyMatrix, options: SolveOptions | None = None, mode: str = "float", export_sdpa=None):
    """``(Q, Z, H, certificate)`` with ``M = H'H``, or ``None`` when not an SOS matrix."""
    if not isinstance(M, PolyMatrix):
        M = PolyMatrix.from_array(M)
    _numeric_only(M)
    r, c = M.shape
    if r != c or not M.is_symmetric():
        raise ModelError("sos_matrix_decompose needs a square symmetric matrix")
    names = tuple(sorted(M.used_vars())) or ("x",)
    prog = SosProgram(names)
    prog.matrixineq(M, "Mineq")
    sol = sossolve(prog, options, export_sdpa=export_sdpa)
    if not _solved(sol):
        return None
    ev = sol.sdp.extravars[0]
    nx = len(prog.vartable)
    Q = block_gram(sol, ev)
    m = ev.size // r
    Zx = [Polynomial.monomial(prog.vartable, z[:nx]) for z in ev.Z[:m]]
    Zfull = [Polynomial.monomial(prog.allvars, z) for z in ev.Z]
    if mode == "rational":
        ys = [Polynomial.var(v) for v in prog.matvartable]
        form = Polynomial({}, prog.allvars)
        for k in range(r):
            for l in range(r):
                form = form + ys[k] * ys[l] * M.entries[k][l]
        rc = rational_round(Q, ev.Z, form, names=prog.allvars)
        if rc is None:
            raise RoundingError("rational rounding failed for every denominator in the schedule")
        return rc
    H = _matrix_factor(Q, Zx, r)
    cert = GramCertificate(Q, Zfull, gram_factors(Q, Zfull), H)
    return Q, Zx, H, cert


def block_gram(sol: SosSolution, ev) -> np.ndarray:
    from .extract import _gram_from_values

    return _gram_from_values(sol.values[ev.start:ev.stop], ev.size)


# findlyap


def findlyap(f, states, degree: int, eps: float = 1e-6, options: SolveOptions | None = None, export_sdpa=None):
    """Polynomial Lyapunov function ``V`` for ``dx/dt = f(x)`` or ``None``.

    V has even-degree monomials of degree 2..degree; the conditions are
    ``V - eps*sum(x_i^2)`` SOS and ``-grad(V).f`` SOS.
    """
    states = [s if isinstance(s, str) else next(iter(as_poly(s).used_vars())) for s in states]
    f = [as_poly(fi) for fi in f]
    if len(f) != len(states):
        raise ModelError(f"vector field has {len(f)} entries for {len(states)} states")
    if degree < 2 or degree % 2:
        raise ModelError("Lyapunov degree must be an even integer >= 2")
    for fi in f:
        _numeric_only(fi, "findlyap")
        extra = fi.used_vars() - set(states)
        if extra:
            raise ModelError(f"vector field uses variables outside the state list: {sorted(extra)}")
    prog = SosProgram(states)
    V = prog.polyvar(monomials(states, list(range(2, degree + 1, 2))))
    xs = [Polynomial.var(s) for s in states]
    # Newton bases keep both certificates small
    prog.ineq(V - eps * sum((x * x for x in xs), Polynomial()), "sparse")
    vdot = Polynomial()
    for s, fi in zip(states, f):
        vdot = vdot + V.diff(s) * fi
    prog.ineq(-vdot, "sparse")
    sol = sossolve(prog, options, export_sdpa=export_sdpa)
    if not _solved(sol):
        return None
    return sosgetsol(prog, sol, V)


# findbound


def _top_moments(M, Z, names):
    """First-order moments from the largest leading degree block of numerical rank one."""
    Z = [tuple(z) for z in Z]
    if not Z:
        return None
    zero = tuple(0 for _ in names)
    if zero not in Z:
        return None
    pos = {z: k for k, z in enumerate(Z)}
    unit = []
    for i in range(len(names)):
        e = tuple(1 if k == i else 0 for k in range(len(names)))
        if e not in pos:
            return None
        unit.append(pos[e])
    degs = sorted({sum(z) for z in Z}, reverse=True)
    for d in degs:
        if d < 1:
            break
        idx = [k for k, z in enumerate(Z) if sum(z) <= d]
        sub = M[np.ix_(idx, idx)]
        w, V = np.linalg.eigh(0.5 * (sub + sub.T))
        if w[-1] <= 0:
            return None
        if len(w) > 1 and w[-2] / w[-1] > RANK_TOL:
            continue
        v = V[:, -1]
        local = {k: t for t, k in enumerate(idx)}
        v0 = v[local[pos[zero]]]
        if abs(v0) < 1e-12:
            return None
        return [float(v[local[u]] / v0) for u in unit]
    return None


def _extract_minimizer(prog, sol, names):
    ev = sol.sdp.extravars[0]
    if ev.block < 0:
        return None
    M = moment_matrix(prog, sol, 0)
    pt = _top_moments(M, ev.Z, names)
    if pt is None:
        return None
    return dict(zip(names, pt))


def findbound(f, options: SolveOptions | None = None, reduction: str = "newton", export_sdpa=None) -> BoundResult:
    """Largest ``gamma`` with ``f - gamma`` SOS."""
    f = as_poly(f)
    _numeric_only(f, "findbound")
    names = tuple(f.vars) or ("x",)
    prog = SosProgram(names, ["gam"])
    gam = prog.decvar("gam")
    prog.ineq(f - gam, "sparse" if reduction == "newton" else None)
    prog.setobj(-gam)
    sol = sossolve(prog, options, export_sdpa=export_sdpa)
    return _bound_result(prog, sol, f, names, check_value=True)


def _bound_result(prog, sol, f, names, check_value):
    r = sol.report
    if r.pinf:
        return BoundResult(-math.inf, names, None, sol.status, sol)
    if not sol.feasible:
        return BoundResult(math.nan, names, None, sol.status, sol)
    bound = sol.decvar_value("gam")
    pt = _extract_minimizer(prog, sol, names)
    if pt is not None and check_value:
        val = f.evaluate_float(pt)
        if abs(val - bound) > 1e-4 * (1 + abs(bound)):
            pt = None
    return BoundResult(bound, names, pt, sol.status, sol)


def _even_floor(d: int) -> int:
    return d - (d % 2)


def findbound_constrained(
    f, ineqs=(), eqs=(), degree: int | None = None, options: SolveOptions | None = None, export_sdpa=None
) -> BoundResult:
    """Lower bound of ``f`` on ``{g_i >= 0, h_j = 0}`` from a Schmuedgen-type certificate.

    ``f - gam = s0 + sum l_j h_j + sum_S s_S prod_{i in S} g_i`` over all
    nonempty subsets ``S`` whose product degree fits within ``degree``.
    """
    f = as_poly(f)
    g = [as_poly(v) for v in ineqs]
    h = [as_poly(v) for v in eqs]
    for q in [f, *g, *h]:
        _numeric_only(q, "findbound")
    used = set(f.used_vars())
    for q in g + h:
        used |= q.used_vars()
    names = tuple(v for v in f.vars if v in used) + tuple(sorted(used - set(f.vars)))
    names = names or ("x",)
    top = max([f.degree] + [q.degree for q in g + h])
    if degree is None:
        degree = top + (top % 2)
    if degree < top or degree % 2:
        raise ModelError(f"degree must be even and at least {top} (the largest input degree)")
    prog = SosProgram(names, ["gam"])
    gam = prog.decvar("gam")
    expr = f - gam
    for q in h:
        dl = degree - q.degree
        lam = prog.polyvar(monomials(names, list(range(dl + 1))))
        expr = expr - lam * q
    for k in range(1, len(g) + 1):
        for S in combinations(range(len(g)), k):
            dS = sum(g[i].degree for i in S)
            if dS > degree:
                continue
            ds = _even_floor(degree - dS)
            sig = prog.sosvar(monomials(names, list(range(ds // 2 + 1))))
            prod = Polynomial.const(1)
            for i in S:
                prod = prod * g[i]
            expr = expr - sig * prod
    if expr.degree_in(names) > degree:
        raise ModelError("degree too small to admit the certificate")
    z0 = monomials(names, list(range(degree // 2 + 1)))
    prog.ineq(expr)
    # fix s0's basis to the full degree window so its moment block carries first-order moments
    prog.exprs[-1].aux = {"basis": "explicit", "gram_basis": [monomial_exps(z, names) for z in z0]}
    prog.setobj(-gam)
    sol = sossolve(prog, options, export_sdpa=export_sdpa)
    return _bound_result(prog, sol, f, names, check_value=False)

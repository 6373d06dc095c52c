"""Solving programs and reading results back into polynomial form."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .compiler import SdpProblem, assemble, build_zz, smat
from .model import ModelError, SosProgram
from .polynomial import PolyMatrix, Polynomial, as_poly
from .sdp import SdpSolution, SolveOptions, block_views, sdp_solve

FACTOR_RTOL = 1e-8


@dataclass
class SosSolution:
    prog: SosProgram
    sdp: SdpProblem
    raw: SdpSolution
    values: np.ndarray  # declaration order: decision variables, then Gram entries

    @property
    def report(self):
        return self.raw.report

    @property
    def feasible(self) -> bool:
        return self.raw.feasible

    @property
    def status(self) -> str:
        return self.report.status

    @property
    def decvar_values(self) -> np.ndarray:
        return self.values[: self.prog.ndecvars]

    def decvar_value(self, name) -> float:
        return float(self.values[self.prog.decvar_index(name)])

    def objective_value(self) -> float:
        return float(sum(float(v) * self.values[d] for d, v in self.prog.objective.items()))


@dataclass
class GramCertificate:
    Q: np.ndarray
    Z: list  # monomials as Polynomials
    factors: list = field(default_factory=list)
    H: PolyMatrix | None = None
    Q_exact: list | None = None  # rational Gram when available
    denominator: int | None = None

    def reconstruct(self) -> Polynomial:
        return quadratic_form(self.Q, self.Z)


def quadratic_form(Q, Z) -> Polynomial:
    """``Z' Q Z`` with exact arithmetic on the given entries."""
    from .polynomial import mono_mul

    monos = [next(iter(z.coeff_dict())) for z in Z]
    terms = {}
    for i in range(len(Z)):
        for j in range(len(Z)):
            c = Q[i][j]
            if c == 0:
                continue
            c = c if isinstance(c, Fraction) else Fraction(float(c))
            m = mono_mul(monos[i], monos[j])
            terms[m] = terms.get(m, 0) + c
    return Polynomial(terms, Z[0].vars if Z else ())


def sossolve(
    prog: SosProgram, options: SolveOptions | None = None, reduction: str | None = None, export_sdpa=None
) -> SosSolution:
    """Compile, solve and map the solution back to declaration order.

    ``export_sdpa`` names a file that receives the compiled SDP before solving.
    """
    sdp = assemble(prog, reduction=reduction)
    if export_sdpa is not None:
        from .sdpa import sdpa_export

        sdpa_export(sdp, export_sdpa)
    raw = sdp_solve(sdp, options)
    values = sdp.to_declaration(raw.x)
    prog.frozen = True
    sol = SosSolution(prog, sdp, raw, values)
    prog.solution = sol
    return sol


def _require(prog: SosProgram, sol):
    if sol is None:
        sol = getattr(prog, "solution", None)
    if sol is None:
        raise ModelError("program has not been solved")
    if sol.prog is not prog:
        raise ModelError("solution belongs to a different program")
    return sol


def sosgetsol(prog: SosProgram, sol, expr, digits: int = 5):
    """Substitute solved decision values into ``expr``.

    ``digits`` controls printing only; the returned object keeps full precision.
    """
    sol = _require(prog, sol)
    if isinstance(expr, PolyMatrix):
        return PolyMatrix([[sosgetsol(prog, sol, e, digits) for e in row] for row in expr.entries])
    expr = as_poly(expr)
    known = set(prog.allvars) | set(prog.decvars)
    foreign = expr.used_vars() - known
    if foreign:
        raise ModelError(f"expression uses variables foreign to the program: {sorted(foreign)}")
    vals = {n: Fraction(float(sol.values[i])) for i, n in enumerate(prog.decvars) if n in expr.used_vars()}
    out = expr.subs(vals) if vals else expr
    out = out.with_vars([v for v in prog.allvars if v in out.used_vars()])
    return out.round_display(digits)


def _gram_from_values(vals, n) -> np.ndarray:
    Q = np.zeros((n, n))
    iu = np.triu_indices(n)
    Q[iu] = vals
    return Q + np.triu(Q, 1).T


def gram_factors(Q, Z, rtol: float = FACTOR_RTOL) -> list:
    """Polynomials ``f_k`` with ``sum f_k^2 = Z' Q Z`` (eigen-decomposition)."""
    if len(Z) == 0:
        return []
    w, V = np.linalg.eigh(0.5 * (Q + Q.T))
    lmax = w.max(initial=0.0)
    out = []
    for k in np.argsort(-w):
        if lmax <= 0 or w[k] <= rtol * lmax:
            continue
        coef = np.sqrt(w[k]) * V[:, k]
        p = Polynomial()
        for c, z in zip(coef, Z):
            if c != 0:
                p = p + z * float(c)
        out.append(p)
    return out


def _basis_polys(prog: SosProgram, Z, table) -> list:
    return [Polynomial.monomial(table, z) for z in Z]


def gram_of(prog: SosProgram, sol, which: int, kind: str = "constraint") -> GramCertificate:
    """Gram matrix of inequality ``which`` (or of SOS variable ``which`` with kind='var')."""
    sol = _require(prog, sol)
    if kind == "var":
        v = prog.vars[which]
        if not v.is_psd:
            raise ModelError(f"variable {which} is not a sum of squares")
        Q = _gram_from_values(sol.values[v.start:v.stop], v.block_size)
        base = _basis_polys(prog, v.Z, prog.vartable)
        if v.kind == "sosmatrix":
            r = v.matdims[0]
            Z = [z for _ in range(r) for z in base]
            H = _matrix_factor(Q, base, r)
            return GramCertificate(Q, Z, gram_factors(Q, Z), H)
        return GramCertificate(Q, base, gram_factors(Q, base))
    ev = next((e for e in sol.sdp.extravars if e.constraint == which), None)
    if ev is None:
        raise ModelError(f"constraint {which} is not an inequality")
    Q = _gram_from_values(sol.values[ev.start:ev.stop], ev.size)
    Z = _basis_polys(prog, ev.Z, prog.allvars)
    return GramCertificate(Q, Z, gram_factors(Q, Z))


def _matrix_factor(Q, Zx, r) -> PolyMatrix:
    """``H = L (I kron Z)`` with ``Q = L' L``."""
    w, V = np.linalg.eigh(0.5 * (Q + Q.T))
    lmax = max(w.max(initial=0.0), 0.0)
    keep = [k for k in np.argsort(-w) if lmax > 0 and w[k] > FACTOR_RTOL * lmax]
    L = (np.sqrt(w[keep])[:, None] * V[:, keep].T) if keep else np.zeros((1, Q.shape[0]))
    m = len(Zx)
    rows = []
    for k in range(L.shape[0]):
        row = []
        for c in range(r):
            p = Polynomial()
            for i, z in enumerate(Zx):
                a = L[k, c * m + i]
                if a != 0:
                    p = p + z * float(a)
            row.append(p)
        rows.append(row)
    return PolyMatrix(rows)


def moment_matrix(prog: SosProgram, sol, which: int) -> np.ndarray:
    """Dual slack block of inequality ``which``; a moment matrix over its basis."""
    sol = _require(prog, sol)
    ev = next((e for e in sol.sdp.extravars if e.constraint == which), None)
    if ev is None or ev.block < 0:
        raise ModelError(f"constraint {which} has no Gram block")
    return block_views(sol.sdp, sol.raw.S)[ev.block]


def residuals(prog: SosProgram, sol) -> tuple:
    """``(||Ax - b||, per-constraint max coefficient mismatch of p(c*) against its certificate)``."""
    sol = _require(prog, sol)
    out = []
    by_c = {e.constraint: e for e in sol.sdp.extravars}
    for ci, c in enumerate(prog.exprs):
        coef = {}
        for j, z in enumerate(c.Z):
            coef[z] = float(c.b[j])
        for d, j, v in c.At:
            coef[c.Z[j]] = coef.get(c.Z[j], 0.0) + float(v) * sol.values[d]
        ev = by_c.get(ci)
        if ev is not None:
            Q = _gram_from_values(sol.values[ev.start:ev.stop], ev.size)
            for i, j, zr, w in ev.T:
                z = ev.ZZ[zr]
                coef[z] = coef.get(z, 0.0) - w * Q[i, j]
        out.append(max((abs(v) for v in coef.values()), default=0.0))
    primal = float(np.linalg.norm(sol.sdp.A @ sol.raw.x - sol.sdp.b))
    return primal, out

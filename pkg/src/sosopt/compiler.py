"""Lowering of a sum-of-squares program to a standard-form SDP.

Each inequality ``p(x) >= 0`` becomes ``p = Z' Q Z`` with a fresh PSD Gram
matrix ``Q`` over a monomial basis ``Z``.  Matching coefficients of every
monomial in ``ZZ = {z_i z_j}`` and in the support of ``p`` gives one
equality row each.  The assembled problem is

    min c'x  s.t.  A x = b,  x in R^f x S^{n1}_+ x ... x S^{nk}_+

with PSD blocks in ``svec`` layout (upper triangle, row major, off-diagonal
entries scaled by sqrt 2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from .model import ModelError, SosProgram
from .polynomial import grlex_key

MAX_CANDIDATES = 200_000
_EXACT_LP_LIMIT = 4000  # support size times dimension
_SQRT2 = math.sqrt(2.0)


class CompileError(ModelError):
    """The program cannot be lowered to an SDP."""


@dataclass
class GramBasis:
    Z: list
    reduction: str  # full | heuristic | newton | multipartite | explicit | mineq
    candidates: int = 0


@dataclass(frozen=True)
class Cone:
    free: int
    psd: tuple

    @property
    def nvars(self) -> int:
        return self.free + sum(s * (s + 1) // 2 for s in self.psd)

    def offsets(self) -> list:
        out, k = [], self.free
        for s in self.psd:
            out.append(k)
            k += s * (s + 1) // 2
        return out


@dataclass
class ExtraVar:
    constraint: int
    basis: GramBasis
    ZZ: list
    T: list
    start: int  # declaration index range of the Gram entries
    stop: int
    block: int

    @property
    def Z(self) -> list:
        return self.basis.Z

    @property
    def size(self) -> int:
        return len(self.basis.Z)


@dataclass
class SdpProblem:
    A: sp.csr_matrix
    b: np.ndarray
    c: np.ndarray
    cone: Cone
    RR: np.ndarray = None
    scale: np.ndarray = None  # solver value = scale * declaration value
    row_info: list = field(default_factory=list)  # (constraint index, monomial exps)
    blocks: list = field(default_factory=list)  # ("var", i) or ("extra", i)
    extravars: list = field(default_factory=list)
    ndecvars: int = 0

    def __post_init__(self):
        self.A = sp.csr_matrix(self.A, dtype=float)
        self.b = np.asarray(self.b, dtype=float).ravel()
        self.c = np.asarray(self.c, dtype=float).ravel()
        m, n = self.A.shape
        if self.b.size != m or self.c.size != n or self.cone.nvars != n:
            raise ValueError(
                f"SDP dimension mismatch: A {self.A.shape}, b {self.b.size}, c {self.c.size}, cone {self.cone.nvars}"
            )
        if self.RR is None:
            self.RR = np.arange(n)
        if self.scale is None:
            self.scale = np.ones(n)

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    def to_declaration(self, x_solver) -> np.ndarray:
        """Declaration-order values (unscaled) from a solver-order vector."""
        x = np.empty(self.n)
        x[self.RR] = np.asarray(x_solver, dtype=float)
        return x / self.scale

    def from_declaration(self, x_decl) -> np.ndarray:
        x = np.asarray(x_decl, dtype=float) * self.scale
        return x[self.RR]


# helpers on symmetric vectorization


def svec_index(n: int) -> list:
    return [(i, j) for i in range(n) for j in range(i, n)]


def smat(v, n: int) -> np.ndarray:
    M = np.zeros((n, n))
    iu = np.triu_indices(n)
    M[iu] = v
    off = iu[0] != iu[1]
    M[iu[0][off], iu[1][off]] /= _SQRT2
    return M + np.triu(M, 1).T


def svec(M) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    iu = np.triu_indices(n)
    v = M[iu].copy()
    v[iu[0] != iu[1]] *= _SQRT2
    return v


# Gram basis construction


def build_zz(Z):
    """Products of basis pairs.

    Returns ``ZZ`` (unique sums in grlex order) and ``T``, a list of
    ``(i, j, row, weight)`` for ``i <= j`` with weight 2 off the diagonal.
    """
    Z = [tuple(z) for z in Z]
    sums = {}
    for i in range(len(Z)):
        for j in range(i, len(Z)):
            sums[(i, j)] = tuple(a + b for a, b in zip(Z[i], Z[j]))
    ZZ = sorted(set(sums.values()), key=grlex_key)
    pos = {z: k for k, z in enumerate(ZZ)}
    T = [(i, j, pos[s], 1 if i == j else 2) for (i, j), s in sums.items()]
    return ZZ, T


def full_basis(support) -> GramBasis:
    support = [tuple(s) for s in support]
    if not support:
        return GramBasis([], "full")
    n = len(support[0])
    top = max(sum(s) for s in support) // 2
    Z = [e for d in range(top + 1) for e in _exps_of_degree(n, d)]
    return GramBasis(Z, "full", len(Z))


def _exps_of_degree(n, d):
    from .polynomial import exponents_of_degree

    return exponents_of_degree(n, d)


def heuristic_reduce(support) -> GramBasis:
    """Degree-window basis with per-variable clipping."""
    support = [tuple(s) for s in support]
    if not support:
        return GramBasis([], "heuristic")
    n = len(support[0])
    degs = [sum(s) for s in support]
    lo, hi = -(-min(degs) // 2), max(degs) // 2
    caps = [-(-max(s[i] for s in support) // 2) for i in range(n)]
    Z = []
    for d in range(lo, hi + 1):
        for e in _exps_of_degree(n, d):
            if all(ei <= ci for ei, ci in zip(e, caps)):
                Z.append(e)
    return GramBasis(Z, "heuristic", len(Z))


class _Hull:
    """Convex hull membership for a finite integer point set."""

    def __init__(self, points):
        pts = sorted({tuple(int(v) for v in p) for p in points})
        if not pts:
            raise CompileError("empty point set")
        self.points = pts
        self.n = len(pts[0])
        self.p0 = pts[0]
        rows = [[Fraction(a - b) for a, b in zip(p, self.p0)] for p in pts[1:]]
        self.basis, self.pivots = _rref(rows, self.n)
        self.dim = len(self.pivots)
        self.proj = [tuple(p[k] for k in self.pivots) for p in pts]
        self.exact = len(pts) * (self.dim + 1) <= _EXACT_LP_LIMIT

    def in_affine_hull(self, q) -> bool:
        r = [Fraction(a - b) for a, b in zip(q, self.p0)]
        for row, piv in zip(self.basis, self.pivots):
            if r[piv]:
                f = r[piv]
                r = [a - f * b for a, b in zip(r, row)]
        return not any(r)

    def contains(self, q) -> bool:
        q = tuple(q)
        if q in self._set:
            return True
        if not self.in_affine_hull(q):
            return False
        if self.dim == 0:
            return True
        target = [Fraction(q[k]) for k in self.pivots]
        if self.exact:
            return _exact_convex_feasible(self.proj, target)
        return _float_convex_feasible(self.proj, target)

    @property
    def _set(self):
        s = getattr(self, "_pset", None)
        if s is None:
            s = self._pset = set(self.points)
        return s


def _rref(rows, n):
    """Row echelon basis (reduced) and pivot columns, exact."""
    rows = [list(r) for r in rows if any(r)]
    basis, pivots = [], []
    col = 0
    while rows and col < n:
        pick = next((r for r in rows if r[col] != 0), None)
        if pick is None:
            col += 1
            continue
        rows.remove(pick)
        f = pick[col]
        pick = [v / f for v in pick]
        rows = [[a - r[col] * b for a, b in zip(r, pick)] for r in rows]
        rows = [r for r in rows if any(r)]
        basis = [[a - b[col] * c for a, c in zip(b, pick)] for b in basis]
        basis.append(pick)
        pivots.append(col)
        col += 1
    return basis, pivots


def _exact_convex_feasible(points, target) -> bool:
    """Is ``target`` a convex combination of ``points``?  Exact phase-one simplex."""
    k, d = len(points), len(target)
    # rows: sum lam = 1, sum lam p_i = t_i; artificials make the start basic.
    rows = []
    rhs = []
    rows.append([Fraction(1)] * k)
    rhs.append(Fraction(1))
    for i in range(d):
        rows.append([Fraction(p[i]) for p in points])
        rhs.append(Fraction(target[i]))
    m = len(rows)
    for r in range(m):
        if rhs[r] < 0:
            rows[r] = [-v for v in rows[r]]
            rhs[r] = -rhs[r]
    ncol = k + m
    tab = [rows[r] + [Fraction(1) if j == r else Fraction(0) for j in range(m)] + [rhs[r]] for r in range(m)]
    basis = [k + r for r in range(m)]
    # objective: minimize the sum of artificials, reduced costs
    cost = [Fraction(0)] * (ncol + 1)
    for r in range(m):
        for j in range(ncol + 1):
            cost[j] -= tab[r][j]
    for j in range(k, k + m):
        cost[j] = Fraction(0)
    for _ in range(10_000):
        enter = next((j for j in range(ncol) if cost[j] < 0), None)
        if enter is None:
            break
        best, leave = None, None
        for r in range(m):
            a = tab[r][enter]
            if a > 0:
                ratio = tab[r][-1] / a
                if best is None or ratio < best or (ratio == best and basis[r] < basis[leave]):
                    best, leave = ratio, r
        if leave is None:
            break
        piv = tab[leave][enter]
        tab[leave] = [v / piv for v in tab[leave]]
        for r in range(m):
            if r != leave and tab[r][enter] != 0:
                f = tab[r][enter]
                tab[r] = [a - f * b for a, b in zip(tab[r], tab[leave])]
        f = cost[enter]
        cost = [a - f * b for a, b in zip(cost, tab[leave])]
        basis[leave] = enter
    return -cost[-1] == 0


def _float_convex_feasible(points, target, tol: float = 1e-9) -> bool:
    P = np.array(points, dtype=float)
    k = P.shape[0]
    A_eq = np.vstack([np.ones((1, k)), P.T])
    b_eq = np.concatenate([[1.0], np.array([float(t) for t in target])])
    res = linprog(np.zeros(k), A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    if res.status != 0:
        return False
    return bool(np.max(np.abs(A_eq @ res.x - b_eq)) <= tol * (1 + np.max(np.abs(b_eq))))


def newton_reduce(support, candidates=None) -> GramBasis:
    """Keep the candidates ``z`` with ``2z`` in the Newton polytope of the support."""
    support = [tuple(int(v) for v in s) for s in support]
    if not support:
        return GramBasis([], "newton")
    n = len(support[0])
    if candidates is None:
        lo = [-(-min(s[i] for s in support) // 2) for i in range(n)]
        hi = [max(s[i] for s in support) // 2 for i in range(n)]
        count = 1
        for a, b in zip(lo, hi):
            count *= max(0, b - a + 1)
        if count > MAX_CANDIDATES:
            raise CompileError(f"Newton reduction would examine {count} candidates (limit {MAX_CANDIDATES})")
        degs = [sum(s) for s in support]
        dlo, dhi = -(-min(degs) // 2), max(degs) // 2
        candidates = [e for e in product(*(range(a, b + 1) for a, b in zip(lo, hi))) if dlo <= sum(e) <= dhi]
    else:
        candidates = [tuple(c) for c in candidates]
        if len(candidates) > MAX_CANDIDATES:
            raise CompileError(f"Newton reduction would examine {len(candidates)} candidates (limit {MAX_CANDIDATES})")
    hull = _Hull(support)
    Z = [c for c in candidates if hull.contains(tuple(2 * v for v in c))]
    Z.sort(key=grlex_key)
    return GramBasis(Z, "newton", len(candidates))


def multipartite_reduce(support, partitions) -> GramBasis:
    """Cartesian product of per-partition Newton bases.

    Every partition except the first must see a homogeneous projection of
    the support.
    """
    support = [tuple(int(v) for v in s) for s in support]
    if not support:
        return GramBasis([], "multipartite")
    n = len(support[0])
    covered = {c for part in partitions for c in part}
    stray = {i for s in support for i in range(n) if s[i] and i not in covered}
    if stray:
        raise CompileError("support uses variables outside the partitions")
    bases = []
    total = 1
    for k, part in enumerate(partitions):
        proj = sorted({tuple(s[i] for i in part) for s in support})
        degs = {sum(p) for p in proj}
        if k > 0 and len(degs) != 1:
            raise CompileError(f"partition {k} is not homogeneous in the support")
        if k > 0 and next(iter(degs)) % 2:
            raise CompileError(f"partition {k} has odd degree in the support")
        bases.append(newton_reduce(proj).Z)
        total *= bases[-1].__len__() or 1
    Z = []
    for combo in product(*reversed(bases)):
        e = [0] * n
        for part, z in zip(partitions, reversed(combo)):
            for i, v in zip(part, z):
                e[i] = v
        Z.append(tuple(e))
    return GramBasis(Z, "multipartite", total)


def mineq_basis(support, nx: int, r: int) -> GramBasis:
    """Shared basis ``(I kron Z)``: Z from the diagonal entries' supports."""
    diag = []
    for s in support:
        ys = s[nx:nx + r]
        if sum(ys) == 2 and max(ys) == 2:
            diag.append(s[:nx])
    if not diag:
        return GramBasis([], "mineq")
    z = heuristic_reduce(diag).Z
    width = len(support[0])
    Z = []
    for k in range(r):
        for e in z:
            row = list(e) + [0] * (width - nx)
            row[nx + k] = 1
            Z.append(tuple(row))
    return GramBasis(Z, "mineq", len(Z))


def constraint_basis(prog: SosProgram, ci: int) -> GramBasis:
    c = prog.exprs[ci]
    rule = c.aux.get("basis", "heuristic")
    support = c.Z
    if not support:
        return GramBasis([], rule)
    if rule == "heuristic":
        return heuristic_reduce(support)
    if rule == "newton":
        return newton_reduce(support)
    if rule == "full":
        return full_basis(support)
    if rule == "multipartite":
        return multipartite_reduce(support, c.aux["partitions"])
    if rule == "explicit":
        pad = len(prog.allvars) - len(prog.vartable)
        return GramBasis([tuple(z) + (0,) * pad for z in c.aux["gram_basis"]], "explicit")
    if rule == "mineq":
        return mineq_basis(support, len(prog.vartable), c.aux["mdim"])
    raise CompileError(f"unknown basis rule {rule!r}")


def assemble(prog: SosProgram, reduction: str | None = None) -> SdpProblem:
    """Build the SDP.  ``reduction`` overrides the basis rule of every scalar inequality."""
    if not prog.exprs:
        raise CompileError("program has no constraints")
    N = prog.ndecvars
    psd_owner = np.full(N, -1)
    for vi, v in enumerate(prog.vars):
        if v.is_psd:
            psd_owner[v.start:v.stop] = vi

    extravars = []
    decl_next = N
    for ci, c in enumerate(prog.exprs):
        if c.kind == "eq":
            continue
        basis = constraint_basis(prog, ci)
        if reduction is not None and c.aux.get("basis") in ("heuristic", "newton", "full"):
            basis = {"heuristic": heuristic_reduce, "newton": newton_reduce, "full": full_basis}[reduction](c.Z)
        ZZ, T = build_zz(basis.Z)
        k = len(basis.Z)
        size = k * (k + 1) // 2
        extravars.append(ExtraVar(ci, basis, ZZ, T, decl_next, decl_next + size, -1))
        decl_next += size
    ntotal = decl_next

    # block layout and solver ordering
    blocks, order = [], []
    scale = np.ones(ntotal)
    free = [d for d in range(N) if psd_owner[d] < 0]
    order.extend(free)
    sizes = []
    for vi, v in enumerate(prog.vars):
        if v.is_psd and v.block_size > 0:
            blocks.append(("var", vi))
            sizes.append(v.block_size)
            order.extend(range(v.start, v.stop))
            _scale_block(scale, v.start, v.block_size)
    for ei, ev in enumerate(extravars):
        if ev.size == 0:
            continue
        ev.block = len(blocks)
        blocks.append(("extra", ei))
        sizes.append(ev.size)
        order.extend(range(ev.start, ev.stop))
        _scale_block(scale, ev.start, ev.size)
    RR = np.array(order, dtype=int)
    pos = np.empty(ntotal, dtype=int)
    pos[RR] = np.arange(ntotal)

    rows, cols, vals = [], [], []
    b = []
    row_info = []
    ev_of = {ev.constraint: ev for ev in extravars}
    r0 = 0
    for ci, c in enumerate(prog.exprs):
        ev = ev_of.get(ci)
        mons = list(c.Z)
        if ev is not None:
            known = set(mons)
            mons.extend(z for z in ev.ZZ if z not in known)
            mons.sort(key=grlex_key)
        index = {z: r0 + k for k, z in enumerate(mons)}
        local = [index[z] for z in c.Z]
        bb = [0.0] * len(mons)
        for j, z in enumerate(c.Z):
            bb[index[z] - r0] = -float(c.b[j])
        for d, j, v in c.At:
            rows.append(local[j])
            cols.append(pos[d])
            vals.append(float(v) / scale[d])
        if ev is not None:
            for (i, j, zr, w) in ev.T:
                decl = ev.start + _tri_index(i, j, ev.size)
                rows.append(index[ev.ZZ[zr]])
                cols.append(pos[decl])
                vals.append(-w / scale[decl])
        b.extend(bb)
        row_info.extend((ci, z) for z in mons)
        r0 += len(mons)
    A = sp.csr_matrix((vals, (rows, cols)), shape=(r0, ntotal))
    A.sum_duplicates()
    cvec = np.zeros(ntotal)
    for d, v in prog.objective.items():
        cvec[pos[d]] = float(v) / scale[d]
    cone = Cone(len(free), tuple(sizes))
    return SdpProblem(A, np.array(b), cvec, cone, RR, scale, row_info, blocks, extravars, N)


def _tri_index(i: int, j: int, n: int) -> int:
    """Position of (i, j), i <= j, in row-major upper-triangle order."""
    return i * n - i * (i - 1) // 2 + (j - i)


def _scale_block(scale, start: int, n: int):
    k = start
    for i in range(n):
        for j in range(i, n):
            scale[k] = 1.0 if i == j else _SQRT2
            k += 1

"""Primal-dual interior-point solver for block SDPs.

Solves ``min c'x s.t. Ax = b`` over free variables times PSD blocks using
the HKM search direction with a Mehrotra predictor-corrector.  Free
variables enter the Newton system through an augmented (KKT) matrix.
Infeasibility is reported from the usual Farkas ratios on the iterates.
"""

from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp

from .compiler import Cone, SdpProblem, smat, svec

_SQRT2 = math.sqrt(2.0)


@dataclass
class SolveOptions:
    tol: float = 1e-8
    feas_tol: float = 1e-8
    max_iter: int = 100
    step_frac: float = 0.98
    verbose: bool = False

    def __post_init__(self):
        if not (self.tol > 0 and self.feas_tol > 0):
            raise ValueError("tolerances must be positive")
        if not 0 < self.step_frac < 1:
            raise ValueError("step_frac must lie in (0, 1)")
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")


@dataclass
class SolveReport:
    iterations: int = 0
    residual_norm: float = math.inf
    gap: float = math.inf
    feasratio: float = 0.0
    pinf: int = 0
    dinf: int = 0
    numerr: int = 0
    cpusec: float = 0.0
    pobj: float = math.nan
    dobj: float = math.nan
    dual_residual: float = math.inf
    rel_residual: float = math.inf  # residual_norm / (1 + ||b||)
    history: list = field(default_factory=list, repr=False)

    @property
    def status(self) -> str:
        if self.pinf:
            return "primal_infeasible"
        if self.dinf:
            return "dual_infeasible"
        if self.numerr == 0:
            return "optimal"
        if self.numerr == 1:
            return "inaccurate"
        return "failed"


@dataclass
class SdpSolution:
    x: np.ndarray
    y: np.ndarray
    S: np.ndarray
    report: SolveReport

    @property
    def feasible(self) -> bool:
        """Primal feasible to the accepted accuracy."""
        r = self.report
        if r.pinf or r.dinf or r.numerr == 2:
            return False
        return r.numerr == 0 or (r.rel_residual <= 1e-6 and r.gap <= 1e-5)


class SdpError(ValueError):
    pass


class _Data:
    """Solver-side view: free columns dense, PSD blocks in full orientation."""

    def __init__(self, A: sp.csr_matrix, b, c, cone: Cone, dscale=None):
        self.m = A.shape[0]
        self.cone = cone
        A = sp.csc_matrix(A)
        f = cone.free
        self.Af = A[:, :f].toarray()
        self.cf = np.asarray(c[:f], dtype=float)
        self.b = np.asarray(b, dtype=float)
        self.blocks = []
        for off, n in zip(cone.offsets(), cone.psd):
            t = n * (n + 1) // 2
            P = _svec_to_full(n)
            Ab = sp.csr_matrix(A[:, off:off + t] @ P)
            Cb = (P.T @ np.asarray(c[off:off + t], dtype=float)).reshape(n, n)
            Cb = 0.5 * (Cb + Cb.T)
            d = np.ones(n) if dscale is None else dscale[len(self.blocks)]
            dd = np.outer(d, d)
            Ab = sp.csr_matrix(Ab @ sp.diags(dd.ravel()))
            Cb = dd * Cb
            rows = np.unique(Ab.nonzero()[0])
            sub = Ab[rows]
            entries = []
            for k in range(sub.shape[0]):
                lo, hi = sub.indptr[k], sub.indptr[k + 1]
                idx = sub.indices[lo:hi]
                entries.append((idx // n, idx % n, sub.data[lo:hi]))
            self.blocks.append(
                dict(n=n, A=Ab, AT=sp.csr_matrix(Ab.T), C=Cb, rows=rows, sub=sub, entries=entries, d=d)
            )

    def Aop(self, Xs, xf):
        out = self.Af @ xf if self.Af.shape[1] else np.zeros(self.m)
        for blk, X in zip(self.blocks, Xs):
            out = out + blk["A"] @ X.ravel()
        return out

    def ATop(self, y):
        return [(blk["AT"] @ y).reshape(blk["n"], blk["n"]) for blk in self.blocks], self.Af.T @ y

    def schur(self, Xs, Sinvs):
        M = np.zeros((self.m, self.m))
        for blk, X, Si in zip(self.blocks, Xs, Sinvs):
            rows = blk["rows"]
            if rows.size == 0:
                continue
            n = blk["n"]
            Y = np.empty((rows.size, n * n))
            for k, (K, L, v) in enumerate(blk["entries"]):
                Y[k] = ((X[:, K] * v) @ Si[L, :]).ravel()
            Mb = np.asarray(blk["sub"] @ Y.T).T
            M[np.ix_(rows, rows)] += 0.5 * (Mb + Mb.T)
        return M


def _svec_to_full(n: int) -> sp.csr_matrix:
    rows, cols, vals = [], [], []
    t = 0
    for i in range(n):
        for j in range(i, n):
            if i == j:
                rows.append(t); cols.append(i * n + i); vals.append(1.0)
            else:
                rows += [t, t]; cols += [i * n + j, j * n + i]; vals += [1 / _SQRT2, 1 / _SQRT2]
            t += 1
    return sp.csr_matrix((vals, (rows, cols)), shape=(t, n * n))


def _max_step(X, dX):
    """Largest alpha with X + alpha dX PSD, X positive definite."""
    try:
        L = la.cholesky(X, lower=True)
    except la.LinAlgError:
        return 0.0
    W = la.solve_triangular(L, dX, lower=True)
    W = la.solve_triangular(L, W.T, lower=True)
    lam = la.eigvalsh(0.5 * (W + W.T))[0]
    return math.inf if lam >= 0 else -1.0 / lam


def _inner(As, Bs) -> float:
    return float(sum(np.vdot(a, b) for a, b in zip(As, Bs)))


def _presolve(A: sp.csr_matrix, b: np.ndarray, tol: float):
    """Independent row subset; flags inconsistent dependent rows."""
    m = A.shape[0]
    norms = np.sqrt(np.asarray(A.multiply(A).sum(axis=1)).ravel())
    zero = norms <= 1e-14
    bnorm = max(1.0, np.abs(b).max(initial=0.0))
    if np.any(np.abs(b[zero]) > tol * bnorm):
        return None, True
    keep = np.flatnonzero(~zero)
    if keep.size == 0:
        return keep, False
    Ak = A[keep]
    G = (Ak @ Ak.T).toarray()
    try:
        L = la.cholesky(G, lower=True)
        d = np.diag(L) ** 2
        if d.min() > 1e-12 * d.max():
            return keep, False
    except la.LinAlgError:
        pass
    Ad = Ak.toarray()
    _, R, piv = la.qr(Ad.T, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    rank = int(np.sum(diag > 1e-10 * diag[0]))
    indep = np.sort(piv[:rank])
    dep = np.sort(piv[rank:])
    if dep.size:
        W, *_ = la.lstsq(Ad[indep].T, Ad[dep].T)
        bk = b[keep]
        err = np.abs(W.T @ bk[indep] - bk[dep])
        if np.any(err > 1e-8 * bnorm):
            return None, True
    return keep[indep], False


def _diagonal_scaling(A: sp.csr_matrix, b, cone: Cone, spread: float = 1e4) -> list:
    """Per-block congruence ``X = D Xs D`` with D from the least-norm solution of Ax = b."""
    if os.environ.get("SOSOPT_NO_DSCALE"):
        return [np.ones(n) for n in cone.psd]
    G = (A @ A.T).toarray()
    G[np.diag_indices_from(G)] += 1e-12 * max(1.0, float(np.abs(G).max(initial=0.0)))
    try:
        w = la.cho_solve(la.cho_factor(G), b)
    except la.LinAlgError:
        w = la.lstsq(G, b)[0]
    x = A.T @ w
    out = []
    for off, n in zip(cone.offsets(), cone.psd):
        diag = np.abs(np.diag(smat(x[off:off + n * (n + 1) // 2], n)))
        top = diag.max(initial=0.0)
        if top <= 0:
            out.append(np.ones(n))
            continue
        diag = np.maximum(diag, top / spread ** 2)
        d = np.sqrt(diag / top)
        out.append(d / np.exp(np.mean(np.log(d))))
    return out


def sdp_solve(problem: SdpProblem, options: SolveOptions | None = None) -> SdpSolution:
    """Primal-dual interior-point solve of ``min c'x, Ax = b, x in K``."""
    opts = options or SolveOptions()
    t0 = time.perf_counter()
    red = _free_column_reduce(problem)
    if red is None:
        return _solve_psd_reduced(problem, opts, t0)
    sub, cols = red
    sol = _solve_psd_reduced(sub, opts, t0)
    nf = problem.cone.free
    x = np.zeros(problem.n)
    x[cols] = sol.x
    s = problem.c - problem.A.T @ sol.y
    dropped = np.setdiff1d(np.arange(nf), cols)
    report = sol.report
    drift = float(np.abs(s[dropped]).max(initial=0.0))
    if not (report.pinf or report.dinf) and drift > 1e-6 * (1.0 + float(np.linalg.norm(problem.c))):
        # the cost is not constant along a null direction of the free columns
        report.dinf, report.numerr, report.feasratio = 1, 0, 1.0
    s[cols] = sol.S
    s[:nf] = 0.0
    return SdpSolution(x, sol.y, s, report)


def _free_column_reduce(problem: SdpProblem):
    """Drop free columns that are linear combinations of other free columns.

    Their component along the null space of the free block is arbitrary, so
    fixing it at zero keeps the optimal value; the reduced problem then has
    a nonsingular KKT matrix.  Returns ``(reduced problem, kept columns)``
    or ``None``.
    """
    nf = problem.cone.free
    if nf == 0:
        return None
    Af = problem.A[:, :nf].toarray()
    if Af.shape[0]:
        _, R, piv = la.qr(Af, mode="economic", pivoting=True)
        d = np.abs(np.diag(R))
        rank = int(np.sum(d > 1e-10 * max(1.0, float(d.max(initial=0.0)))))
    else:
        piv, rank = np.arange(nf), 0
    if rank == nf:
        return None
    cols = np.concatenate([np.sort(piv[:rank]), np.arange(nf, problem.n)]).astype(int)
    red = SdpProblem(problem.A[:, cols], problem.b, problem.c[cols], Cone(rank, problem.cone.psd))
    return red, cols


def _solve_psd_reduced(problem: SdpProblem, opts: SolveOptions, t0: float) -> SdpSolution:
    red = _zero_diagonal_reduce(problem)
    if red is None:
        return _solve(problem, opts, t0)
    sub, cols, rows = red
    sol = _solve(sub, opts, t0)
    x = np.zeros(problem.n)
    x[cols] = sol.x
    y = np.zeros(problem.m)
    y[rows] = sol.y
    s = problem.c - problem.A.T @ y
    s[cols] = sol.S
    s[:problem.cone.free] = 0.0
    return SdpSolution(x, y, s, sol.report)


def _zero_diagonal_reduce(problem: SdpProblem):
    """Drop PSD rows/columns whose diagonal is pinned to zero by some equality.

    A row ``sum_k a_k X_kk = 0`` with all ``a_k`` of one sign forces those
    diagonals, hence their whole rows and columns, to vanish.  Removing them
    restores strict feasibility without changing the feasible set.
    Returns ``(reduced problem, kept columns, kept rows)`` or ``None``.
    """
    cone = problem.cone
    if not cone.psd:
        return None
    A = problem.A.tocsr()
    b = problem.b
    m, n = A.shape
    # column -> (block, i, j)
    where = {}
    diag_col = []
    for k, (off, nb) in enumerate(zip(cone.offsets(), cone.psd)):
        cols = {}
        p = off
        for i in range(nb):
            for j in range(i, nb):
                where[p] = (k, i, j)
                if i == j:
                    cols[i] = p
                p += 1
        diag_col.append(cols)
    dead = [set() for _ in cone.psd]
    alive = np.ones(n, dtype=bool)
    changed = True
    while changed:
        changed = False
        for r in range(m):
            if b[r] != 0:
                continue
            lo, hi = A.indptr[r], A.indptr[r + 1]
            idx = A.indices[lo:hi]
            val = A.data[lo:hi]
            mask = alive[idx] & (val != 0)
            idx, val = idx[mask], val[mask]
            if idx.size == 0:
                continue
            if not (np.all(val > 0) or np.all(val < 0)):
                continue
            info = [where.get(int(c)) for c in idx]
            if any(w is None or w[1] != w[2] for w in info):
                continue
            for k, i, _ in info:
                if i in dead[k]:
                    continue
                dead[k].add(i)
                changed = True
                for c, (kk, a, bb) in where.items():
                    if kk == k and (a == i or bb == i):
                        alive[c] = False
    if not any(dead):
        return None
    psd = []
    for k, nb in enumerate(cone.psd):
        left = nb - len(dead[k])
        if left:
            psd.append(left)
    cols = np.flatnonzero(alive)
    sub = A[:, cols].tocsr()
    nnz = np.diff(sub.indptr)
    rows = np.flatnonzero((nnz > 0) | (b != 0))
    red = SdpProblem(sub[rows], b[rows], problem.c[cols], Cone(cone.free, tuple(psd)))
    return red, cols, rows


def _solve(problem: SdpProblem, opts: SolveOptions, t0: float) -> SdpSolution:
    A, b, c, cone = problem.A, problem.b, problem.c, problem.cone
    m, n = A.shape
    report = SolveReport()

    keep, inconsistent = _presolve(A, b, opts.feas_tol)
    if inconsistent:
        report.pinf = 1
        report.feasratio = -1.0
        report.cpusec = time.perf_counter() - t0
        return SdpSolution(np.zeros(n), np.zeros(m), np.zeros(n), report)

    Ar = A[keep]
    br = b[keep]
    rn = np.sqrt(np.asarray(Ar.multiply(Ar).sum(axis=1)).ravel())
    D = 1.0 / rn
    As = sp.diags(D) @ Ar
    bs_ = br * D
    bscale = max(1.0, float(np.linalg.norm(bs_)))
    cscale = max(1.0, float(np.linalg.norm(c)))
    As = sp.csr_matrix(As)
    dscale = _diagonal_scaling(As, bs_ / bscale, cone)
    data = _Data(As, bs_ / bscale, c / cscale, cone, dscale)

    def unscale(Xs, xf, y, Ss):
        x = np.concatenate([xf * bscale] + [svec(X * np.outer(d, d)) * bscale for X, d in zip(Xs, dscale)])
        yy = np.zeros(m)
        yy[keep] = y * D * cscale
        s = np.concatenate([np.zeros(cone.free)] + [svec(S / np.outer(d, d)) * cscale for S, d in zip(Ss, dscale)])
        return x, yy, s

    bnorm = 1.0 + float(np.linalg.norm(b))
    cnorm = 1.0 + float(np.linalg.norm(c))

    def measures(x, y, s):
        rp = A @ x - b
        rd = c - A.T @ y - s
        pobj = float(c @ x)
        dobj = float(b @ y)
        denom = 1.0 + abs(pobj) + abs(dobj)
        return dict(
            pres=float(np.linalg.norm(rp)) / bnorm,
            dres=float(np.linalg.norm(rd)) / cnorm,
            pobj=pobj,
            dobj=dobj,
            relgap=abs(pobj - dobj) / denom,
            compl=float(max(x @ s, 0.0)) / denom,
            rp=rp,
            rd=rd,
            farkas=float(np.linalg.norm(c - rd)) / dobj if dobj > 0 else math.inf,
        )

    if not data.blocks:
        return _solve_free(problem, report, t0)

    nb = [blk["n"] for blk in data.blocks]
    Ntot = float(sum(nb))
    Xs, Ss = [], []
    for blk in data.blocks:
        nn = blk["n"]
        sub = blk["sub"]
        anorm = np.sqrt(np.asarray(sub.multiply(sub).sum(axis=1)).ravel()) if sub.shape[0] else np.zeros(1)
        bsub = np.abs(data.b[blk["rows"]]) if blk["rows"].size else np.zeros(1)
        zeta = max(10.0, math.sqrt(nn), nn * float(np.max((1 + bsub) / (1 + anorm))))
        eta = max(10.0, math.sqrt(nn), float(anorm.max(initial=0.0)), float(np.linalg.norm(blk["C"])))
        Xs.append(zeta * np.eye(nn))
        Ss.append(eta * np.eye(nn))
    xf = np.zeros(cone.free)
    y = np.zeros(data.m)
    nf = cone.free
    best = None
    status_done = False
    it = 0
    for it in range(opts.max_iter + 1):
        x_u, y_u, s_u = unscale(Xs, xf, y, Ss)
        ms = measures(x_u, y_u, s_u)
        report.history.append((ms["pobj"], ms["dobj"], ms["pres"], ms["dres"], ms["relgap"], ms["compl"]))
        if opts.verbose:
            print(
                f"{it:3d} pobj {ms['pobj']: .8e} dobj {ms['dobj']: .8e} "
                f"pres {ms['pres']:.1e} dres {ms['dres']:.1e} gap {max(ms['relgap'], ms['compl']):.1e}"
            )
        score = max(ms["pres"], ms["dres"], ms["relgap"], ms["compl"])
        if best is None or score < best[0]:
            best = (score, x_u, y_u, s_u, ms)
        if ms["pres"] <= opts.feas_tol and ms["dres"] <= opts.feas_tol and max(ms["relgap"], ms["compl"]) <= opts.tol:
            status_done = True
            break
        # Farkas certificates
        if ms["dobj"] > 0:
            if ms["farkas"] <= opts.feas_tol:
                report.pinf = 1
                best = (score, x_u, y_u, s_u, ms)
                break
        cx = ms["pobj"]
        if cx < 0:
            ratio = float(np.linalg.norm(b + ms["rp"])) / (-cx)
            if ratio <= opts.feas_tol:
                report.dinf = 1
                best = (score, x_u, y_u, s_u, ms)
                break
        if it == opts.max_iter:
            report.numerr = 1
            break
        try:
            step = _iterate(data, Xs, xf, y, Ss, nf, Ntot, opts)
        except (la.LinAlgError, FloatingPointError, ValueError):
            report.numerr = 2
            break
        if step is None:
            report.numerr = 2
            break
        Xs, xf, y, Ss, ap, ad = step
        if max(ap, ad) < 1e-10:
            report.numerr = 1
            break

    score, x_u, y_u, s_u, ms = best
    if report.numerr == 2 and score <= 1e-5:
        # breakdown after convergence stalled; the best iterate is still usable
        report.numerr = 1
    if not status_done and not (report.pinf or report.dinf):
        # the iterate may still carry a weaker infeasibility certificate
        cx = ms["pobj"]
        if ms["farkas"] <= 1e-6:
            report.pinf, report.numerr = 1, 0
        elif cx < 0 and float(np.linalg.norm(b + ms["rp"])) / (-cx) <= 1e-6:
            report.dinf, report.numerr = 1, 0
        elif report.numerr == 0:
            report.numerr = 1
    report.iterations = it
    report.residual_norm = float(np.linalg.norm(ms["rp"]))
    report.rel_residual = ms["pres"]
    report.dual_residual = float(np.linalg.norm(ms["rd"]))
    report.gap = max(ms["relgap"], ms["compl"])
    report.pobj, report.dobj = ms["pobj"], ms["dobj"]
    report.feasratio = _feasratio(ms, report)
    report.cpusec = time.perf_counter() - t0
    return SdpSolution(x_u, y_u, s_u, report)


def _feasratio(ms, report) -> float:
    """(r_inf - r_feas) / (r_inf + r_feas) from the primal residual and the Farkas ratio."""
    if report.pinf:
        return -1.0
    if report.dinf:
        return 1.0
    r_feas = ms["pres"]
    r_inf = ms["farkas"]
    if not math.isfinite(r_inf):
        return 1.0
    if r_inf + r_feas == 0:
        return 0.0
    return float(np.clip((r_inf - r_feas) / (r_inf + r_feas), -1.0, 1.0))


class _KKT:
    """Symmetric factorization of [[M, Af], [Af', 0]]."""

    def __init__(self, M, Af):
        m, nf = M.shape[0], Af.shape[1]
        self.m, self.nf = m, nf
        M = M.copy()
        M[np.diag_indices(m)] += 1e-15 * max(1.0, float(np.abs(np.diag(M)).max(initial=0.0)))
        if nf == 0:
            self.kind = "chol"
            self.fac = la.cho_factor(M, lower=True, check_finite=True)
            return
        K = np.zeros((m + nf, m + nf))
        K[:m, :m] = M
        K[:m, m:] = Af
        K[m:, :m] = Af.T
        lu, d, perm = la.ldl(K, lower=True, check_finite=True)
        self.kind = "ldl"
        self.L = lu[perm]
        self.perm = perm
        if not np.all(np.isfinite(d)):
            raise la.LinAlgError("singular KKT system")
        # invert the 1x1 / 2x2 pivot blocks once
        self.pivots = []
        k, N = 0, d.shape[0]
        while k < N:
            if k + 1 < N and d[k + 1, k] != 0:
                blk = d[k:k + 2, k:k + 2]
                det = blk[0, 0] * blk[1, 1] - blk[0, 1] * blk[1, 0]
                if det == 0:
                    raise la.LinAlgError("singular KKT pivot")
                self.pivots.append((k, 2, np.array([[blk[1, 1], -blk[0, 1]], [-blk[1, 0], blk[0, 0]]]) / det))
                k += 2
            else:
                if d[k, k] == 0:
                    raise la.LinAlgError("singular KKT pivot")
                self.pivots.append((k, 1, 1.0 / d[k, k]))
                k += 1

    def solve(self, rhs):
        if self.kind == "chol":
            return la.cho_solve(self.fac, rhs)
        z = la.solve_triangular(self.L, rhs[self.perm], lower=True, unit_diagonal=True)
        w = np.empty_like(z)
        for k, size, inv in self.pivots:
            if size == 1:
                w[k] = inv * z[k]
            else:
                w[k:k + 2] = inv @ z[k:k + 2]
        out = np.empty_like(rhs)
        out[self.perm] = la.solve_triangular(self.L.T, w, lower=False, unit_diagonal=True)
        return out


def _iterate(data: _Data, Xs, xf, y, Ss, nf, Ntot, opts):
    b, Af, cf = data.b, data.Af, data.cf
    ATy, AfTy = data.ATop(y)
    Rd = [blk["C"] - a - S for blk, a, S in zip(data.blocks, ATy, Ss)]
    Rf = cf - AfTy
    Rp = b - data.Aop(Xs, xf)
    mu = _inner(Xs, Ss) / Ntot
    Sinvs = []
    for S in Ss:
        Si = la.cho_solve(la.cho_factor(S, lower=True), np.eye(S.shape[0]))
        Sinvs.append(0.5 * (Si + Si.T))
    kkt = _KKT(data.schur(Xs, Sinvs), Af)
    m = data.m
    XRdS = [X @ R @ Si for X, R, Si in zip(Xs, Rd, Sinvs)]
    zf = np.zeros(nf)

    def expand(G, dy):
        ATdy, AfTdy = data.ATop(dy)
        dS = [R - a for R, a in zip(Rd, ATdy)]
        dS = [0.5 * (d + d.T) for d in dS]
        dX = []
        for g, X, d, Si in zip(G, Xs, dS, Sinvs):
            T = X @ d @ Si
            dX.append(g - 0.5 * (T + T.T))
        return dX, dS, AfTdy

    def direction(Gc):
        h = Rp - data.Aop(Gc, zf) + data.Aop(XRdS, zf)
        sol = kkt.solve(np.concatenate([h, Rf]))
        dy, dxf = sol[:m], sol[m:]
        dX, dS, AfTdy = expand(Gc, dy)
        for _ in range(2):
            ep = Rp - data.Aop(dX, dxf)
            ef = Rf - AfTdy
            if max(np.abs(ep).max(initial=0), np.abs(ef).max(initial=0)) <= 1e-15 * (1 + np.abs(Rp).max(initial=0)):
                break
            corr = kkt.solve(np.concatenate([ep, ef]))
            dy = dy + corr[:m]
            dxf = dxf + corr[m:]
            dX, dS, AfTdy = expand(Gc, dy)
        return dX, dxf, dy, dS

    dXa, dxfa, dya, dSa = direction([-X for X in Xs])
    ap = min(1.0, min(_max_step(X, d) for X, d in zip(Xs, dXa)))
    ad = min(1.0, min(_max_step(S, d) for S, d in zip(Ss, dSa)))
    mu_aff = _inner([X + ap * d for X, d in zip(Xs, dXa)], [S + ad * d for S, d in zip(Ss, dSa)]) / Ntot
    expon = max(1.0, 3.0 * min(ap, ad) ** 2)
    sigma = min(1.0, max(0.0, mu_aff / mu) ** expon) if mu > 0 else 0.0
    Gc = []
    for X, Si, dx, ds in zip(Xs, Sinvs, dXa, dSa):
        T = dx @ ds @ Si
        Gc.append(sigma * mu * Si - X - 0.5 * (T + T.T))
    dX, dxf, dy, dS = direction(Gc)
    gamma = opts.step_frac
    ap = min(1.0, gamma * min(_max_step(X, d) for X, d in zip(Xs, dX)))
    ad = min(1.0, gamma * min(_max_step(S, d) for S, d in zip(Ss, dS)))
    if not (np.isfinite(ap) and np.isfinite(ad)):
        return None
    Xn = [X + ap * d for X, d in zip(Xs, dX)]
    Sn = [S + ad * d for S, d in zip(Ss, dS)]
    Xn = [0.5 * (X + X.T) for X in Xn]
    Sn = [0.5 * (S + S.T) for S in Sn]
    if not all(np.all(np.isfinite(X)) for X in Xn + Sn):
        return None
    return Xn, xf + ap * dxf, y + ad * dy, Sn, ap, ad


def _solve_free(problem: SdpProblem, report: SolveReport, t0: float) -> SdpSolution:
    """No PSD blocks: a linear system with a linear objective."""
    A = problem.A.toarray()
    b, c = problem.b, problem.c
    x, *_ = la.lstsq(A, b) if A.size else (np.zeros(problem.n),)
    y, *_ = la.lstsq(A.T, c) if A.size else (np.zeros(problem.m),)
    rp = A @ x - b
    rd = c - A.T @ y
    report.iterations = 0
    report.residual_norm = float(np.linalg.norm(rp))
    report.dual_residual = float(np.linalg.norm(rd))
    if report.residual_norm > 1e-8 * (1 + np.linalg.norm(b)):
        report.pinf = 1
    elif report.dual_residual > 1e-8 * (1 + np.linalg.norm(c)):
        report.dinf = 1
    report.pobj, report.dobj = float(c @ x), float(b @ y)
    report.gap = abs(report.pobj - report.dobj) / (1 + abs(report.pobj) + abs(report.dobj)) if not report.dinf else math.inf
    report.feasratio = -1.0 if report.pinf else 1.0
    report.cpusec = time.perf_counter() - t0
    return SdpSolution(x, y, np.zeros(problem.n), report)


def block_views(problem: SdpProblem, v) -> list:
    """Split a solver-order svec vector into full PSD block matrices."""
    out = []
    for off, n in zip(problem.cone.offsets(), problem.cone.psd):
        out.append(smat(v[off:off + n * (n + 1) // 2], n))
    return out

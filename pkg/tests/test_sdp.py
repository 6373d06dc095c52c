import numpy as np
import pytest
import scipy.sparse as sp

from sosopt.compiler import Cone, SdpProblem, smat, svec
from sosopt.sdp import SolveOptions, block_views, sdp_solve

from sdp_instances import random_sdp, rel_gap


def scalar_problem(b, c=1.0):
    return SdpProblem(np.array([[1.0]]), np.array([b]), np.array([c]), Cone(0, (1,)))


def test_scalar_closed_form():
    sol = sdp_solve(scalar_problem(2.0))
    assert sol.report.status == "optimal"
    assert sol.x == pytest.approx([2.0], abs=1e-7)
    assert sol.report.pobj == pytest.approx(2.0, abs=1e-7)
    assert sol.S == pytest.approx([0.0], abs=1e-6)


def test_negative_scalar_is_primal_infeasible():
    r = sdp_solve(scalar_problem(-1.0)).report
    assert r.pinf == 1 and r.dinf == 0
    assert r.feasratio == -1.0
    assert r.status == "primal_infeasible"


def test_unbounded_is_dual_infeasible():
    # min -t  s.t.  t - X = 0, X psd
    A = np.array([[1.0, -1.0]])
    p = SdpProblem(A, np.zeros(1), np.array([-1.0, 0.0]), Cone(1, (1,)))
    r = sdp_solve(p).report
    assert r.dinf == 1 and r.pinf == 0


def test_two_by_two_known_optimum():
    # min <I, X>  s.t.  X_12 = 1  ->  X = [[1,1],[1,1]], value 2
    A = np.array([[0.0, np.sqrt(2.0) / 2, 0.0]])
    c = svec(np.eye(2))
    sol = sdp_solve(SdpProblem(A, [1.0], c, Cone(0, (2,))))
    assert sol.report.status == "optimal"
    assert sol.report.pobj == pytest.approx(2.0, abs=1e-7)
    assert np.allclose(smat(sol.x, 2), [[1, 1], [1, 1]], atol=1e-6)


@pytest.mark.parametrize("seed", range(30))
def test_random_instances_kkt(seed):
    p = random_sdp(seed)
    opts = SolveOptions()
    sol = sdp_solve(p, opts)
    r = sol.report
    assert r.status == "optimal"
    assert rel_gap(p, sol) <= opts.tol
    res = p.A @ sol.x - p.b
    assert np.abs(res).max() <= opts.feas_tol * (1 + np.abs(p.b).max()) * 10
    assert np.linalg.norm(res) <= r.residual_norm * (1 + 1e-9) + 1e-15
    for X, S in zip(block_views(p, sol.x), block_views(p, sol.S)):
        assert np.linalg.eigvalsh(X).min() >= -opts.feas_tol * (1 + np.linalg.norm(X))
        assert np.linalg.eigvalsh(S).min() >= -opts.feas_tol * (1 + np.linalg.norm(S))
    assert -1.0 <= r.feasratio <= 1.0


@pytest.mark.parametrize("seed", [0, 3, 7, 11, 19])
def test_matches_cvxpy(seed):
    cp = pytest.importorskip("cvxpy")
    p = random_sdp(seed, max_block=6, max_rows=12)
    xs = []
    cons = []
    k = 0
    if p.cone.free:
        f = cp.Variable(p.cone.free)
        xs.append(f)
    for n in p.cone.psd:
        X = cp.Variable((n, n), symmetric=True)
        cons.append(X >> 0)
        iu = np.triu_indices(n)
        w = np.where(iu[0] == iu[1], 1.0, np.sqrt(2.0))
        xs.append(cp.hstack([X[i, j] * wk for i, j, wk in zip(iu[0], iu[1], w)]))
    x = cp.hstack(xs)
    A = p.A.toarray()
    prob = cp.Problem(cp.Minimize(p.c @ x), cons + [A @ x == p.b])
    prob.solve(solver="CLARABEL")
    sol = sdp_solve(p)
    assert sol.report.pobj == pytest.approx(prob.value, rel=1e-5, abs=1e-5)


def test_determinism():
    p = random_sdp(5)
    a = sdp_solve(p).report.history
    b = sdp_solve(p).report.history
    assert a == b


def test_duplicate_rows_are_dropped():
    A = np.array([[1.0], [2.0]])
    sol = sdp_solve(SdpProblem(A, [3.0, 6.0], [1.0], Cone(0, (1,))))
    assert sol.report.status == "optimal"
    assert sol.x == pytest.approx([3.0], abs=1e-7)


def test_inconsistent_duplicate_rows_are_infeasible():
    A = np.array([[1.0], [2.0]])
    r = sdp_solve(SdpProblem(A, [3.0, 5.0], [1.0], Cone(0, (1,)))).report
    assert r.pinf == 1


def test_dependent_free_columns():
    # x1 + x2 = X with cost x1 + x2 + X and X = 1: the split of x1, x2 is arbitrary
    A = np.array([[1.0, 1.0, -1.0], [0.0, 0.0, 1.0]])
    p = SdpProblem(A, [0.0, 1.0], [1.0, 1.0, 1.0], Cone(2, (1,)))
    sol = sdp_solve(p)
    assert sol.report.status == "optimal"
    assert sol.report.pobj == pytest.approx(2.0, abs=1e-7)
    assert A @ sol.x == pytest.approx([0.0, 1.0], abs=1e-7)
    # cost x1 - x2 is unbounded along x1 = -x2
    q = SdpProblem(A, [0.0, 1.0], [1.0, -1.0, 0.0], Cone(2, (1,)))
    assert sdp_solve(q).report.dinf == 1


def test_zero_diagonal_facial_reduction():
    # X_11 = 0 forces the first row/column of X to vanish; X_22 = 1
    n = 2
    A = sp.csr_matrix(np.array([[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]))
    p = SdpProblem(A, [0.0, 1.0], svec(np.eye(n)), Cone(0, (n,)))
    sol = sdp_solve(p)
    assert sol.report.status == "optimal"
    assert np.allclose(smat(sol.x, 2), [[0, 0], [0, 1]], atol=1e-8)


def test_free_only_problem():
    A = np.array([[1.0, 1.0]])
    sol = sdp_solve(SdpProblem(A, [2.0], [1.0, 1.0], Cone(2, ())))
    assert sol.report.status == "optimal"
    assert sol.report.pobj == pytest.approx(2.0)


def test_options_validation():
    with pytest.raises(ValueError):
        SolveOptions(tol=0)
    with pytest.raises(ValueError):
        SolveOptions(step_frac=1.0)


def test_iteration_limit_flags_numerr():
    r = sdp_solve(random_sdp(2), SolveOptions(max_iter=2)).report
    assert r.numerr == 1 and r.iterations == 2
    assert r.status == "inaccurate"


def test_verbose_trace(capsys):
    sdp_solve(scalar_problem(2.0), SolveOptions(verbose=True))
    out = capsys.readouterr().out
    assert "pobj" in out and "gap" in out

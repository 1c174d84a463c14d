import numpy as np
import pytest

from conftest import crandn
from oracles import ball_projected_gradient, qcqp_dual_projected_gradient
from starcr.conic import (HermitianSdpBuilder, Infeasible, QcqpProblem, QuadConstraint,
                          SdpProblem, complexify_vector, realify_matrix, realify_vector,
                          solve_qcqp, solve_sdp)


def _random_psd(rng, n, rank=None, scale=1.0):
    A = crandn(rng, n, rank or n)
    return scale * A @ A.conj().T


def random_qcqp(rng, n=4, m=3):
    """Strictly feasible at 0 with constraints that tend to be active."""
    P0 = _random_psd(rng, n) + 0.1 * np.eye(n)
    q0 = crandn(rng, n, scale=3.0)
    x_free = np.linalg.solve(P0, q0)
    cons = []
    for i in range(m):
        P = _random_psd(rng, n, rank=int(rng.integers(1, n + 1)))
        q = crandn(rng, n, scale=0.3)
        val = np.real(np.vdot(x_free, P @ x_free)) + 2 * np.real(np.vdot(q, x_free))
        r = max(rng.uniform(0.2, 0.9) * abs(val), 0.05)
        cons.append(QuadConstraint(P, q, r))
    return QcqpProblem(P0, q0, cons)


def test_realification_preserves_quadratic_forms(rng):
    P = _random_psd(rng, 3)
    x = crandn(rng, 3)
    y = realify_vector(x)
    assert y @ realify_matrix(P) @ y == pytest.approx(np.real(np.vdot(x, P @ x)), rel=1e-13)
    assert np.array_equal(complexify_vector(y), x)


def test_unconstrained_stationary_point(rng):
    P = _random_psd(rng, 4) + np.eye(4)
    q = crandn(rng, 4)
    (x,), rep = solve_qcqp(QcqpProblem(P, q, [QuadConstraint(np.eye(4), None, 1e12)]))
    assert np.allclose(x, np.linalg.solve(P, q), rtol=1e-6, atol=1e-8)


def test_projection_onto_ball():
    a = np.array([2.0, 0.0, 0.0], dtype=complex) * np.exp(0.3j)
    (x,), rep = solve_qcqp(QcqpProblem(np.eye(3), a, [QuadConstraint(np.eye(3), None, 1.0)]))
    assert np.allclose(x, a / 2, atol=1e-7)
    assert rep.kkt_residual <= 1e-6


def test_ball_constrained_matches_primal_projected_gradient(rng):
    for _ in range(10):
        P = _random_psd(rng, 4, rank=2)
        q = crandn(rng, 4, scale=2.0)
        (x,), rep = solve_qcqp(QcqpProblem(P, q, [QuadConstraint(np.eye(4), None, 0.5)]))
        xo, fo = ball_projected_gradient(P, q, 0.5)
        f = rep.objective
        assert abs(f - fo) <= 1e-5 * max(1.0, abs(fo))
        assert rep.kkt_residual <= 1e-6


def test_three_constraints_match_dual_oracle(rng):
    for _ in range(10):
        prob = random_qcqp(rng)
        (x,), rep = solve_qcqp(prob)
        xo, fo, lam = qcqp_dual_projected_gradient(
            prob.P0, prob.q0, [(c.P, c.q, c.r) for c in prob.constraints])
        assert rep.kkt_residual <= 1e-6
        assert abs(rep.objective - fo) <= 1e-5 * max(1.0, abs(fo))
        assert np.all(prob.constraint_values(x) <= 1e-7 * max(1, abs(fo)))


def test_phase1_handles_infeasible_origin(rng):
    # ||x - c||^2 <= 1 with ||c|| = 3 excludes the origin
    c = np.array([3.0, 0, 0], dtype=complex)
    cons = [QuadConstraint(np.eye(3), -c, 1.0 - 9.0)]
    (x,), rep = solve_qcqp(QcqpProblem(np.eye(3), np.zeros(3), cons))
    assert np.allclose(x, [2, 0, 0], atol=1e-6)


def test_infeasible_problem_raises():
    cons = [QuadConstraint(np.eye(2), None, 1.0),
            QuadConstraint(np.eye(2), -np.array([5.0, 0]), 1.0 - 25.0)]
    with pytest.raises(Infeasible):
        solve_qcqp(QcqpProblem(np.eye(2), np.zeros(2), cons))


def test_solver_is_deterministic(rng):
    prob = random_qcqp(rng)
    (x1,), _ = solve_qcqp(prob)
    (x2,), _ = solve_qcqp(prob)
    assert np.array_equal(x1, x2)


def test_blocks_split_solution(rng):
    P = np.eye(4)
    q = np.arange(4, dtype=complex)
    x, _ = solve_qcqp(QcqpProblem(P, q, [QuadConstraint(P, None, 1e9)], blocks=[1, 3]))
    assert [len(b) for b in x] == [1, 3]


def _trace_one(C):
    b = HermitianSdpBuilder()
    blk = b.add_hermitian(C.shape[0])
    b.set_objective(b.linear_form(blk, C))
    b.add_eq(b.linear_form(blk, np.eye(C.shape[0])), 1.0)
    x, rep = solve_sdp(b.build(), tol=1e-9)
    return b.unpack(x)[0], rep


def test_sdp_trace_one_gives_min_eigenvalue(rng):
    for _ in range(5):
        A = crandn(rng, 6, 6)
        C = 0.5 * (A + A.conj().T)
        X, rep = _trace_one(C)
        lam, U = np.linalg.eigh(C)
        assert rep.objective == pytest.approx(lam[0], abs=1e-6)
        assert np.real(np.vdot(U[:, 0], X @ U[:, 0])) == pytest.approx(1.0, abs=1e-4)


def test_sdp_diagonal_selects_smallest_entry():
    C = np.diag([3.0, -1.0, 2.0, 0.5])
    X, rep = _trace_one(C)
    assert rep.objective == pytest.approx(-1.0, abs=1e-7)
    assert X[1, 1].real == pytest.approx(1.0, abs=1e-5)


def test_sdp_real_form_with_inequality():
    # min -x1 - x2 s.t. [[1, x1], [x1, 1]] >= 0 ... via F: H - sum x_i F_i
    F = np.zeros((2, 2, 2))
    F[0, 1, 0] = F[1, 0, 0] = -1.0
    H = np.eye(2)
    prob = SdpProblem(c=np.array([-1.0, -1.0]), lmis=[(F, H)], G=np.array([[0.0, 1.0]]),
                      h=np.array([0.5]))
    x, rep = solve_sdp(prob, tol=1e-9)
    assert np.allclose(x, [1.0, 0.5], atol=1e-6)

"""Penalty dual decomposition for the surface block under the coupled
phase-shift model.

An auxiliary copy ``vtilde`` carries the non-convex per-element constraints
(power split on the unit circle, phases an odd multiple of ``pi/2`` apart)
while ``v`` carries the convex interference budgets.  The consensus
``vtilde = v`` is enforced by an augmented Lagrangian with dual ``tau`` and
penalty ``1/(2 eta)``.  The inner loop alternates

1. a convex QCQP in ``v``,
2. closed-form phases of ``vtilde`` (two branches ``theta_r = theta_t -/+ pi/2``),
3. closed-form amplitudes of ``vtilde``;

the outer loop updates ``tau`` when the consensus violation has shrunk
enough and strengthens the penalty otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import block_diag

from .conic import QcqpProblem, QuadConstraint, solve_qcqp, SolverError
from .report import SolveReport
from .sca import IT_REL_TOL, _as_vectors, _it_ok
from .star import Model, StarCoefficients

__all__ = [
    "PddState",
    "PddSettings",
    "PddStalled",
    "optimal_amplitudes",
    "optimal_phases",
    "update_auxiliary",
    "solve_v_step",
    "augmented_lagrangian",
    "run_pdd",
]


class PddStalled(RuntimeError):
    """The consensus violation stopped decreasing."""

    def __init__(self, message, coefficients=None, report=None):
        super().__init__(message)
        self.coefficients = coefficients
        self.report = report


@dataclass
class PddSettings:
    eta0: float = 10.0
    mu: float = 0.6
    p0: float = 0.1
    eps_bcd: float = 1e-4
    eps_pdd: float = 1e-5
    max_outer: int = 200
    max_inner: int = 50
    stall_window: int = 20
    tol: float = 1e-8
    max_tightening: int = 3


@dataclass
class PddState:
    """Primal, auxiliary and dual iterates of the penalty method.

    The auxiliary copy is stored as amplitudes/phases so the phases survive
    elements whose amplitude is zero.
    """

    v_t: np.ndarray
    v_r: np.ndarray
    rho_t: np.ndarray
    rho_r: np.ndarray
    theta_t: np.ndarray
    theta_r: np.ndarray
    tau_t: np.ndarray
    tau_r: np.ndarray
    eta: float = 10.0
    p: float = 0.1
    mu: float = 0.6
    history: list = field(default_factory=list)

    @property
    def vtilde_t(self):
        return np.sqrt(self.rho_t) * np.exp(1j * self.theta_t)

    @property
    def vtilde_r(self):
        return np.sqrt(self.rho_r) * np.exp(1j * self.theta_r)

    def violation(self):
        return float(max(np.max(np.abs(self.vtilde_t - self.v_t), initial=0.0),
                         np.max(np.abs(self.vtilde_r - self.v_r), initial=0.0)))


def optimal_amplitudes(psi_t, psi_r):
    """Maximise ``sqrt(rho_t) psi_t + sqrt(rho_r) psi_r`` (closed form).

    The four cases are tested in order: both nonpositive -> ``(0, 0)``;
    ``psi_t >= 0 >= psi_r`` -> ``(1, 0)``; ``psi_r >= 0 >= psi_t`` ->
    ``(0, 1)``; both nonnegative -> ``psi / ||psi||``.  Returns the square
    roots of the shares.  Vectorised over array inputs.
    """
    pt = np.asarray(psi_t, dtype=float)
    pr = np.asarray(psi_r, dtype=float)
    nrm = np.hypot(pt, pr)
    safe = np.where(nrm > 0, nrm, 1.0)
    st = pt / safe
    sr = pr / safe
    both_neg = (pt <= 0) & (pr <= 0)
    t_only = ~both_neg & (pt >= 0) & (pr <= 0)
    r_only = ~both_neg & ~t_only & (pr >= 0) & (pt <= 0)
    st = np.where(both_neg, 0.0, np.where(t_only, 1.0, np.where(r_only, 0.0, st)))
    sr = np.where(both_neg, 0.0, np.where(t_only, 0.0, np.where(r_only, 1.0, sr)))
    if st.ndim == 0:
        return float(st), float(sr)
    return st, sr


def _phase_objective(ups_t, ups_r, sq_t, sq_r, th_t, th_r):
    return (sq_t * np.real(np.conj(ups_t) * np.exp(1j * th_t))
            + sq_r * np.real(np.conj(ups_r) * np.exp(1j * th_r)))


def optimal_phases(upsilon_t, upsilon_r, sqrt_rho):
    """Best coupled phases for fixed amplitudes.

    For each branch ``theta_r = theta_t - pi/2`` and ``theta_r = theta_t + pi/2``
    the objective reduces to ``c1 cos(theta_t) + c2 sin(theta_t)``, maximised
    at ``theta_t = atan2(c2, c1)`` (``0`` when ``c1 = c2 = 0``).  The branch
    with the larger value of ``sum_i sqrt(rho_i) Re(conj(ups_i) e^{j theta_i})``
    is returned.  Vectorised over array inputs.
    """
    ut = np.asarray(upsilon_t, dtype=complex)
    ur = np.asarray(upsilon_r, dtype=complex)
    st = np.asarray(sqrt_rho[0], dtype=float)
    sr = np.asarray(sqrt_rho[1], dtype=float)
    a_t, b_t, a_r, b_r = ut.real, ut.imag, ur.real, ur.imag
    # branch theta_r = theta_t - pi/2
    c1 = st * a_t - sr * b_r
    c2 = st * b_t + sr * a_r
    th_m = np.where((c1 == 0) & (c2 == 0), 0.0, np.arctan2(c2, c1))
    # branch theta_r = theta_t + pi/2
    h1 = st * a_t + sr * b_r
    h2 = st * b_t - sr * a_r
    th_p = np.where((h1 == 0) & (h2 == 0), 0.0, np.arctan2(h2, h1))
    obj_m = _phase_objective(ut, ur, st, sr, th_m, th_m - np.pi / 2)
    obj_p = _phase_objective(ut, ur, st, sr, th_p, th_p + np.pi / 2)
    use_p = obj_p > obj_m
    th_t = np.where(use_p, th_p, th_m)
    th_r = np.where(use_p, th_p + np.pi / 2, th_m - np.pi / 2)
    th_t = np.mod(th_t, 2 * np.pi)
    th_r = np.mod(th_r, 2 * np.pi)
    if th_t.ndim == 0:
        return float(th_t), float(th_r)
    return th_t, th_r


def update_auxiliary(state: PddState, freeze_amplitudes=False):
    """One phase sweep followed by one amplitude sweep on every element.

    Elements whose current amplitudes are both zero have a flat phase
    objective; their phases are kept rather than reset.  With
    ``freeze_amplitudes`` only the phases are updated.
    """
    ups_t = state.v_t - state.eta * state.tau_t
    ups_r = state.v_r - state.eta * state.tau_r
    sq = (np.sqrt(state.rho_t), np.sqrt(state.rho_r))
    th_t, th_r = optimal_phases(ups_t, ups_r, sq)
    dead = (state.rho_t == 0) & (state.rho_r == 0)
    state.theta_t = np.where(dead, state.theta_t, th_t)
    state.theta_r = np.where(dead, state.theta_r, th_r)
    if freeze_amplitudes:
        return state
    psi_t = np.real(np.conj(ups_t) * np.exp(1j * state.theta_t))
    psi_r = np.real(np.conj(ups_r) * np.exp(1j * state.theta_r))
    st, sr = optimal_amplitudes(psi_t, psi_r)
    state.rho_t = st ** 2
    state.rho_r = sr ** 2
    return state


def augmented_lagrangian(sub, state: PddState):
    """Value of the inner-loop objective for the current iterates."""
    val = sub.objective(state.v_t, state.v_r)
    for vt, v, tau in ((state.vtilde_t, state.v_t, state.tau_t),
                       (state.vtilde_r, state.v_r, state.tau_r)):
        val += np.real(np.vdot(vt - v + state.eta * tau, vt - v + state.eta * tau)) / (2 * state.eta)
    return float(val)


def solve_v_step(sub, state: PddState, tol=1e-8):
    """Minimise the augmented Lagrangian over ``v`` subject to the budgets.

    Returns the new ``(v_t, v_r)`` (the state is not modified).
    """
    N = sub.N
    eta = state.eta
    I = np.eye(N)
    P0 = block_diag(sub.C_t + I / (2 * eta), sub.C_r + I / (2 * eta))
    target_t = state.vtilde_t + eta * state.tau_t
    target_r = state.vtilde_r + eta * state.tau_r
    q0 = np.concatenate([sub.c_t + target_t / (2 * eta), sub.c_r + target_r / (2 * eta)])
    cons = []
    Z = np.zeros((N, N))
    z = np.zeros(N)
    for k in range(sub.K):
        if sub.pu_side[k] == "t":
            P = block_diag(sub.B_k[k], Z)
            q = np.concatenate([sub.b_k[k], z])
        else:
            P = block_diag(Z, sub.B_k[k])
            q = np.concatenate([z, sub.b_k[k]])
        cons.append(QuadConstraint(P, q, float(sub.Gamma_hat_k[k])))
    x, _ = solve_qcqp(QcqpProblem(P0, q0, cons, blocks=[N, N]), tol=tol)
    return x[0], x[1]


def _initial_state(v_t, v_r, settings):
    N = v_t.size
    rt = np.abs(v_t) ** 2
    rr = np.abs(v_r) ** 2
    s = rt + rr
    s = np.where(s > 0, s, 1.0)
    return PddState(v_t=v_t.copy(), v_r=v_r.copy(), rho_t=rt / s, rho_r=rr / s,
                    theta_t=np.angle(v_t), theta_r=np.angle(v_r),
                    tau_t=np.zeros(N, complex), tau_r=np.zeros(N, complex),
                    eta=settings.eta0, p=settings.p0, mu=settings.mu)


def _terminal(state: PddState):
    """Coefficients from the auxiliary copy, projected onto ``rho_t + rho_r = 1``."""
    rt, rr = state.rho_t.copy(), state.rho_r.copy()
    s = rt + rr
    dead = s <= 1e-12
    # zero-amplitude elements take the split suggested by the primal copy
    pt = np.abs(state.v_t) ** 2
    pr = np.abs(state.v_r) ** 2
    ps = pt + pr
    fallback_t = np.where(ps > 0, pt / np.where(ps > 0, ps, 1.0), 0.5)
    rt = np.where(dead, fallback_t, rt / np.where(dead, 1.0, s))
    rr = 1.0 - rt
    return StarCoefficients(rt, rr, state.theta_t, state.theta_r, Model.COUPLED)


def _pdd_loop(nsub, v0_t, v0_r, st, freeze_amplitudes, unit, report):
    """Outer/inner PDD iterations from ``v0``; traces go to ``report`` in original units."""
    state = _initial_state(v0_t, v0_r, st)
    update_auxiliary(state, freeze_amplitudes)
    report.objective.append(augmented_lagrangian(nsub, state) * unit)
    report.violation.append(state.violation())
    best_viol = np.inf
    since_best = 0
    reason = "max-iters"
    for outer in range(st.max_outer):
        al = [augmented_lagrangian(nsub, state)]
        for _ in range(st.max_inner):
            try:
                state.v_t, state.v_r = solve_v_step(nsub, state, st.tol)
            except SolverError as exc:
                raise type(exc)(f"PDD outer {outer}: {exc}", exc.report) from exc
            update_auxiliary(state, freeze_amplitudes)
            al.append(augmented_lagrangian(nsub, state))
            if abs(al[-2] - al[-1]) <= st.eps_bcd * max(abs(al[-2]), 1e-12):
                break
        report.inner.append([a * unit for a in al])
        viol = state.violation()
        if viol <= state.p:
            state.tau_t = state.tau_t + (state.vtilde_t - state.v_t) / state.eta
            state.tau_r = state.tau_r + (state.vtilde_r - state.v_r) / state.eta
        else:
            state.eta *= state.mu
        state.p = 0.9 * viol
        report.objective.append(al[-1] * unit)
        report.violation.append(viol)
        if viol <= st.eps_pdd:
            reason = "converged"
            break
        if viol < best_viol * (1 - 1e-9):
            best_viol, since_best = viol, 0
        else:
            since_best += 1
            if since_best >= st.stall_window:
                reason = "stalled"
                break
    return state, reason, best_viol


def run_pdd(sub, v_init, eps_bcd=1e-4, eps_pdd=1e-5, settings: PddSettings | None = None,
            freeze_amplitudes=False):
    """Optimise coupled-model surface coefficients.

    Parameters
    ----------
    sub : VSubproblem
    v_init : StarCoefficients, StarVectors or pair of arrays
        Start point, feasible for the interference budgets.
    eps_bcd, eps_pdd : float
        Inner-loop fractional-change and outer-loop violation thresholds.
    freeze_amplitudes : bool
        Keep the power shares of ``v_init`` and optimise phases only.

    Returns
    -------
    StarCoefficients
        Coupled-feasible coefficients (never worse than a coupled-feasible
        ``v_init`` on the subproblem objective).
    SolveReport
        ``objective`` holds the augmented Lagrangian after each outer
        iteration, ``violation`` the consensus gap ``max |vtilde - v|``,
        ``inner`` the per-outer-iteration inner traces.

    Raises
    ------
    PddStalled
        If the violation fails to improve for ``stall_window`` outer
        iterations; the exception carries the best coefficients found.
    """
    st = settings or PddSettings()
    st = PddSettings(**{**st.__dict__, "eps_bcd": eps_bcd, "eps_pdd": eps_pdd})
    report = SolveReport(name="pdd")
    v0_t, v0_r = _as_vectors(v_init)
    if not _it_ok(sub, v0_t, v0_r, rel=1e-5):
        report.finish("infeasible", "starting point violates the interference budgets")
        raise ValueError("v_init violates the interference budgets")
    f_init = sub.objective(v0_t, v0_r)
    frozen = None
    if freeze_amplitudes and isinstance(v_init, StarCoefficients):
        # exact shares; squaring |v| would perturb them by rounding
        frozen = (np.array(v_init.rho_t, float), np.array(v_init.rho_r, float))
    rho0 = frozen or (np.abs(v0_t) ** 2, np.abs(v0_r) ** 2)
    init_coeff = StarCoefficients(rho0[0], rho0[1], np.angle(v0_t), np.angle(v0_r),
                                  Model.COUPLED)
    lam = max(np.linalg.eigvalsh(sub.C_t).max(initial=0.0),
              np.linalg.eigvalsh(sub.C_r).max(initial=0.0))
    scale = max(lam, np.linalg.norm(sub.c_t), np.linalg.norm(sub.c_r))
    nsub = sub.scaled(1.0 / scale) if scale > 0 else sub
    init_coupled = not np.any(np.abs(np.cos(init_coeff.theta_t - init_coeff.theta_r)) > 1e-6)
    unit = scale if scale > 0 else 1.0
    margin = np.zeros(sub.K)
    for attempt in range(st.max_tightening + 1):
        if attempt:
            report.objective.clear()
            report.violation.clear()
            report.inner.clear()
        # budgets tightened by ``margin`` so the projected point lands inside the true ones
        state, reason, best_viol = _pdd_loop(nsub.tightened(margin), v0_t, v0_r, st,
                                             freeze_amplitudes, unit, report)
        out = _terminal(state)
        if frozen is not None:
            out = StarCoefficients(frozen[0], frozen[1], out.theta_t, out.theta_r,
                                   Model.COUPLED)
        vt = out.vectors()
        ok = _it_ok(sub, vt.v_t, vt.v_r)
        if ok or reason == "stalled" or attempt == st.max_tightening:
            break
        excess = -sub.it_slack(vt.v_t, vt.v_r)
        floor = IT_REL_TOL * np.abs(sub.Gamma_hat_k)
        margin = margin + 2.0 * np.maximum(excess, floor) * (excess > -floor)
        report.notes.append(f"projected point exceeds a budget; retry {attempt + 1} "
                            f"with margins {np.array2string(margin, precision=3)}")
    f_out = sub.objective(vt.v_t, vt.v_r)
    report.extra.update({"f_init": f_init, "f_final": f_out, "it_ok": ok, "scale": scale,
                         "margin": margin})
    if init_coupled and (not ok or f_out > f_init):
        report.notes.append("PDD result not better than the start point; start point kept")
        out = init_coeff
    report.phase_diff.append(np.mod(out.theta_t - out.theta_r, 2 * np.pi))
    if reason == "stalled":
        report.finish("stalled", f"violation stuck at {best_viol:.2e}")
        raise PddStalled(report.message, out, report)
    report.finish(reason)
    return out, report

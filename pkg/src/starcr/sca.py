"""Successive convex approximation for the surface block under the
independent phase-shift model.

The surface subproblem is

    min_v  sum_i v_i^H C_i v_i - 2 Re(c_i^H v_i)
    s.t.   |v_t[n]|^2 + |v_r[n]|^2 = 1,   IT_k(v) <= Gamma_hat_k.

Each side is lifted to ``Vbar_i = [[V_i, v_i], [v_i^H, 1]] >= 0``, which
turns the objective, the unit-modulus equalities ``diag(V_t + V_r) = 1`` and
the interference budgets into linear functions of ``Vbar``.  The lift is
exact when ``V_i = v_i v_i^H``, i.e. when ``tr V_i - ||v_i||^2 = 0``.  That
rank-one gap is nonnegative and is driven to zero by a penalty
``xi (tr V - ||v||^2)`` whose concave part ``-||v||^2`` is replaced by its
first-order Taylor lower bound at the current iterate.  Every SDP therefore
minimises a convex majoriser of the merit

    M(V, v) = tr(C V) - 2 Re(c^H v) + xi (tr V - ||v||^2),

so ``M`` is non-increasing along the iterates and equals the true objective
at rank-one points.
"""

from __future__ import annotations

import numpy as np

from .conic import HermitianSdpBuilder, SolverError, solve_sdp
from .report import SolveReport
from .star import Model, StarCoefficients, StarVectors, from_vectors

__all__ = ["taylor_lower_bound", "solve_phi_independent", "LiftedSurfaceSdp",
           "project_to_unit_pairs", "IT_REL_TOL"]

IT_REL_TOL = 1e-6


def taylor_lower_bound(v, v_ref):
    """First-order lower bound ``2 Re(v_ref^H v) - ||v_ref||^2`` of ``||v||^2``.

    Tight at ``v = v_ref``; never exceeds ``||v||^2`` because the squared
    norm is convex.
    """
    v = np.asarray(v)
    v_ref = np.asarray(v_ref)
    if v.shape != v_ref.shape:
        raise ValueError("v and v_ref must have equal shapes")
    return float(2 * np.real(np.vdot(v_ref, v)) - np.real(np.vdot(v_ref, v_ref)))


def project_to_unit_pairs(v_t, v_r, fallback_t=None, fallback_r=None, rho=None):
    """Scale each pair ``(v_t[n], v_r[n])`` onto the unit circle.

    With ``rho = (rho_t, rho_r)`` amplitudes are reset to ``sqrt(rho)`` and
    only the phases of ``v`` are kept.  Elements whose entries vanish take
    their phase from the fallback vectors.
    """
    v_t = np.asarray(v_t, dtype=complex).copy()
    v_r = np.asarray(v_r, dtype=complex).copy()
    ft = np.ones_like(v_t) if fallback_t is None else np.asarray(fallback_t)
    fr = np.ones_like(v_r) if fallback_r is None else np.asarray(fallback_r)
    ph_t = np.where(np.abs(v_t) > 1e-12, v_t, ft)
    ph_r = np.where(np.abs(v_r) > 1e-12, v_r, fr)
    ph_t = np.exp(1j * np.angle(ph_t))
    ph_r = np.exp(1j * np.angle(ph_r))
    if rho is not None:
        return np.sqrt(rho[0]) * ph_t, np.sqrt(rho[1]) * ph_r
    nrm = np.sqrt(np.abs(v_t) ** 2 + np.abs(v_r) ** 2)
    zero = nrm <= 1e-12
    safe = np.where(zero, 1.0, nrm)
    at = np.where(zero, np.sqrt(0.5), np.abs(v_t) / safe)
    ar = np.where(zero, np.sqrt(0.5), np.abs(v_r) / safe)
    return at * ph_t, ar * ph_r


class LiftedSurfaceSdp:
    """Penalised lifted SDP for one surface subproblem.

    Parameters
    ----------
    sub : VSubproblem
        Problem data, already scaled to O(1) objective magnitude.
    rho : pair of arrays or None
        Frozen power shares; ``None`` leaves them free subject to
        ``rho_t + rho_r = 1``.  Elements with a frozen zero share are removed
        from that side's lifted block.
    """

    def __init__(self, sub, rho=None):
        self.sub = sub
        N = sub.N
        self.N = N
        self.rho = rho
        if rho is None:
            self.idx = {"t": np.arange(N), "r": np.arange(N)}
        else:
            self.idx = {s: np.flatnonzero(np.asarray(r) > 0) for s, r in zip("tr", rho)}
        b = HermitianSdpBuilder()
        self.blk = {}
        for s in "tr":
            if self.idx[s].size:
                self.blk[s] = b.add_hermitian(self.idx[s].size + 1)
        self.builder = b
        pos = {s: {int(n): a for a, n in enumerate(self.idx[s])} for s in "tr"}
        for n in range(N):
            row = np.zeros(b.n)
            terms = [(s, pos[s][n]) for s in "tr" if n in pos[s]]
            if rho is None:
                for s, a in terms:
                    row += b.entry_real(self.blk[s], a, a)
                b.add_eq(row, 1.0)
            else:
                for s, a in terms:
                    b.add_eq(b.entry_real(self.blk[s], a, a),
                             float(rho[0 if s == "t" else 1][n]))
        for s, blk in self.blk.items():
            m = self.idx[s].size
            b.add_eq(b.entry_real(blk, m, m), 1.0)
        for k in range(sub.K):
            s = sub.pu_side[k]
            if s not in self.blk or not np.isfinite(sub.Gamma_hat_k[k]):
                # no active element on this side, or no budget at all
                continue
            ii = self.idx[s]
            R = self._lift(sub.B_k[k][np.ix_(ii, ii)], sub.b_k[k][ii])
            scale = max(np.abs(R).max(initial=0.0), abs(sub.Gamma_hat_k[k]), 1e-300)
            b.add_le(b.linear_form(self.blk[s], R / scale), sub.Gamma_hat_k[k] / scale)
        self._obj_base = np.zeros(b.n)
        self._sdp = None

    @staticmethod
    def _lift(Q, q):
        m = Q.shape[0]
        R = np.zeros((m + 1, m + 1), dtype=complex)
        R[:m, :m] = Q
        R[:m, m] = q
        R[m, :m] = q.conj()
        return R

    def solve(self, v_ref_t, v_ref_r, xi, tol):
        """Minimise the majoriser at ``v_ref``; return ``(v_t, v_r, V_t, V_r, report)``."""
        b = self.builder
        sub = self.sub
        coef = np.zeros(b.n)
        for s, blk in self.blk.items():
            ii = self.idx[s]
            vref = (v_ref_t if s == "t" else v_ref_r)[ii]
            lin = sub.c(s)[ii] + xi * vref
            coef += b.linear_form(blk, self._lift(sub.C(s)[np.ix_(ii, ii)], -lin))
        if self._sdp is None:
            self._sdp = b.build()
        self._sdp.c = coef
        x, rep = solve_sdp(self._sdp, tol=tol)
        mats = b.unpack(x)
        out = {}
        for s in "tr":
            v = np.zeros(self.N, dtype=complex)
            V = np.zeros((self.N, self.N), dtype=complex)
            if s in self.blk:
                M = mats[self.blk[s]]
                ii = self.idx[s]
                m = ii.size
                v[ii] = M[:m, m]
                V[np.ix_(ii, ii)] = M[:m, :m]
            out[s] = (v, V)
        return out["t"][0], out["r"][0], out["t"][1], out["r"][1], rep


def _merit(sub, v_t, v_r, V_t, V_r, xi):
    val = 0.0
    for s, v, V in (("t", v_t, V_t), ("r", v_r, V_r)):
        val += (np.real(np.trace(sub.C(s) @ V)) - 2 * np.real(np.vdot(sub.c(s), v))
                + xi * (np.real(np.trace(V)) - np.real(np.vdot(v, v))))
    return float(val)


def _it_ok(sub, v_t, v_r, rel=IT_REL_TOL):
    if sub.K == 0:
        return True
    lhs = np.array([sub.it_lhs(k, v_t, v_r) for k in range(sub.K)])
    slack = sub.Gamma_hat_k - lhs
    tol = rel * (np.abs(sub.Gamma_hat_k) + np.abs(lhs)) + 1e-300
    return bool(np.all(slack >= -tol))


def _as_vectors(v_init):
    if isinstance(v_init, StarCoefficients):
        v = v_init.vectors()
        return v.v_t.copy(), v.v_r.copy()
    if isinstance(v_init, StarVectors):
        return v_init.v_t.copy(), v_init.v_r.copy()
    v_t, v_r = v_init
    return np.asarray(v_t, dtype=complex).copy(), np.asarray(v_r, dtype=complex).copy()


def solve_phi_independent(sub, v_init, eps_sca=1e-3, max_iter=50, rho=None,
                          xi_factor=1e-3, tol=1e-8, rank_tol=1e-4, max_escalations=4,
                          model=Model.INDEPENDENT):
    """Optimise the surface coefficients by penalised lifted SCA.

    Parameters
    ----------
    sub : VSubproblem
    v_init : StarCoefficients, StarVectors or pair of arrays
        Starting point; must satisfy the interference budgets.
    eps_sca : float
        Stop when the merit decreases by less than this fraction.
    rho : pair of arrays, optional
        Freeze the power shares (conventional-surface and equal-split
        baselines); only phases are optimised then.
    xi_factor : float
        Penalty weight relative to the objective curvature.  The majoriser
        behaves like a proximal step of this weight, so a small value moves
        fast; whenever the lifted solution is not rank one (gap above
        ``rank_tol``) the solve is repeated with ten times the weight, at most
        ``max_escalations`` times.

    Returns
    -------
    StarCoefficients
        Best feasible point found (never worse than ``v_init``).
    SolveReport
        ``objective`` holds the merit trace in the units of ``sub``.
    """
    v0_t, v0_r = _as_vectors(v_init)
    if rho is not None:
        rho = (np.asarray(rho[0], float), np.asarray(rho[1], float))
    report = SolveReport(name="sca")
    if not _it_ok(sub, v0_t, v0_r, rel=1e-5):
        report.finish("infeasible", "starting point violates the interference budgets")
        raise ValueError("v_init violates the interference budgets")
    f_init = sub.objective(v0_t, v0_r)
    lam = max(np.linalg.eigvalsh(sub.C_t).max(initial=0.0),
              np.linalg.eigvalsh(sub.C_r).max(initial=0.0))
    scale = max(lam, np.linalg.norm(sub.c_t), np.linalg.norm(sub.c_r))
    if scale <= 0.0:
        report.objective = [f_init, f_init]
        report.finish("converged", "objective identically zero")
        return from_vectors(v0_t, v0_r, model, normalise=rho is None), report
    nsub = sub.scaled(1.0 / scale)
    lifted = LiftedSurfaceSdp(nsub, rho)

    def run(xi):
        trace = [nsub.objective(v0_t, v0_r)]
        cur_t, cur_r = v0_t, v0_r
        rank_gap = 0.0
        cands = []
        reason = "max-iters"
        for it in range(max_iter):
            try:
                vt, vr, Vt, Vr, _ = lifted.solve(cur_t, cur_r, xi, tol)
            except SolverError as exc:
                raise type(exc)(f"SCA iteration {it}: {exc}", exc.report) from exc
            m = _merit(nsub, vt, vr, Vt, Vr, xi)
            trace.append(m)
            rank_gap = (np.linalg.norm(Vt - np.outer(vt, vt.conj()))
                        + np.linalg.norm(Vr - np.outer(vr, vr.conj())))
            cands.append((vt, vr))
            cur_t, cur_r = vt, vr
            if trace[-2] - trace[-1] <= eps_sca * abs(trace[-2]):
                reason = "converged"
                break
        return trace, cur_t, cur_r, rank_gap, cands, reason

    xi = xi_factor * max(lam / scale, 1e-2)
    trace, vt, vr, rank_gap, cands, reason = run(xi)
    for _ in range(max_escalations):
        if rank_gap <= rank_tol:
            break
        report.notes.append(f"rank gap {rank_gap:.2e} at xi={xi:.3g}; retrying")
        xi *= 10.0
        trace, vt, vr, rank_gap, cands, reason = run(xi)
    report.notes.append(f"xi={xi:.3g} rank_gap={rank_gap:.2e}")
    report.objective = [t * scale for t in trace]

    # project candidates back onto the feasible set, keep the best feasible one
    best = (f_init, v0_t, v0_r)
    for ct, cr in reversed(cands):
        pt, pr = project_to_unit_pairs(ct, cr, v0_t, v0_r, rho)
        if _it_ok(sub, pt, pr):
            f = sub.objective(pt, pr)
            if f < best[0]:
                best = (f, pt, pr)
    report.extra.update({"rank_gap": rank_gap, "xi": xi, "f_init": f_init, "f_final": best[0],
                         "scale": scale})
    report.finish(reason)
    if rho is not None:
        out = StarCoefficients(rho[0], rho[1], np.angle(best[1]), np.angle(best[2]), model)
        return out, report
    return from_vectors(best[1], best[2], model), report

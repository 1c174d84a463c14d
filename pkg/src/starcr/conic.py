"""Dense small-scale convex solvers.

Two entry points are provided:

* :func:`solve_qcqp` for complex quadratically constrained quadratic programs
  of the form ``min x^H P0 x - 2 Re(q0^H x)`` subject to
  ``x^H Pi x + 2 Re(qi^H x) <= ri``.
* :func:`solve_sdp` for real semidefinite programs with LMI blocks, linear
  inequalities and linear equalities.

Both are realified and handed to the primal-dual path-following interior
point method of ``cvxopt``.  Complex vectors map to ``[Re x; Im x]`` and
Hermitian matrices to ``[[Re P, -Im P], [Im P, Re P]]``, which preserves
Hermitian quadratic forms exactly.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import cvxopt
from cvxopt import solvers

DEFAULT_TOL = 1e-7
DEFAULT_MAX_ITER = 200
PHASE1_RADIUS = 1e4


class SolverError(RuntimeError):
    """Base class for conic solver failures."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class Infeasible(SolverError):
    """Phase-1 could not find a point satisfying the constraints."""


class MaxIterations(SolverError):
    """The interior point method hit its iteration cap."""


class NumericalBreakdown(SolverError):
    """The KKT system became singular or the iterates lost accuracy."""


@dataclass
class SolverReport:
    status: str
    iterations: int
    objective: float
    kkt_residual: float = np.nan
    stationarity: float = np.nan
    primal_infeasibility: float = np.nan
    dual_infeasibility: float = np.nan
    complementarity: float = np.nan
    gap: float = np.nan
    multipliers: np.ndarray | None = None
    wall_time: float = 0.0


# ---------------------------------------------------------------------------
# realification helpers
# ---------------------------------------------------------------------------

def realify_vector(x):
    x = np.asarray(x)
    return np.concatenate([x.real, x.imag])


def complexify_vector(y):
    y = np.asarray(y, dtype=float)
    n = y.size // 2
    return y[:n] + 1j * y[n:]


def realify_matrix(P):
    P = np.asarray(P)
    Pr, Pi = P.real, P.imag
    return np.block([[Pr, -Pi], [Pi, Pr]])


def hermitian_part(P):
    P = np.asarray(P)
    return 0.5 * (P + P.conj().T)


# ---------------------------------------------------------------------------
# QCQP
# ---------------------------------------------------------------------------

@dataclass
class QuadConstraint:
    """``x^H P x + 2 Re(q^H x) <= r``; ``P`` may be ``None`` for linear rows."""

    P: np.ndarray | None
    q: np.ndarray | None
    r: float


@dataclass
class QcqpProblem:
    """Complex QCQP over a stacked variable split into ``blocks``.

    ``blocks`` lists the lengths of the consecutive sub-vectors (e.g. one per
    beamformer); it only affects how the solution is returned.
    """

    P0: np.ndarray
    q0: np.ndarray
    constraints: list[QuadConstraint] = field(default_factory=list)
    blocks: Sequence[int] | None = None

    @property
    def n(self):
        return self.P0.shape[0]

    def objective(self, x):
        x = np.asarray(x).ravel()
        return float(np.real(np.vdot(x, self.P0 @ x)) - 2 * np.real(np.vdot(self.q0, x)))

    def constraint_values(self, x):
        """Return ``g_i(x) - r_i`` for every constraint (feasible iff <= 0)."""
        x = np.asarray(x).ravel()
        out = np.empty(len(self.constraints))
        for i, c in enumerate(self.constraints):
            val = 0.0
            if c.P is not None:
                val += np.real(np.vdot(x, c.P @ x))
            if c.q is not None:
                val += 2 * np.real(np.vdot(c.q, x))
            out[i] = val - c.r
        return out

    def split(self, x):
        if not self.blocks:
            return [x]
        idx = np.cumsum(self.blocks)[:-1]
        return np.split(x, idx)


def _psd_factor(P, rel_tol=1e-13):
    """Return ``F`` with ``F.T @ F == P`` for a real symmetric PSD ``P``."""
    lam, U = np.linalg.eigh(0.5 * (P + P.T))
    top = max(lam.max(initial=0.0), 0.0)
    keep = lam > rel_tol * max(top, 1e-300)
    return (np.sqrt(lam[keep])[:, None] * U[:, keep].T)


def _cvx(a):
    return cvxopt.matrix(np.ascontiguousarray(a, dtype=float))


@dataclass
class _RealQcqp:
    P0: np.ndarray
    q0: np.ndarray
    quad: list  # (P, q, r, F)
    lin: list  # (q, r)
    x_scale: float


def _normalise_qcqp(prob: QcqpProblem, x_scale: float) -> _RealQcqp:
    """Realify and rescale rows so that all data is O(1)."""
    P0 = realify_matrix(hermitian_part(prob.P0)) * x_scale**2
    q0 = realify_vector(prob.q0) * x_scale
    s0 = max(np.abs(P0).max(initial=0.0), np.abs(q0).max(initial=0.0))
    if s0 > 0:
        P0, q0 = P0 / s0, q0 / s0
    quad, lin = [], []
    for c in prob.constraints:
        if not np.isfinite(c.r):
            continue
        q = realify_vector(c.q) * x_scale if c.q is not None else np.zeros(2 * prob.n)
        P = (realify_matrix(hermitian_part(c.P)) * x_scale**2
             if c.P is not None else None)
        scale = max(np.abs(q).max(initial=0.0),
                    np.abs(P).max(initial=0.0) if P is not None else 0.0,
                    abs(c.r))
        if scale == 0:
            scale = 1.0
        r = c.r / scale
        q = q / scale
        if P is not None and np.abs(P).max(initial=0.0) > 0:
            P = P / scale
            quad.append((P, q, r, _psd_factor(P)))
        else:
            lin.append((q, r))
    return _RealQcqp(P0, q0, quad, lin, x_scale)


def _cone_data(rp: _RealQcqp, n, slack=False):
    """Inequalities ``G x + s = h`` with the linear rows first, then SOCs.

    With ``slack`` an extra last variable ``s`` relaxes every constraint to
    ``g_i(x) - r_i <= s`` (phase-1 form).
    """
    nv = n + (1 if slack else 0)
    Gl, hl = [], []
    for q, r in rp.lin:
        row = np.zeros(nv)
        row[:n] = 2 * q
        if slack:
            row[n] = -1.0
        Gl.append(row)
        hl.append(r)
    Gq, hq, dims_q = [], [], []
    for P, q, r, F in rp.quad:
        k = F.shape[0]
        G = np.zeros((k + 2, nv))
        h = np.zeros(k + 2)
        # ||(2 F x, t - 1)|| <= t + 1 with t = r - 2 q^T x (+ s)
        G[0, :n] = 2 * q
        G[1:k + 1, :n] = -2 * F
        G[k + 1, :n] = 2 * q
        if slack:
            G[0, n] = -1.0
            G[k + 1, n] = -1.0
        h[0] = r + 1.0
        h[k + 1] = r - 1.0
        Gq.append(G)
        hq.append(h)
        dims_q.append(k + 2)
    G = np.vstack(Gl + Gq) if (Gl or Gq) else np.zeros((0, nv))
    h = np.concatenate([np.asarray(hl, dtype=float)] + hq) if (Gl or Gq) else np.zeros(0)
    dims = {"l": len(Gl), "q": dims_q, "s": []}
    return G, h, dims


def _solver_options(tol, max_iter):
    return {"show_progress": False, "abstol": tol, "reltol": tol,
            "feastol": tol, "maxiters": max_iter, "refinement": 2}


def _phase1(rp: _RealQcqp, n, tol, max_iter):
    """Minimise the largest constraint violation; returns the optimal slack."""
    G, h, dims = _cone_data(rp, n, slack=True)
    # bound the slack from below so the LP is bounded
    G = np.vstack([np.eye(1, n + 1, n) * -1.0, G])
    h = np.concatenate([[1.0], h])
    # a generous norm ball keeps [G; A] full column rank when the
    # constraints do not involve every coordinate
    ball = np.zeros((n + 1, n + 1))
    ball[1:, :n] = -np.eye(n)
    G = np.vstack([G, ball])
    h = np.concatenate([h, [PHASE1_RADIUS], np.zeros(n)])
    dims = {"l": dims["l"] + 1, "q": dims["q"] + [n + 1], "s": []}
    c = np.zeros(n + 1)
    c[n] = 1.0
    sol = solvers.conelp(_cvx(c), _cvx(G), _cvx(h), dims,
                         options=_solver_options(tol, max_iter))
    if sol["x"] is None:
        return np.inf
    return float(np.array(sol["x"]).ravel()[n])


def _qcqp_kkt(rp: _RealQcqp, x, lam_lin, lam_quad):
    grad = 2 * rp.P0 @ x - 2 * rp.q0
    scale = 1.0 + np.abs(2 * rp.q0).max(initial=0.0)
    prim, comp = 0.0, 0.0
    for (q, r), lam in zip(rp.lin, lam_lin):
        g = 2 * q @ x - r
        grad = grad + lam * 2 * q
        prim = max(prim, g / (1 + abs(r)))
        comp = max(comp, abs(lam * g))
    for (P, q, r, _), lam in zip(rp.quad, lam_quad):
        g = x @ P @ x + 2 * q @ x - r
        grad = grad + lam * (2 * P @ x + 2 * q)
        prim = max(prim, g / (1 + abs(r)))
        comp = max(comp, abs(lam * g))
    lam_all = np.concatenate([lam_lin, lam_quad])
    dual = max(0.0, -lam_all.min(initial=0.0))
    stat = np.abs(grad).max(initial=0.0) / scale
    return stat, max(prim, 0.0), dual, comp


def _newton_kkt(rp: _RealQcqp, x, lam_lin, lam_quad, act_lin, act_quad, iters):
    """Newton iterations on ``grad L = 0, g_A(x) = 0`` for one active set."""
    n = x.size
    m = len(act_lin) + len(act_quad)
    best = (np.inf, x, lam_lin, lam_quad)
    xk = x.copy()
    lk = np.concatenate([lam_lin[act_lin], lam_quad[act_quad]])
    for _ in range(iters):
        H = 2 * rp.P0.copy()
        grad = 2 * rp.P0 @ xk - 2 * rp.q0
        Jg = np.zeros((m, n))
        g = np.zeros(m)
        for a, i in enumerate(act_lin):
            q, r = rp.lin[i]
            Jg[a] = 2 * q
            g[a] = 2 * q @ xk - r
        for b, i in enumerate(act_quad):
            P, q, r, _ = rp.quad[i]
            a = len(act_lin) + b
            Jg[a] = 2 * P @ xk + 2 * q
            g[a] = xk @ P @ xk + 2 * q @ xk - r
            H = H + 2 * lk[a] * P
        grad = grad + Jg.T @ lk
        K = np.block([[H, Jg.T], [Jg, np.zeros((m, m))]])
        rhs = -np.concatenate([grad, g])
        try:
            step = np.linalg.lstsq(K, rhs, rcond=None)[0]
        except np.linalg.LinAlgError:
            break
        xk = xk + step[:n]
        lk = lk + step[n:]
        ll = np.zeros_like(lam_lin)
        lq = np.zeros_like(lam_quad)
        ll[act_lin] = lk[:len(act_lin)]
        lq[act_quad] = lk[len(act_lin):]
        res = max(_qcqp_kkt(rp, xk, ll, lq))
        if res < best[0]:
            best = (res, xk.copy(), ll, lq)
        if res < 1e-14:
            break
    return best


def _polish(rp: _RealQcqp, x, lam_lin, lam_quad, iters=8, max_enum=6):
    """Refine an interior point solution by Newton steps on the KKT system.

    Interior point iterates stop at a small but nonzero barrier parameter,
    which leaves weakly active constraints ambiguous.  Every candidate active
    set drawn from the constraints that are nearly tight or carry a
    non-negligible multiplier is tried (exhaustively when there are at most
    ``max_enum`` of them), and the point with the smallest KKT residual wins.
    The interior point solution itself is kept if nothing improves on it.
    """
    from itertools import combinations

    n_lin = len(lam_lin)
    lam_all = np.concatenate([lam_lin, lam_quad])
    best = (max(_qcqp_kkt(rp, x, lam_lin, lam_quad)), x, lam_lin, lam_quad)
    if best[0] < 1e-14:
        return best[1], best[2], best[3]
    gvals = []
    for q, r in rp.lin:
        gvals.append(2 * q @ x - r)
    for P, q, r, _ in rp.quad:
        gvals.append(x @ P @ x + 2 * q @ x - r)
    gvals = np.asarray(gvals)
    lam_thresh = 1e-9 * (1.0 + lam_all.max(initial=0.0))
    candidates = [i for i in range(lam_all.size)
                  if lam_all[i] > lam_thresh or abs(gvals[i]) < 1e-4]
    sure = [i for i in candidates if lam_all[i] > 1e-3 * (1.0 + lam_all.max(initial=0.0))]
    unsure = [i for i in candidates if i not in sure]
    if len(unsure) > max_enum:
        subsets = [tuple(i for i in candidates if lam_all[i] > 1e-7 * (1.0 + lam_all.max()))]
    else:
        subsets = [tuple(sure) + c for k in range(len(unsure) + 1)
                   for c in combinations(unsure, k)]
    for act in subsets:
        act_lin = [i for i in act if i < n_lin]
        act_quad = [i - n_lin for i in act if i >= n_lin]
        cand = _newton_kkt(rp, x, lam_lin, lam_quad, act_lin, act_quad, iters)
        if cand[0] < best[0]:
            best = cand
    return best[1], best[2], best[3]


def solve_qcqp(prob: QcqpProblem, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER,
               x_scale=1.0, kkt_fail=1e-5):
    """Solve a complex QCQP.

    Parameters
    ----------
    prob : QcqpProblem
        Problem data. All ``P`` must be Hermitian PSD.
    tol : float
        Interior point tolerance.  The KKT residual reported afterwards is
        measured on the row-normalised problem after an active-set Newton
        polish and is typically far below ``tol``.
    kkt_fail : float
        A residual above this raises :class:`NumericalBreakdown` (or
        :class:`MaxIterations` when the iteration cap was hit).
    x_scale : float
        Typical magnitude of the solution, used to rescale the variable.

    Returns
    -------
    x : list of complex ndarray
        Solution split according to ``prob.blocks``.
    report : SolverReport
    """
    t0 = time.perf_counter()
    n = 2 * prob.n
    rp = _normalise_qcqp(prob, x_scale)

    zero_ok = all(r >= 0 for _, r in rp.lin) and all(r >= 0 for *_, r, _ in rp.quad)
    if not zero_ok:
        slack = _phase1(rp, n, tol, max_iter)
        if slack > 10 * tol:
            rep = SolverReport("infeasible", 0, np.nan, wall_time=time.perf_counter() - t0)
            raise Infeasible(f"phase-1 slack {slack:.3e} > 0", rep)

    G, h, dims = _cone_data(rp, n)
    # tiny proximal term keeps the KKT matrix nonsingular when P0 is rank deficient
    P = 2 * rp.P0
    try:
        if G.shape[0] == 0:
            x = np.linalg.lstsq(P, 2 * rp.q0, rcond=None)[0]
            sol = {"status": "optimal", "iterations": 0, "z": cvxopt.matrix(0.0, (0, 1))}
        else:
            sol = solvers.coneqp(_cvx(P), _cvx(-2 * rp.q0), _cvx(G), _cvx(h), dims,
                                 options=_solver_options(tol, max_iter))
            if sol["x"] is None:
                raise NumericalBreakdown("interior point returned no iterate")
            x = np.array(sol["x"]).ravel()
    except (ArithmeticError, ValueError) as exc:
        rep = SolverReport("breakdown", 0, np.nan, wall_time=time.perf_counter() - t0)
        raise NumericalBreakdown(str(exc), rep) from exc

    z = np.array(sol["z"]).ravel()
    lam_lin = z[:dims["l"]]
    lam_quad = []
    off = dims["l"]
    for m in dims["q"]:
        zc = z[off:off + m]
        lam_quad.append(zc[0] + zc[-1])
        off += m
    lam_quad = np.asarray(lam_quad)
    x, lam_lin, lam_quad = _polish(rp, x, lam_lin, lam_quad)
    stat, prim, dual, comp = _qcqp_kkt(rp, x, lam_lin, lam_quad)
    kkt = max(stat, prim, dual, comp)

    xc = complexify_vector(x) * x_scale
    rep = SolverReport(
        status=sol["status"], iterations=int(sol.get("iterations", 0)),
        objective=prob.objective(xc), kkt_residual=kkt, stationarity=stat,
        primal_infeasibility=prim, dual_infeasibility=dual, complementarity=comp,
        gap=float(sol.get("gap", 0.0) or 0.0),
        multipliers=np.concatenate([lam_lin, lam_quad]),
        wall_time=time.perf_counter() - t0)
    if kkt > kkt_fail:
        if sol["status"] != "optimal" and rep.iterations >= max_iter:
            raise MaxIterations(f"QCQP stopped after {rep.iterations} iterations "
                                f"(KKT residual {kkt:.2e})", rep)
        raise NumericalBreakdown(f"QCQP KKT residual {kkt:.2e} exceeds tolerance", rep)
    return prob.split(xc), rep


# ---------------------------------------------------------------------------
# SDP
# ---------------------------------------------------------------------------

@dataclass
class SdpProblem:
    """Real SDP: ``min c^T x`` s.t. ``H_j - sum_i x_i F_ij >= 0`` (LMIs),
    ``G x <= h`` and ``A x = b``.

    ``lmis`` holds pairs ``(F, H)`` with ``F`` of shape ``(m, m, n)``.
    """

    c: np.ndarray
    lmis: list = field(default_factory=list)
    G: np.ndarray | None = None
    h: np.ndarray | None = None
    A: np.ndarray | None = None
    b: np.ndarray | None = None

    @property
    def n(self):
        return self.c.size

    def lmi_matrix(self, j, x):
        F, H = self.lmis[j]
        return H - F @ x


def solve_sdp(prob: SdpProblem, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER,
              x0=None):
    """Solve a real SDP with the cvxopt primal-dual interior point method.

    ``x0`` is accepted for API symmetry with warm-started callers; the
    underlying method is infeasible-start and does not use it.

    Returns
    -------
    x : ndarray
    report : SolverReport
        ``gap`` holds the primal-dual gap; ``kkt_residual`` the largest of the
        relative gap, the primal residual and the most negative LMI eigenvalue.
    """
    t0 = time.perf_counter()
    n = prob.n
    Gl = prob.G if prob.G is not None else np.zeros((0, n))
    hl = prob.h if prob.h is not None else np.zeros(0)
    Gs, hs = [], []
    for F, H in prob.lmis:
        m = H.shape[0]
        # cvxopt stores each column of Gs as a column-major vec of an m x m matrix
        Gs.append(_cvx(np.transpose(F, (1, 0, 2)).reshape(m * m, n)))
        hs.append(_cvx(H))
    kw = {}
    if prob.A is not None and prob.A.shape[0] > 0:
        kw["A"] = _cvx(prob.A)
        kw["b"] = _cvx(prob.b)
    try:
        sol = solvers.sdp(_cvx(prob.c), Gl=_cvx(Gl) if Gl.shape[0] else None,
                          hl=_cvx(hl) if Gl.shape[0] else None,
                          Gs=Gs, hs=hs, options=_solver_options(tol, max_iter), **kw)
    except (ArithmeticError, ValueError) as exc:
        rep = SolverReport("breakdown", 0, np.nan, wall_time=time.perf_counter() - t0)
        raise NumericalBreakdown(str(exc), rep) from exc
    status = sol["status"]
    if sol["x"] is None:
        rep = SolverReport(status, int(sol.get("iterations", 0)), np.nan,
                           wall_time=time.perf_counter() - t0)
        raise NumericalBreakdown("SDP solver returned no iterate", rep)
    x = np.array(sol["x"]).ravel()
    if status in ("primal infeasible", "dual infeasible"):
        rep = SolverReport(status, int(sol.get("iterations", 0)), np.nan,
                           wall_time=time.perf_counter() - t0)
        raise Infeasible(f"SDP reported {status}", rep)

    obj = float(prob.c @ x)
    min_eig = min((np.linalg.eigvalsh(prob.lmi_matrix(j, x)).min()
                   for j in range(len(prob.lmis))), default=0.0)
    prim = 0.0
    if Gl.shape[0]:
        prim = max(prim, float(np.max(Gl @ x - hl, initial=0.0)))
    if "A" in kw:
        prim = max(prim, float(np.abs(prob.A @ x - prob.b).max(initial=0.0)))
    gap = float(sol.get("gap") or 0.0)
    rel_gap = sol.get("relative gap")
    rel_gap = float(rel_gap) if rel_gap is not None else gap / (1 + abs(obj))
    kkt = max(abs(rel_gap), prim, max(0.0, -min_eig))
    rep = SolverReport(status=status, iterations=int(sol.get("iterations", 0)),
                       objective=obj, kkt_residual=kkt, primal_infeasibility=prim,
                       gap=gap, wall_time=time.perf_counter() - t0)
    if status != "optimal" and kkt > 100 * tol:
        if rep.iterations >= max_iter:
            raise MaxIterations(f"SDP stopped after {rep.iterations} iterations", rep)
        raise NumericalBreakdown(f"SDP ended with status {status!r}", rep)
    return x, rep


class HermitianSdpBuilder:
    """Assemble an :class:`SdpProblem` over complex Hermitian matrix variables.

    Each Hermitian ``X`` of order ``m`` contributes ``m*m`` real unknowns:
    the upper triangle of ``Re X`` and the strict upper triangle of ``Im X``.
    The PSD requirement is imposed on ``[[Re X, -Im X], [Im X, Re X]]``.
    """

    def __init__(self):
        self._blocks = []  # (offset, m)
        self._n = 0
        self._eq_rows, self._eq_rhs = [], []
        self._in_rows, self._in_rhs = [], []
        self._c = None

    def add_hermitian(self, m):
        self._blocks.append((self._n, m))
        self._n += m * m
        return len(self._blocks) - 1

    def _index(self, m):
        iu = np.triu_indices(m)
        ius = np.triu_indices(m, 1)
        return iu, ius

    def linear_form(self, block, R):
        """Coefficients of ``Re tr(R X)`` for Hermitian ``R`` (real vector)."""
        off, m = self._blocks[block]
        R = hermitian_part(np.asarray(R, dtype=complex))
        iu, ius = self._index(m)
        coef = np.zeros(self._n)
        re = np.where(iu[0] == iu[1], 1.0, 2.0) * R.real[iu]
        coef[off:off + re.size] = re
        coef[off + re.size:off + m * m] = 2.0 * R.imag[ius]
        return coef

    def entry_real(self, block, a, b):
        """Coefficient vector of ``Re X[a, b]``."""
        off, m = self._blocks[block]
        a, b = min(a, b), max(a, b)
        iu, _ = self._index(m)
        k = np.flatnonzero((iu[0] == a) & (iu[1] == b))[0]
        coef = np.zeros(self._n)
        coef[off + k] = 1.0
        return coef

    def entry_imag(self, block, a, b):
        """Coefficient vector of ``Im X[a, b]``."""
        off, m = self._blocks[block]
        coef = np.zeros(self._n)
        if a == b:
            return coef
        sign = 1.0 if a < b else -1.0
        a, b = min(a, b), max(a, b)
        iu, ius = self._index(m)
        k = np.flatnonzero((ius[0] == a) & (ius[1] == b))[0]
        coef[off + iu[0].size + k] = sign
        return coef

    def set_objective(self, coef):
        self._c = np.asarray(coef, dtype=float)

    def add_eq(self, coef, rhs):
        self._eq_rows.append(np.asarray(coef, dtype=float))
        self._eq_rhs.append(float(rhs))

    def add_le(self, coef, rhs):
        self._in_rows.append(np.asarray(coef, dtype=float))
        self._in_rhs.append(float(rhs))

    @property
    def n(self):
        return self._n

    def build(self) -> SdpProblem:
        lmis = []
        for off, m in self._blocks:
            F = np.zeros((2 * m, 2 * m, self._n))
            iu, ius = self._index(m)
            for k, (a, b) in enumerate(zip(*iu)):
                for (p, q) in ((a, b), (b, a), (a + m, b + m), (b + m, a + m)):
                    F[p, q, off + k] = -1.0
            base = off + iu[0].size
            for k, (a, b) in enumerate(zip(*ius)):
                # Im X[a,b] = y, Im X[b,a] = -y; block [[Xr, -Xi], [Xi, Xr]]
                F[a + m, b, base + k] = -1.0
                F[b + m, a, base + k] = 1.0
                F[a, b + m, base + k] = 1.0
                F[b, a + m, base + k] = -1.0
            lmis.append((F, np.zeros((2 * m, 2 * m))))
        c = self._c if self._c is not None else np.zeros(self._n)
        G = np.array(self._in_rows) if self._in_rows else None
        h = np.array(self._in_rhs) if self._in_rows else None
        A = np.array(self._eq_rows) if self._eq_rows else None
        b = np.array(self._eq_rhs) if self._eq_rows else None
        return SdpProblem(c=c, lmis=lmis, G=G, h=h, A=A, b=b)

    def unpack(self, x):
        """Recover the Hermitian matrices from a solution vector."""
        out = []
        for off, m in self._blocks:
            iu, ius = self._index(m)
            X = np.zeros((m, m), dtype=complex)
            X[iu] = x[off:off + iu[0].size]
            Xi = np.zeros((m, m))
            Xi[ius] = x[off + iu[0].size:off + m * m]
            X = X + 1j * Xi
            X = X + np.triu(X, 1).conj().T
            out.append(X)
        return out

"""Closed-form auxiliary updates of the fractional-programming reformulation
and assembly of the two convex subproblems.

For fixed ``(w, Phi)`` the surrogate ``f_ldt`` is maximised in ``gamma`` by
the SINRs; for fixed ``gamma`` the ratio terms are linearised by the complex
quadratic transform with auxiliary vectors ``alpha`` (beamformer block) and
``beta`` (surface block).  What remains are quadratic programs in ``w`` and
in the stacked surface vector ``v = [v_t; v_r]``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .metrics import aggregate_channels, pu_channel, _as_w

__all__ = [
    "WSubproblem",
    "VSubproblem",
    "update_gamma",
    "update_alpha",
    "update_beta",
    "build_w_subproblem",
    "build_v_subproblem",
    "cqt_value",
    "T_CLAMP",
]

T_CLAMP = 1.0 - 1e-12


def _J(Hl, w, sigma):
    Y = Hl @ w.T
    return Y @ Y.conj().T + sigma * np.eye(Hl.shape[0]), Y


def update_gamma(channels, w, phi, H=None):
    """Optimal auxiliary ``gamma_l = t_l / (1 - t_l)`` (equal to SINR_l)."""
    w = _as_w(w)
    H = aggregate_channels(channels, phi) if H is None else H
    gamma = np.empty(len(H))
    for l, Hl in enumerate(H):
        J, Y = _J(Hl, w, channels.sigma_l_sq[l])
        s = Y[:, l]
        t = float(np.real(np.vdot(s, cho_solve(cho_factor(J, lower=True), s))))
        if t >= T_CLAMP:
            warnings.warn(f"t_{l} = {t!r} clamped below 1", RuntimeWarning, stacklevel=2)
            t = T_CLAMP
        gamma[l] = max(t, 0.0) / (1.0 - max(t, 0.0))
    return gamma


def _cqt_vectors(channels, w, phi, gamma, H=None):
    w = _as_w(w)
    H = aggregate_channels(channels, phi) if H is None else H
    out = []
    for l, Hl in enumerate(H):
        J, Y = _J(Hl, w, channels.sigma_l_sq[l])
        out.append(np.sqrt(1.0 + gamma[l]) * cho_solve(cho_factor(J, lower=True), Y[:, l]))
    return np.array(out)


def update_alpha(channels, w, phi, gamma, H=None):
    """``alpha_l = sqrt(1+gamma_l) J_l^{-1} H_l w_l`` (rows of the result)."""
    return _cqt_vectors(channels, w, phi, gamma, H)


def update_beta(channels, w, phi, gamma, H=None):
    """Surface-block counterpart of :func:`update_alpha`; same formula."""
    return _cqt_vectors(channels, w, phi, gamma, H)


def cqt_value(channels, w, phi, gamma, aux, H=None):
    """``sum_l 2 sqrt(1+g_l) Re(a_l^H H_l w_l) - a_l^H J_l a_l`` for auxiliary rows ``aux``."""
    w = _as_w(w)
    H = aggregate_channels(channels, phi) if H is None else H
    total = 0.0
    for l, Hl in enumerate(H):
        J, Y = _J(Hl, w, channels.sigma_l_sq[l])
        a = aux[l]
        total += (2 * np.sqrt(1 + gamma[l]) * np.real(np.vdot(a, Y[:, l]))
                  - np.real(np.vdot(a, J @ a)))
    return float(total)


@dataclass
class WSubproblem:
    """``min sum_l w_l^H A w_l - 2 Re(a_l^H w_l)`` s.t. power and IT budgets.

    ``A_k[k]`` gives ``IT_k = sum_l w_l^H A_k w_l``.  ``const`` is chosen so
    that ``-(objective(w) + const)`` equals the quadratic-transform surrogate.
    """

    A: np.ndarray
    A_k: list
    a_l: np.ndarray
    P_s: float
    Gamma_k: np.ndarray
    const: float = 0.0

    def objective(self, w):
        w = _as_w(w)
        return float(sum(np.real(np.vdot(x, self.A @ x)) - 2 * np.real(np.vdot(a, x))
                         for x, a in zip(w, self.a_l)))

    def interference(self, w):
        w = _as_w(w)
        return np.array([sum(np.real(np.vdot(x, Ak @ x)) for x in w) for Ak in self.A_k])


def build_w_subproblem(channels, phi, gamma, alpha, H=None):
    H = aggregate_channels(channels, phi) if H is None else H
    M = channels.M_s
    A = np.zeros((M, M), dtype=complex)
    a_l = np.zeros((channels.L, M), dtype=complex)
    const = 0.0
    for l, Hl in enumerate(H):
        u = Hl.conj().T @ alpha[l]
        A += np.outer(u, u.conj())
        a_l[l] = np.sqrt(1.0 + gamma[l]) * u
        const += channels.sigma_l_sq[l] * np.real(np.vdot(alpha[l], alpha[l]))
    A = 0.5 * (A + A.conj().T)
    A_k = []
    for k in range(channels.K):
        F = pu_channel(channels, phi, k)
        Ak = F.conj().T @ F
        A_k.append(0.5 * (Ak + Ak.conj().T))
    return WSubproblem(A, A_k, a_l, float(channels.P_s), np.asarray(channels.Gamma, float),
                       const)


@dataclass
class VSubproblem:
    """Quadratic program in the surface vectors ``v_t``, ``v_r``.

    Objective ``sum_i v_i^H C_i v_i - 2 Re(c_i^H v_i)`` (to be minimised),
    with ``-(objective + const)`` equal to the quadratic-transform surrogate.
    Interference budget of PU ``k`` (on side ``pu_side[k]``):
    ``v^H B_k v + 2 Re(b_k^H v) <= Gamma_hat_k``.
    """

    C_t: np.ndarray
    C_r: np.ndarray
    c_t: np.ndarray
    c_r: np.ndarray
    B_k: list
    b_k: list
    Gamma_hat_k: np.ndarray
    pu_side: tuple
    const: float = 0.0
    c_lj: np.ndarray | None = None
    c_vec_lj: np.ndarray | None = None
    su_side: tuple = field(default_factory=tuple)

    @property
    def N(self):
        return self.C_t.shape[0]

    @property
    def K(self):
        return len(self.B_k)

    def C(self, side):
        return self.C_t if side == "t" else self.C_r

    def c(self, side):
        return self.c_t if side == "t" else self.c_r

    def objective(self, v_t, v_r):
        val = 0.0
        for C, c, v in ((self.C_t, self.c_t, v_t), (self.C_r, self.c_r, v_r)):
            val += np.real(np.vdot(v, C @ v)) - 2 * np.real(np.vdot(c, v))
        return float(val)

    def it_lhs(self, k, v_t, v_r):
        v = v_t if self.pu_side[k] == "t" else v_r
        return float(np.real(np.vdot(v, self.B_k[k] @ v))
                     + 2 * np.real(np.vdot(self.b_k[k], v)))

    def it_slack(self, v_t, v_r):
        """``Gamma_hat_k - lhs_k`` for every PU (feasible iff all >= 0)."""
        return np.array([self.Gamma_hat_k[k] - self.it_lhs(k, v_t, v_r)
                         for k in range(self.K)])

    def scaled(self, s_obj):
        """Copy with the objective multiplied by ``s_obj`` (constraints unchanged)."""
        return VSubproblem(self.C_t * s_obj, self.C_r * s_obj, self.c_t * s_obj,
                           self.c_r * s_obj, self.B_k, self.b_k, self.Gamma_hat_k,
                           self.pu_side, self.const * s_obj, self.c_lj, self.c_vec_lj,
                           self.su_side)

    def tightened(self, margin):
        """Copy with every budget ``Gamma_hat_k`` reduced by ``margin[k]``."""
        margin = np.asarray(margin, dtype=float)
        if not np.any(margin):
            return self
        return replace(self, Gamma_hat_k=np.asarray(self.Gamma_hat_k, float) - margin)


def build_v_subproblem(channels, w, gamma, beta):
    """Assemble the surface subproblem for fixed beamformers and ``beta``.

    With ``c_lj = beta_l^H D_l w_j`` and
    ``cvec_lj = diag(G_s w_j)^H G_l^H beta_l`` one has
    ``beta_l^H H_l w_j = c_lj + cvec_lj^H v_i``, which gives

    * ``C_i = sum_{l in L_i} sum_j cvec_lj cvec_lj^H``
    * ``c_i = sum_{l in L_i} sqrt(1+g_l) cvec_ll - sum_j c_lj cvec_lj``.
    """
    w = _as_w(w)
    N, L = channels.N, channels.L
    Gsw = channels.G_s @ w.T  # N x L, column j is G_s w_j
    c_lj = np.zeros((L, L), dtype=complex)
    cv = np.zeros((L, L, N), dtype=complex)
    C = {"t": np.zeros((N, N), dtype=complex), "r": np.zeros((N, N), dtype=complex)}
    c = {"t": np.zeros(N, dtype=complex), "r": np.zeros(N, dtype=complex)}
    const = 0.0
    for l in range(L):
        side = channels.su_side[l]
        b = beta[l]
        gb = channels.G_l[l].conj().T @ b  # G_l^H beta_l
        Db = channels.D_l[l].conj().T @ b
        for j in range(L):
            c_lj[l, j] = np.vdot(Db, w[j])
            cv[l, j] = Gsw[:, j].conj() * gb
            C[side] += np.outer(cv[l, j], cv[l, j].conj())
            c[side] -= c_lj[l, j] * cv[l, j]
            const += abs(c_lj[l, j]) ** 2
        c[side] += np.sqrt(1 + gamma[l]) * cv[l, l]
        const += (channels.sigma_l_sq[l] * np.real(np.vdot(b, b))
                  - 2 * np.sqrt(1 + gamma[l]) * np.real(c_lj[l, l]))
    B_k, b_k, G_hat = [], [], []
    Gamma = np.asarray(channels.Gamma, dtype=float)
    for k in range(channels.K):
        Gk = channels.G_k[k]
        Dk = channels.Dhat_k[k]
        B = np.zeros((N, N), dtype=complex)
        bk = np.zeros(N, dtype=complex)
        direct = 0.0
        for l in range(L):
            T = Gk * Gsw[:, l][None, :]  # G_k diag(G_s w_l)
            B += T.conj().T @ T
            d = Dk @ w[l]
            bk += T.conj().T @ d
            direct += np.real(np.vdot(d, d))
        B_k.append(0.5 * (B + B.conj().T))
        b_k.append(bk)
        G_hat.append(Gamma[k] - direct)
    herm = lambda X: 0.5 * (X + X.conj().T)
    return VSubproblem(herm(C["t"]), herm(C["r"]), c["t"], c["r"], B_k, b_k,
                       np.array(G_hat), tuple(channels.pu_side), float(const),
                       c_lj, cv, tuple(channels.su_side))

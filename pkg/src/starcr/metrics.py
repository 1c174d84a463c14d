"""Physical-layer quantities: aggregate channels, SINR, rates, interference
temperature and the Lagrangian-dual-transformed surrogate ``f_ldt``.

Rates are in nats internally; :func:`nats_to_bits` converts for reporting.
Beamformers are passed as a 2-D array ``w`` of shape ``(L, M_s)`` (row ``l``
is ``w_l``) or any sequence of vectors.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import cho_factor, cho_solve

__all__ = [
    "aggregate_channel",
    "aggregate_channels",
    "pu_channel",
    "sinr",
    "sinrs",
    "sum_rate",
    "interference_temperature",
    "interference_temperatures",
    "f_ldt",
    "ldt_quadratic",
    "nats_to_bits",
    "side_matrix",
]


def nats_to_bits(x):
    return np.asarray(x) / np.log(2.0)


def _as_w(w):
    return np.atleast_2d(np.asarray(w, dtype=complex))


def side_matrix(phi, side):
    """Pick the coefficient matrix of one side from a ``(Phi_t, Phi_r)`` pair."""
    return phi[0] if side == "t" else phi[1]


def aggregate_channel(D_l, G_l, Phi_side, G_s):
    """``H_l = D_l + G_l Phi G_s`` (direct plus surface-assisted link)."""
    D_l = np.asarray(D_l)
    G_l = np.asarray(G_l)
    G_s = np.asarray(G_s)
    if G_l.shape[1] != Phi_side.shape[0] or G_s.shape[0] != Phi_side.shape[1]:
        raise ValueError("surface dimensions do not match")
    casc = G_l @ Phi_side @ G_s
    if casc.shape != D_l.shape:
        raise ValueError(f"direct link {D_l.shape} vs cascaded {casc.shape}")
    return D_l + casc


def aggregate_channels(channels, phi):
    """Aggregate channel of every SU for coefficient matrices ``phi = (Phi_t, Phi_r)``."""
    return [aggregate_channel(channels.D_l[l], channels.G_l[l],
                              side_matrix(phi, channels.su_side[l]), channels.G_s)
            for l in range(channels.L)]


def pu_channel(channels, phi, k):
    """``Dhat_k + G_k Phi G_s`` for PU ``k``."""
    return aggregate_channel(channels.Dhat_k[k], channels.G_k[k],
                             side_matrix(phi, channels.pu_side[k]), channels.G_s)


def _hpd_solve(J, B):
    return cho_solve(cho_factor(J, lower=True), B)


def sinr(l, H, w, sigma_l_sq):
    """SINR of SU ``l`` with linear MMSE combining (interference excludes ``l``)."""
    if not sigma_l_sq > 0:
        raise ValueError("noise power must be strictly positive")
    w = _as_w(w)
    Hl = H[l]
    U = Hl.shape[0]
    Y = Hl @ w.T  # columns H_l w_j
    mask = np.ones(w.shape[0], dtype=bool)
    mask[l] = False
    Yi = Y[:, mask]
    R = Yi @ Yi.conj().T + sigma_l_sq * np.eye(U)
    s = Y[:, l]
    return float(max(np.real(np.vdot(s, _hpd_solve(R, s))), 0.0))


def sinrs(H, w, sigma):
    return np.array([sinr(l, H, w, sigma[l]) for l in range(len(H))])


def sum_rate(H, w, sigma):
    """Sum of ``ln(1 + SINR_l)`` (nats)."""
    return float(np.sum(np.log1p(sinrs(H, w, sigma))))


def interference_temperature(k, Dhat_k, G_k, Phi_side, G_s, w):
    """``sum_l ||(Dhat_k + G_k Phi G_s) w_l||^2``."""
    F = aggregate_channel(Dhat_k, G_k, Phi_side, G_s)
    w = _as_w(w)
    return float(np.sum(np.abs(F @ w.T) ** 2))


def interference_temperatures(channels, phi, w):
    return np.array([interference_temperature(k, channels.Dhat_k[k], channels.G_k[k],
                                              side_matrix(phi, channels.pu_side[k]),
                                              channels.G_s, w)
                     for k in range(channels.K)])


def ldt_quadratic(H, w, sigma):
    """``t_l = w_l^H H_l^H J_l^{-1} H_l w_l`` with ``J_l`` including all users."""
    w = _as_w(w)
    out = np.empty(len(H))
    for l, Hl in enumerate(H):
        Y = Hl @ w.T
        J = Y @ Y.conj().T + sigma[l] * np.eye(Hl.shape[0])
        s = Y[:, l]
        out[l] = np.real(np.vdot(s, _hpd_solve(J, s)))
    return out


def f_ldt(gamma, w, phi, channels):
    """Lagrangian-dual-transformed sum-rate surrogate.

    ``sum_l ln(1+g_l) - g_l + (1+g_l) w_l^H H_l^H J_l^{-1} H_l w_l``.  It
    equals the sum rate when ``gamma`` holds the SINRs and is concave in
    ``gamma`` otherwise.
    """
    gamma = np.asarray(gamma, dtype=float)
    if np.any(gamma < 0):
        raise ValueError("gamma must be nonnegative")
    H = aggregate_channels(channels, phi)
    t = ldt_quadratic(H, w, channels.sigma_l_sq)
    return float(np.sum(np.log1p(gamma) - gamma + (1 + gamma) * t))

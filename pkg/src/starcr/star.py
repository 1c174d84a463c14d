"""STAR surface coefficients and their feasibility sets.

Each element ``n`` splits incident power into a transmitted share
``rho_t[n]`` and a reflected share ``rho_r[n]`` with ``rho_t + rho_r = 1``
and applies phases ``theta_t[n]``, ``theta_r[n]``.  Under the coupled model
the two phases must additionally differ by an odd multiple of ``pi/2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "Model",
    "StarCoefficients",
    "StarVectors",
    "StarValidationError",
    "validate",
    "to_matrices",
    "from_vectors",
    "equal_split",
    "coupled_phase_error",
]

TWO_PI = 2.0 * np.pi
SUM_TOL = 1e-9
COUPLED_TOL = 1e-6


class Model(str, Enum):
    INDEPENDENT = "independent"
    COUPLED = "coupled"


class StarValidationError(ValueError):
    """Raised when coefficients are used while infeasible for their model."""


@dataclass(frozen=True)
class StarVectors:
    """Complex per-element coefficients ``v_i[n] = sqrt(rho_i[n]) e^{j theta_i[n]}``."""

    v_t: np.ndarray
    v_r: np.ndarray

    @property
    def stacked(self):
        return np.concatenate([self.v_t, self.v_r])

    def unit_error(self):
        return float(np.max(np.abs(np.abs(self.v_t) ** 2 + np.abs(self.v_r) ** 2 - 1.0),
                            initial=0.0))


class StarCoefficients:
    """Amplitude shares and phases of a STAR surface.

    Parameters
    ----------
    rho_t, rho_r : array_like
        Power shares in ``[0, 1]``.
    theta_t, theta_r : array_like
        Phases; wrapped into ``[0, 2 pi)`` on construction.
    model : Model or str
        Declared phase-shift model.
    """

    __slots__ = ("rho_t", "rho_r", "theta_t", "theta_r", "model")

    def __init__(self, rho_t, rho_r, theta_t, theta_r, model=Model.INDEPENDENT):
        arrays = [np.array(a, dtype=float).ravel() for a in (rho_t, rho_r, theta_t, theta_r)]
        if len({a.size for a in arrays}) != 1:
            raise ValueError("rho_t, rho_r, theta_t, theta_r must share one length")
        rt, rr, tt, tr = arrays
        tt = np.mod(tt, TWO_PI)
        tr = np.mod(tr, TWO_PI)
        # np.mod can return 2*pi for tiny negative inputs
        tt[tt >= TWO_PI] = 0.0
        tr[tr >= TWO_PI] = 0.0
        for a in (rt, rr, tt, tr):
            a.setflags(write=False)
        object.__setattr__(self, "rho_t", rt)
        object.__setattr__(self, "rho_r", rr)
        object.__setattr__(self, "theta_t", tt)
        object.__setattr__(self, "theta_r", tr)
        object.__setattr__(self, "model", Model(model))

    def __setattr__(self, name, value):
        raise AttributeError("StarCoefficients is immutable")

    def __repr__(self):
        return f"StarCoefficients(N={self.N}, model={self.model.value})"

    @property
    def N(self):
        return self.rho_t.size

    def vectors(self) -> StarVectors:
        return StarVectors(np.sqrt(self.rho_t) * np.exp(1j * self.theta_t),
                           np.sqrt(self.rho_r) * np.exp(1j * self.theta_r))

    def with_model(self, model):
        return StarCoefficients(self.rho_t, self.rho_r, self.theta_t, self.theta_r, model)

    def as_row(self):
        """Flat mapping for the CSV columns ``rho_t_n, rho_r_n, theta_t_n, theta_r_n``."""
        row = {}
        for name in ("rho_t", "rho_r", "theta_t", "theta_r"):
            for n, x in enumerate(getattr(self, name)):
                row[f"{name}_{n}"] = float(x)
        return row

    @staticmethod
    def zeros(N, model=Model.INDEPENDENT):
        """All-zero surface (used for the no-surface baseline, not feasible)."""
        z = np.zeros(N)
        return StarCoefficients(z, z, z, z, model)


def coupled_phase_error(c: StarCoefficients):
    """Per-element ``|cos(theta_t - theta_r)|``."""
    return np.abs(np.cos(c.theta_t - c.theta_r))


def validate(c: StarCoefficients, sum_tol=SUM_TOL, coupled_tol=COUPLED_TOL):
    """List every constraint violation as ``(element, description)`` pairs."""
    out = []
    for n in range(c.N):
        if c.rho_t[n] < -sum_tol or c.rho_t[n] > 1 + sum_tol:
            out.append((n, f"rho_t out of [0,1]: {c.rho_t[n]:.3g}"))
        if c.rho_r[n] < -sum_tol or c.rho_r[n] > 1 + sum_tol:
            out.append((n, f"rho_r out of [0,1]: {c.rho_r[n]:.3g}"))
        s = c.rho_t[n] + c.rho_r[n]
        if abs(s - 1.0) > sum_tol:
            out.append((n, f"rho_t + rho_r = {s:.12g} != 1"))
    if c.model is Model.COUPLED:
        err = coupled_phase_error(c)
        for n in np.flatnonzero(err > coupled_tol):
            out.append((int(n), f"|cos(theta_t - theta_r)| = {err[n]:.3g} != 0"))
    return out


def to_matrices(c: StarCoefficients, check=True):
    """Diagonal coefficient matrices ``(Phi_t, Phi_r)``."""
    if check:
        bad = validate(c)
        if bad:
            raise StarValidationError(f"{len(bad)} violation(s), first: {bad[0]}")
    v = c.vectors()
    return np.diag(v.v_t), np.diag(v.v_r)


def from_vectors(v_t, v_r, model=Model.INDEPENDENT, normalise=True):
    """Coefficients from complex element vectors.

    With ``normalise`` each pair ``(v_t[n], v_r[n])`` is scaled onto the unit
    sphere so the result satisfies ``rho_t + rho_r = 1`` exactly; an all-zero
    pair becomes an equal split keeping phases ``0``.
    """
    v_t = np.asarray(v_t, dtype=complex)
    v_r = np.asarray(v_r, dtype=complex)
    rt = np.abs(v_t) ** 2
    rr = np.abs(v_r) ** 2
    if normalise:
        s = rt + rr
        zero = s <= 1e-300
        s = np.where(zero, 1.0, s)
        rt = np.where(zero, 0.5, rt / s)
        rr = 1.0 - rt
    return StarCoefficients(rt, rr, np.angle(v_t), np.angle(v_r), model)


def equal_split(N, theta_t, theta_r=None, model=Model.INDEPENDENT):
    """Equal power split; ``theta_r`` defaults to ``theta_t + pi/2`` (coupled-feasible)."""
    theta_t = np.asarray(theta_t, dtype=float)
    if theta_r is None:
        theta_r = theta_t + np.pi / 2
    h = np.full(N, 0.5)
    return StarCoefficients(h, h, theta_t, theta_r, model)

"""Shared random-instance builders for the test suite."""

from __future__ import annotations

import warnings

import numpy as np
import pytest

from starcr.scene import ChannelSet
from starcr.star import Model, StarCoefficients


def crandn(rng, *shape, scale=1.0):
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_channels(rng, N=4, L=2, K=2, M=3, U=2, U_p=2, sigma=0.1, P_s=1.0, Gamma=None,
                    casc_scale=1.0):
    """Unit-scale random channels (no geometry) for algebraic checks."""
    su_side = tuple("t" if l % 2 == 0 else "r" for l in range(L))
    pu_side = tuple("t" if k % 2 == 0 else "r" for k in range(K))
    D = [crandn(rng, U, M) for _ in range(L)]
    Dh = [crandn(rng, U_p, M, scale=0.3) for _ in range(K)]
    Gs = crandn(rng, N, M, scale=casc_scale)
    Gl = [crandn(rng, U, N) for _ in range(L)]
    Gk = [crandn(rng, U_p, N, scale=0.3) for _ in range(K)]
    sig = np.full(L, float(sigma))
    if Gamma is None:
        Gamma = np.full(K, np.inf)
    return ChannelSet(D, Dh, Gs, Gl, Gk, sig, su_side, pu_side, P_s=P_s,
                      Gamma=np.broadcast_to(np.asarray(Gamma, float), (K,)).copy())


def random_star(rng, N, model=Model.INDEPENDENT):
    rho = rng.uniform(0, 1, N)
    th_t = rng.uniform(0, 2 * np.pi, N)
    if model is Model.COUPLED:
        th_r = th_t + np.where(rng.uniform(size=N) < 0.5, 0.5, 1.5) * np.pi
    else:
        th_r = rng.uniform(0, 2 * np.pi, N)
    return StarCoefficients(rho, 1 - rho, th_t, th_r, model)


def random_w(rng, L, M, power=1.0):
    w = crandn(rng, L, M)
    return w * np.sqrt(power / np.sum(np.abs(w) ** 2))


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)


@pytest.fixture(autouse=True)
def _quiet_solver_warnings():
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message="surface step skipped")
        yield


def surface_subproblem(rng, N=4, L=2, K=2, it_margin=1.5, model=Model.INDEPENDENT, **kw):
    """A v-subproblem built from random channels at a random feasible point.

    Interference budgets are set to ``it_margin`` times the interference at
    the returned start coefficients, so the start is strictly feasible.
    Returns ``(sub, start_coefficients)``.
    """
    from starcr.metrics import interference_temperatures
    from starcr.star import to_matrices
    from starcr.transforms import build_v_subproblem, update_beta, update_gamma

    ch = random_channels(rng, N=N, L=L, K=K, **kw)
    start = random_star(rng, N, model)
    phi = to_matrices(start)
    w = random_w(rng, L, ch.M_s)
    if K:
        ch.Gamma = it_margin * interference_temperatures(ch, phi, w)
    g = update_gamma(ch, w, phi)
    sub = build_v_subproblem(ch, w, g, update_beta(ch, w, phi, g))
    return sub, start


def pytest_terminal_summary(terminalreporter):
    """Print the acceptance criteria verdicts, one line each."""
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s[1:3])):
            terminalreporter.write_line(line)

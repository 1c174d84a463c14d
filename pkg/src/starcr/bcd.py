"""Block coordinate ascent over ``(gamma, alpha, w, beta, Phi)`` and the
baseline schemes.

One iteration performs, in order:

1. ``gamma`` <- SINRs (exact maximiser of ``f_ldt``),
2. ``alpha`` <- quadratic-transform optimum,
3. ``w`` <- convex QCQP under the power and interference budgets,
4. ``beta`` <- quadratic-transform optimum for the new ``w``,
5. ``Phi`` <- lifted SCA (independent model) or PDD (coupled model).

The recorded objective is ``f_ldt`` evaluated with ``gamma`` at its
optimum, i.e. the sum rate in nats, which every block step can only raise.
"""

from __future__ import annotations

import dataclasses
import warnings
from dataclasses import dataclass, field

import numpy as np

from .conic import QcqpProblem, QuadConstraint, SolverError, solve_qcqp
from .metrics import (aggregate_channels, f_ldt, interference_temperatures, nats_to_bits,
                      sum_rate)
from .pdd import PddSettings, PddStalled, run_pdd
from .report import SolveReport
from .sca import solve_phi_independent
from .star import Model, StarCoefficients, equal_split, to_matrices
from .transforms import (build_v_subproblem, build_w_subproblem, update_alpha, update_beta,
                         update_gamma)

__all__ = [
    "BcdState",
    "BcdOptions",
    "SolveReport",
    "initial_point",
    "run_bcd",
    "solve_w",
    "baseline_traditional_cr",
    "baseline_conventional_ris",
    "baseline_equal_splitting",
    "conventional_split",
    "SCHEMES",
    "run_scheme",
]

IT_FEAS_TOL = 1e-9


@dataclass
class BcdState:
    """Iterates of the block-coordinate method."""

    w: np.ndarray
    star: StarCoefficients
    gamma: np.ndarray | None = None
    alpha: np.ndarray | None = None
    beta: np.ndarray | None = None
    objective: list = field(default_factory=list)
    iteration: int = 0


@dataclass
class BcdOptions:
    """Knobs of :func:`run_bcd`.

    ``phi_step`` switches the surface update off (fixed ``Phi``);
    ``rho`` freezes the power shares (baselines); ``sca`` and ``pdd`` are
    forwarded to the surface solvers.
    """

    eps_bcd: float = 1e-3
    max_iter: int = 100
    phi_step: bool = True
    rho: tuple | None = None
    eps_sca: float = 1e-3
    sca: dict = field(default_factory=dict)
    pdd: PddSettings = field(default_factory=PddSettings)
    qcqp_tol: float = 1e-7
    keep_inner: bool = True


def _phi(star, check=False):
    return to_matrices(star, check=check)


def _rate(ch, w, phi):
    return sum_rate(aggregate_channels(ch, phi), w, ch.sigma_l_sq)


def initial_point(channels, model=Model.INDEPENDENT, seed=0, rho=None):
    """Feasible starting point.

    ``Phi``: equal split (or the frozen ``rho``) with uniformly random
    ``theta_t`` and ``theta_r = theta_t + pi/2``, feasible under both phase
    models.  ``w_l``: principal right singular vector of ``H_l``, all scaled by
    one common factor so the power budget holds with equality unless an
    interference budget binds first.
    """
    rng = np.random.default_rng([int(seed), 0x1A1])
    N = channels.N
    th = rng.uniform(0.0, 2 * np.pi, N)
    if rho is None:
        star = equal_split(N, th, model=model)
    else:
        star = StarCoefficients(rho[0], rho[1], th, th + np.pi / 2, model)
    phi = _phi(star)
    H = aggregate_channels(channels, phi)
    L, M = channels.L, channels.M_s
    w = np.zeros((L, M), dtype=complex)
    for l, Hl in enumerate(H):
        _, _, Vh = np.linalg.svd(Hl)
        w[l] = Vh[0].conj()
    w *= np.sqrt(channels.P_s / L)
    it = interference_temperatures(channels, phi, w)
    gam = np.asarray(channels.Gamma, dtype=float)
    if it.size:
        s = np.min(np.sqrt(gam / np.maximum(it, 1e-300)))
        if s < 1:
            w *= s
    return w, star


def solve_w(sub, L, tol=1e-7):
    """Solve the beamformer QCQP; returns ``w`` with shape ``(L, M_s)``."""
    M = sub.A.shape[0]
    I_L = np.eye(L)
    P0 = np.kron(I_L, sub.A)
    q0 = sub.a_l.reshape(-1)
    cons = [QuadConstraint(np.eye(L * M), None, sub.P_s)]
    for Ak, G in zip(sub.A_k, sub.Gamma_k):
        cons.append(QuadConstraint(np.kron(I_L, Ak), None, float(G)))
    x_scale = np.sqrt(max(sub.P_s, 1e-300) / L)
    x, rep = solve_qcqp(QcqpProblem(P0, q0, cons), tol=tol, x_scale=x_scale)
    return x[0].reshape(L, M), rep


def _restore_budgets(ch, phi, w):
    """Scale ``w`` down so every budget holds; returns ``(w, factor)``."""
    s = 1.0
    p = float(np.sum(np.abs(w) ** 2))
    if p > ch.P_s:
        s = min(s, np.sqrt(ch.P_s / p))
    it = interference_temperatures(ch, phi, w)
    gam = np.asarray(ch.Gamma, dtype=float)
    if it.size:
        s = min(s, float(np.min(np.sqrt(gam / np.maximum(it, 1e-300)))))
    return (w * s if s < 1 else w), s


def _max_it_slack(ch, phi, w):
    it = interference_temperatures(ch, phi, w)
    gam = np.asarray(ch.Gamma, dtype=float)
    if it.size == 0:
        return -np.inf
    finite = np.isfinite(gam)
    if not finite.any():
        return -np.inf
    g = gam[finite]
    # relative excess; a zero budget has no scale, so its absolute excess is used
    return float(np.max((it[finite] - g) / np.where(g > 0, g, 1.0)))


def run_bcd(channels, config=None, model=Model.INDEPENDENT, init=None, eps_bcd=None,
            options: BcdOptions | None = None, seed=0):
    """Maximise the secondary sum rate by block coordinate ascent.

    Parameters
    ----------
    channels : ChannelSet
    config : SystemConfig, optional
        If given, its ``P_s`` and ``Gamma`` override those stored in
        ``channels`` (lets sweeps reuse one channel draw).
    model : Model
        Phase-shift model of the surface.
    init : (w, StarCoefficients), optional
        Starting point; defaults to :func:`initial_point` with ``seed``.
    eps_bcd : float, optional
        Fractional-increase stopping threshold (overrides ``options``).

    Returns
    -------
    BcdState, SolveReport
        ``report.objective`` is the sum rate (nats) after each iteration,
        starting with the initial point; ``report.inner`` collects the
        surface-solver reports.
    """
    opts = dataclasses.replace(options) if options else BcdOptions()
    if eps_bcd is not None:
        opts.eps_bcd = eps_bcd
    model = Model(model)
    ch = channels
    if config is not None:
        ch = dataclasses.replace(channels, P_s=float(config.P_s), Gamma=config.gammas)
    report = SolveReport(name=f"bcd-{model.value}")
    if init is None:
        w, star = initial_point(ch, model, seed, opts.rho)
    else:
        w, star = init
        w = np.array(w, dtype=complex)
    star = star.with_model(model) if star.N == ch.N and star.N else star
    phi = _phi(star)
    w, _ = _restore_budgets(ch, phi, w)
    state = BcdState(w=w, star=star)
    rate = _rate(ch, w, phi)
    state.objective.append(rate)
    report.objective.append(rate)
    report.it_slack.append(_max_it_slack(ch, phi, w))
    report.phase_diff.append(np.mod(star.theta_t - star.theta_r, 2 * np.pi))
    do_phi = opts.phi_step and ch.N > 0
    reason = "max-iters"
    for it in range(opts.max_iter):
        try:
            H = aggregate_channels(ch, phi)
            state.gamma = update_gamma(ch, w, phi, H)
            state.alpha = update_alpha(ch, w, phi, state.gamma, H)
            wsub = build_w_subproblem(ch, phi, state.gamma, state.alpha, H)
            w_new, _ = solve_w(wsub, ch.L, opts.qcqp_tol)
            w_new, _ = _restore_budgets(ch, phi, w_new)
            r_w = _rate(ch, w_new, phi)
            if r_w >= rate:
                w, rate = w_new, r_w
            else:
                report.notes.append(f"iter {it}: w step rejected ({r_w:.6e} < {rate:.6e})")
            if do_phi:
                H = aggregate_channels(ch, phi)
                g2 = update_gamma(ch, w, phi, H)
                state.beta = update_beta(ch, w, phi, g2, H)
                vsub = build_v_subproblem(ch, w, g2, state.beta)
                cand, inner = _phi_step(vsub, star, model, opts)
                if opts.keep_inner and inner is not None:
                    report.inner.append(inner)
                if cand is not None:
                    phi_c = _phi(cand)
                    w_c, s = _restore_budgets(ch, phi_c, w)
                    r_c = _rate(ch, w_c, phi_c)
                    if r_c >= rate:
                        star, phi, w, rate = cand, phi_c, w_c, r_c
                        if s < 1:
                            report.notes.append(f"iter {it}: w rescaled by {s:.9f}")
                    else:
                        report.notes.append(f"iter {it}: surface step rejected")
        except (SolverError, np.linalg.LinAlgError) as exc:
            report.notes.append(f"iter {it}: {type(exc).__name__}: {exc}")
            reason = "infeasible" if "nfeasib" in type(exc).__name__ else "solver-failure"
            if rate <= report.objective[-1]:
                break
            # blocks accepted before the failure are kept, so the record must show them
            failed = True
        else:
            failed = False
        state.w, state.star, state.iteration = w, star, it + 1
        state.objective.append(rate)
        report.objective.append(rate)
        report.it_slack.append(_max_it_slack(ch, phi, w))
        report.phase_diff.append(np.mod(star.theta_t - star.theta_r, 2 * np.pi))
        if failed:
            break
        prev = report.objective[-2]
        if rate - prev <= opts.eps_bcd * max(abs(prev), 1e-300):
            reason = "converged"
            break
    state.w, state.star = w, star
    report.sum_rate_bits = float(nats_to_bits(rate))
    report.extra["power"] = float(np.sum(np.abs(w) ** 2))
    report.extra["it"] = interference_temperatures(ch, phi, w)
    report.finish(reason)
    return state, report


def _phi_step(vsub, star, model, opts):
    """Run the surface solver; returns ``(candidate or None, inner report)``."""
    rho = opts.rho
    try:
        if model is Model.INDEPENDENT:
            cand, inner = solve_phi_independent(vsub, star, opts.eps_sca, rho=rho,
                                                model=model, **opts.sca)
        else:
            cand, inner = run_pdd(vsub, star, opts.pdd.eps_bcd, opts.pdd.eps_pdd,
                                  settings=opts.pdd, freeze_amplitudes=rho is not None)
        return cand, inner
    except PddStalled as exc:
        return exc.coefficients, exc.report
    except ValueError as exc:
        warnings.warn(f"surface step skipped: {exc}", RuntimeWarning, stacklevel=3)
        return None, None


def conventional_split(N):
    """Power shares of two adjacent one-sided surfaces of ``N/2`` elements each."""
    rho_t = np.zeros(N)
    rho_t[: N // 2] = 1.0
    return rho_t, 1.0 - rho_t


def baseline_traditional_cr(channels, config=None, options=None, seed=0):
    """No surface: ``Phi_t = Phi_r = 0`` and the surface step is skipped."""
    opts = dataclasses.replace(options) if options else BcdOptions()
    opts.phi_step = False
    w0, _ = initial_point(channels.without_surface(), Model.INDEPENDENT, seed)
    zero = StarCoefficients.zeros(channels.N)
    _, rep = run_bcd(channels, config, Model.INDEPENDENT, init=(w0, zero), options=opts,
                     seed=seed)
    rep.name = "traditional-cr"
    return rep


def baseline_conventional_ris(channels, config=None, options=None, seed=0):
    """Transmit-only first half, reflect-only second half; phases optimised."""
    opts = dataclasses.replace(options) if options else BcdOptions()
    opts.rho = conventional_split(channels.N)
    _, rep = run_bcd(channels, config, Model.INDEPENDENT, options=opts, seed=seed)
    rep.name = "conventional-ris"
    return rep


def baseline_equal_splitting(channels, config=None, model=Model.INDEPENDENT, options=None,
                             seed=0):
    """All elements split power equally; phases optimised under ``model``."""
    opts = dataclasses.replace(options) if options else BcdOptions()
    opts.rho = (np.full(channels.N, 0.5), np.full(channels.N, 0.5))
    _, rep = run_bcd(channels, config, model, options=opts, seed=seed)
    rep.name = "equal-splitting"
    return rep


SCHEMES = ("star-independent", "star-coupled", "equal-splitting", "conventional-ris",
           "traditional-cr")


def run_scheme(scheme, channels, config=None, options=None, seed=0):
    """Dispatch one named scheme; returns its :class:`SolveReport`."""
    if scheme == "star-independent":
        return run_bcd(channels, config, Model.INDEPENDENT, options=options, seed=seed)[1]
    if scheme == "star-coupled":
        return run_bcd(channels, config, Model.COUPLED, options=options, seed=seed)[1]
    if scheme == "equal-splitting":
        return baseline_equal_splitting(channels, config, options=options, seed=seed)
    if scheme == "conventional-ris":
        return baseline_conventional_ris(channels, config, options=options, seed=seed)
    if scheme == "traditional-cr":
        return baseline_traditional_cr(channels, config, options=options, seed=seed)
    raise ValueError(f"unknown scheme {scheme!r}")

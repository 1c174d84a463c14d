"""Simulation geometry, Rician channel generation and equivalent noise.

All quantities are in linear SI units (watts, metres).  Conversion from the
dB-style strings accepted by scenario files happens once, in
:func:`parse_quantity` / :meth:`SystemConfig.from_mapping`.
"""

from __future__ import annotations

import dataclasses
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np
import yaml

__all__ = [
    "SystemConfig",
    "Geometry",
    "ChannelSet",
    "ConfigError",
    "path_loss",
    "parse_quantity",
    "load_config",
    "make_geometry",
    "generate_channels",
    "equivalent_noise_power",
    "draw_scene",
    "dbm_to_watt",
    "db_to_linear",
]

SIDES = ("t", "r")


class ConfigError(ValueError):
    """Raised for malformed or physically invalid configurations."""


def dbm_to_watt(x):
    return 10.0 ** (np.asarray(x, dtype=float) / 10.0) / 1000.0


def db_to_linear(x):
    return 10.0 ** (np.asarray(x, dtype=float) / 10.0)


_QUANTITY = re.compile(r"^\s*([-+]?\d*\.?\d+(?:[eE][-+]?\d+)?)\s*(dBm|dB|W)?\s*$")


def parse_quantity(value):
    """Convert ``"20dBm"``, ``"-30dB"``, ``"0.1W"`` or a number to linear units."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if isinstance(value, str):
        if value.strip().lower() in ("inf", "+inf", "infinity"):
            return math.inf
        m = _QUANTITY.match(value)
        if m:
            num, unit = float(m.group(1)), m.group(2)
            if unit == "dBm":
                return float(dbm_to_watt(num))
            if unit == "dB":
                return float(db_to_linear(num))
            return num
    raise ConfigError(f"cannot interpret {value!r} as a physical quantity")


@dataclass(frozen=True)
class SystemConfig:
    """Scenario scalars.  Defaults reproduce the reference simulation table
    with a desk-scale surface (``N = 8``, ``L = K = 2``).

    ``Gamma`` is the interference-temperature threshold (watts), either one
    value shared by every PU or a tuple with one entry per PU.

    ``noise_model`` selects how PBS interference enters the SU noise:
    ``"printed"`` evaluates ``P_p (PL_SR + PL_Ri)``; ``"pbs"`` swaps the
    SBS-RIS link for the PBS-RIS link; ``"cascaded"`` uses the physical
    PBS -> RIS -> SU cascade ``P_p PL_PR PL_Ri``; ``"none"`` uses thermal noise
    only.  Path losses ``LP^-1`` are read as power gains ``C_0 d^-alpha``.
    """

    M_s: int = 4
    M_p: int = 4
    U_s: int = 2
    U_p: int = 2
    N: int = 8
    L: int = 2
    K: int = 2
    P_s: float = 0.1
    P_p: float = 1.0
    sigma_s_sq: float = 1e-13
    Gamma: float | tuple = 1e-12
    kappa_r: float = 5.0
    kappa_d: float = 0.0
    C_0: float = 1e-3
    alpha_SR: float = 2.1
    alpha_PR: float = 3.6
    alpha_RU: float = 2.3
    alpha_SU: float = 3.9
    alpha_PU: float = 3.9
    pos_pbs: tuple = (0.0, -50.0)
    pos_sbs: tuple = (0.0, 0.0)
    pos_ris: tuple = (0.0, 30.0)
    user_radius: float = 10.0
    noise_model: str = "printed"

    def __post_init__(self):
        self.validate()

    def validate(self):
        for name in ("M_s", "M_p", "U_s", "U_p"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ConfigError(f"{name} must be a positive integer, got {v!r}")
        for name in ("N", "L", "K"):
            v = getattr(self, name)
            if int(v) != v or v < 0:
                raise ConfigError(f"{name} must be a nonnegative integer, got {v!r}")
        if self.L < 1:
            raise ConfigError("at least one SU is required")
        for name in ("P_s", "P_p"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be nonnegative")
        for name in ("sigma_s_sq", "C_0", "user_radius", "alpha_SR", "alpha_PR",
                     "alpha_RU", "alpha_SU", "alpha_PU"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be strictly positive")
        if self.kappa_r < 0 or self.kappa_d < 0:
            raise ConfigError("Rician factors must be nonnegative")
        g = np.atleast_1d(np.asarray(self.Gamma, dtype=float))
        if np.any(~(g > 0)):
            raise ConfigError("Gamma thresholds must be strictly positive")
        if g.size not in (1, self.K) and self.K > 0:
            raise ConfigError(f"Gamma needs 1 or K={self.K} entries, got {g.size}")
        if self.noise_model not in ("printed", "pbs", "cascaded", "none"):
            raise ConfigError(f"unknown noise_model {self.noise_model!r}")

    @property
    def gammas(self):
        """Per-PU thresholds as an array of length ``K``."""
        g = np.atleast_1d(np.asarray(self.Gamma, dtype=float))
        return np.broadcast_to(g, (self.K,)).copy() if g.size == 1 else g.copy()

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    @classmethod
    def from_mapping(cls, data: Mapping):
        """Build a config from a mapping whose keys match the field names.

        Power, noise and threshold keys accept ``"<x>dBm"``; ``C_0`` accepts
        ``"<x>dB"``.  Unknown keys raise :class:`ConfigError`.
        """
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
        kw = {}
        for k, v in data.items():
            if k in ("P_s", "P_p", "sigma_s_sq", "C_0", "user_radius",
                     "kappa_r", "kappa_d") or k.startswith("alpha_"):
                kw[k] = parse_quantity(v)
            elif k == "Gamma":
                kw[k] = (tuple(parse_quantity(x) for x in v)
                         if isinstance(v, (list, tuple)) else parse_quantity(v))
            elif k.startswith("pos_"):
                kw[k] = tuple(float(x) for x in v)
            elif k == "noise_model":
                kw[k] = str(v)
            else:
                if isinstance(v, bool) or int(v) != v:
                    raise ConfigError(f"{k} must be an integer, got {v!r}")
                kw[k] = int(v)
        return cls(**kw)

    def to_mapping(self):
        d = dataclasses.asdict(self)
        for k, v in d.items():
            if isinstance(v, tuple):
                d[k] = list(v)
        return d


def load_config(path):
    """Read a YAML scenario file into a :class:`SystemConfig`."""
    data = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    if not isinstance(data, dict):
        raise ConfigError("scenario file must hold a mapping")
    return SystemConfig.from_mapping(data)


def path_loss(d, alpha, C_0=1e-3):
    """Large-scale power gain ``C_0 * d**(-alpha)``."""
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise ValueError("distance must be strictly positive")
    out = C_0 * d ** (-float(alpha))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class Geometry:
    """User placement.  ``su_side[l]`` / ``pu_side[k]`` are ``"t"`` or ``"r"``."""

    su_pos: np.ndarray
    pu_pos: np.ndarray
    su_side: tuple
    pu_side: tuple

    @property
    def L_t(self):
        return [l for l, s in enumerate(self.su_side) if s == "t"]

    @property
    def L_r(self):
        return [l for l, s in enumerate(self.su_side) if s == "r"]

    @property
    def K_t(self):
        return [k for k, s in enumerate(self.pu_side) if s == "t"]

    @property
    def K_r(self):
        return [k for k, s in enumerate(self.pu_side) if s == "r"]


def _split_sides(count):
    n_t = (count + 1) // 2
    return tuple(["t"] * n_t + ["r"] * (count - n_t))


def make_geometry(config: SystemConfig, seed: int) -> Geometry:
    """Place users uniformly at random on the circle around the surface.

    The reflection side is the half-plane containing the SBS; the
    transmission side is the opposite half.  Sides are split as evenly as
    possible (transmission side takes the extra user when the count is odd).
    """
    rng = np.random.default_rng([int(seed), 0x6E0])
    ris = np.asarray(config.pos_ris, dtype=float)
    sbs = np.asarray(config.pos_sbs, dtype=float)
    # unit normal pointing towards the SBS (reflection side)
    towards = sbs - ris
    base = math.atan2(towards[1], towards[0])

    def place(sides):
        pos = np.zeros((len(sides), 2))
        for i, s in enumerate(sides):
            u = rng.uniform(-0.5, 0.5) * math.pi * 0.98
            ang = base + u if s == "r" else base + math.pi + u
            pos[i] = ris + config.user_radius * np.array([math.cos(ang), math.sin(ang)])
        return pos

    su_side = _split_sides(config.L)
    pu_side = _split_sides(config.K)
    return Geometry(place(su_side), place(pu_side), su_side, pu_side)


@dataclass
class ChannelSet:
    """All channel matrices for one Monte-Carlo draw.

    ``G_s`` maps SBS -> surface (N x M_s); ``G_l[l]`` surface -> SU l
    (U_s x N); ``G_k[k]`` surface -> PU k (U_p x N); ``D_l`` / ``Dhat_k`` are
    the direct SBS links.  ``su_side`` / ``pu_side`` tag which surface
    coefficient matrix serves each user.
    """

    D_l: list
    Dhat_k: list
    G_s: np.ndarray
    G_l: list
    G_k: list
    sigma_l_sq: np.ndarray
    su_side: tuple
    pu_side: tuple
    P_s: float = 1.0
    Gamma: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def L(self):
        return len(self.D_l)

    @property
    def K(self):
        return len(self.Dhat_k)

    @property
    def N(self):
        return self.G_s.shape[0]

    @property
    def M_s(self):
        return self.G_s.shape[1]

    def side_users(self, side):
        return [l for l, s in enumerate(self.su_side) if s == side]

    def side_pus(self, side):
        return [k for k, s in enumerate(self.pu_side) if s == side]

    def without_surface(self):
        """Copy with every surface-related channel set to zero."""
        return dataclasses.replace(
            self, G_s=np.zeros_like(self.G_s),
            G_l=[np.zeros_like(g) for g in self.G_l],
            G_k=[np.zeros_like(g) for g in self.G_k])


def _ula(n, phi):
    """Half-wavelength ULA response along the x axis for direction ``phi``."""
    return np.exp(1j * math.pi * np.arange(n) * math.cos(phi))


def _cn(seed_key, shape):
    """Unit-variance circular complex Gaussian draws from their own stream."""
    rng = np.random.default_rng(seed_key)
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)


def _link(nlos, p_tx, p_rx, alpha, kappa, C_0):
    """Rician channel ``n_rx x n_tx`` with the given NLoS part."""
    n_rx, n_tx = nlos.shape
    d = float(np.hypot(*(np.asarray(p_rx) - np.asarray(p_tx))))
    pl = path_loss(d, alpha, C_0)
    if kappa == 0:
        return math.sqrt(pl) * nlos
    delta = np.asarray(p_rx, dtype=float) - np.asarray(p_tx, dtype=float)
    phi = math.atan2(delta[1], delta[0])
    # departure angle at the transmitter, arrival angle at the receiver
    los = np.outer(_ula(n_rx, phi + math.pi), _ula(n_tx, phi).conj())
    return (math.sqrt(pl * kappa / (kappa + 1)) * los
            + math.sqrt(pl / (kappa + 1)) * nlos)


def generate_channels(config: SystemConfig, geometry: Geometry, seed: int) -> ChannelSet:
    """Draw one Rician realisation of every SBS-side channel.

    The same ``(config, geometry, seed)`` always yields bit-identical arrays.

    Every link, and every surface element within a surface link, draws its
    fading from its own stream of ``seed``.  Growing ``N`` therefore appends
    elements without changing the existing ones, and adding users leaves the
    other users' channels untouched, so sweeps over ``N`` or ``L`` compare
    on common random numbers.  (The line-of-sight array responses are
    prefixes of each other by construction.)
    """
    c = config
    sbs, ris = c.pos_sbs, c.pos_ris
    base = [int(seed), 0xC4A]

    def surface_nlos(kind, idx, n_other):
        # one column (or row, for the SBS link) per element
        cols = [_cn(base + [1, kind, idx, n], n_other) for n in range(c.N)]
        return np.array(cols).reshape(c.N, n_other)

    G_s = _link(surface_nlos(0, 0, c.M_s), sbs, ris, c.alpha_SR, c.kappa_r, c.C_0)
    D_l, G_l = [], []
    for l, p in enumerate(geometry.su_pos):
        D_l.append(_link(_cn(base + [0, 1, l], (c.U_s, c.M_s)), sbs, p, c.alpha_SU,
                         c.kappa_d, c.C_0))
        G_l.append(_link(surface_nlos(1, l, c.U_s).T, ris, p, c.alpha_RU, c.kappa_r, c.C_0))
    Dhat_k, G_k = [], []
    for k, p in enumerate(geometry.pu_pos):
        Dhat_k.append(_link(_cn(base + [0, 2, k], (c.U_p, c.M_s)), sbs, p, c.alpha_SU,
                            c.kappa_d, c.C_0))
        G_k.append(_link(surface_nlos(2, k, c.U_p).T, ris, p, c.alpha_RU, c.kappa_r, c.C_0))
    sigma = np.array([equivalent_noise_power(c, geometry, s) for s in geometry.su_side])
    return ChannelSet(D_l, Dhat_k, G_s, G_l, G_k, sigma, tuple(geometry.su_side),
                      tuple(geometry.pu_side), P_s=c.P_s, Gamma=c.gammas)


def equivalent_noise_power(config: SystemConfig, geometry: Geometry, side: str) -> float:
    """Thermal noise plus PBS interference treated as Gaussian noise.

    Every user sits at ``user_radius`` from the surface, so the value only
    depends on the side through the user-set membership check.
    """
    if side not in SIDES:
        raise ValueError(f"side must be 't' or 'r', got {side!r}")
    c = config
    d_sr = float(np.hypot(*np.subtract(c.pos_ris, c.pos_sbs)))
    d_pr = float(np.hypot(*np.subtract(c.pos_ris, c.pos_pbs)))
    pl_ri = path_loss(c.user_radius, c.alpha_RU, c.C_0)
    if c.noise_model == "printed":
        extra = c.P_p * (path_loss(d_sr, c.alpha_SR, c.C_0) + pl_ri)
    elif c.noise_model == "pbs":
        extra = c.P_p * (path_loss(d_pr, c.alpha_PR, c.C_0) + pl_ri)
    elif c.noise_model == "cascaded":
        extra = c.P_p * path_loss(d_pr, c.alpha_PR, c.C_0) * pl_ri
    else:
        extra = 0.0
    return float(c.sigma_s_sq + extra)


def draw_scene(config: SystemConfig, seed: int):
    """Geometry and channels for one trial, both derived from ``seed``."""
    geo = make_geometry(config, seed)
    return geo, generate_channels(config, geo, seed)

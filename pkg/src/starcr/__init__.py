"""Sum-rate maximisation for an underlay cognitive-radio downlink assisted by
a simultaneously transmitting and reflecting surface (STAR surface).

Modules
-------
scene       geometry, Rician channels, equivalent noise
star        surface coefficients under the independent and coupled models
metrics     aggregate channels, SINR, sum rate, interference temperature
transforms  Lagrangian-dual / quadratic-transform auxiliaries and subproblems
conic       QCQP and SDP solvers with KKT validation
sca         surface step for the independent model
pdd         surface step for the coupled model
bcd         block coordinate ascent and baseline schemes
harness     Monte-Carlo sweeps and CSV output (CLI: ``starcr``)
"""

from .bcd import (SCHEMES, BcdOptions, BcdState, baseline_conventional_ris,
                  baseline_equal_splitting, baseline_traditional_cr, run_bcd, run_scheme)
from .metrics import f_ldt, interference_temperatures, sinr, sinrs, sum_rate
from .report import SolveReport
from .scene import ChannelSet, ConfigError, SystemConfig, draw_scene, load_config
from .star import Model, StarCoefficients

__version__ = "0.1.0"

__all__ = [
    "SCHEMES",
    "BcdOptions",
    "BcdState",
    "ChannelSet",
    "ConfigError",
    "Model",
    "SolveReport",
    "StarCoefficients",
    "SystemConfig",
    "baseline_conventional_ris",
    "baseline_equal_splitting",
    "baseline_traditional_cr",
    "draw_scene",
    "f_ldt",
    "interference_temperatures",
    "load_config",
    "run_bcd",
    "run_scheme",
    "sinr",
    "sinrs",
    "sum_rate",
]

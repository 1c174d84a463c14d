"""Compare all five schemes on one desk-scale scene.

Draws a single channel realisation (N = 8 elements, two secondary and two
primary users), runs every scheme on it and prints the final sum rate,
iteration count, transmit power and interference margins.

    python demos/compare_schemes.py [seed]
"""
import sys
import warnings

import numpy as np

from starcr.bcd import SCHEMES, run_scheme
from starcr.scene import SystemConfig, draw_scene

seed = int(sys.argv[1]) if len(sys.argv) > 1 else 0
cfg = SystemConfig()  # P_s = 20 dBm, Gamma = -90 dBm, N = 8
geo, ch = draw_scene(cfg, seed)

print(f"seed {seed}: SUs on sides {ch.su_side}, PUs on sides {ch.pu_side}")
print(f"equivalent SU noise power {ch.sigma_l_sq[0]:.3e} W\n")
print(f"{'scheme':<18} {'bit/s/Hz':>12} {'iters':>5} {'power/P_s':>9} {'max IT/Gamma':>12}")

with warnings.catch_warnings():
    warnings.simplefilter("ignore", RuntimeWarning)
    for scheme in SCHEMES:
        rep = run_scheme(scheme, ch, cfg, seed=seed)
        it_ratio = np.max(rep.extra["it"] / cfg.gammas)
        print(f"{scheme:<18} {rep.sum_rate_bits:>12.5e} {rep.iterations:>5d} "
              f"{rep.extra['power'] / cfg.P_s:>9.4f} {it_ratio:>12.6f}")

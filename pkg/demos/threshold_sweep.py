"""Sum rate versus the interference-temperature threshold.

A small Monte-Carlo sweep through the harness API (the same thing the
``starcr run`` command does), printing the per-scheme means.  Below roughly
-80 dBm the primary users' budgets bind; above it the power budget does.

    python demos/threshold_sweep.py [trials]
"""
import sys

from starcr.harness import ExperimentSpec, run_experiment
from starcr.scene import SystemConfig, dbm_to_watt

trials = int(sys.argv[1]) if len(sys.argv) > 1 else 3
levels = [-100, -90, -80, -70]
spec = ExperimentSpec(sweep="Gamma", values=tuple(dbm_to_watt(g) for g in levels),
                      trials=trials, schemes=("star-independent", "conventional-ris",
                                              "traditional-cr"),
                      base=SystemConfig(N=8))
rows, summary = run_experiment(spec)

print(f"{'scheme':<18}" + "".join(f"{g:>12d}" for g in levels) + "   (dBm)")
for scheme in spec.schemes:
    means = [s.mean_bits for s in summary if s.scheme == scheme]
    print(f"{scheme:<18}" + "".join(f"{m:>12.4e}" for m in means))
failed = sum(r.failed for r in rows)
if failed:
    print(f"{failed} trials failed; see the error column of the rows")

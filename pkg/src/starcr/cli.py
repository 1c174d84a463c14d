"""Command-line front end of :mod:`starcr.harness`.

::

    starcr validate spec.yaml
    starcr run spec.yaml --out results/ --workers 4 --seed 7
    starcr trace spec.yaml --out traces/

Exit status: 0 on full success, 2 if some trials failed, 1 on a bad spec.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path

from . import harness
from .bcd import run_scheme
from .scene import ConfigError, draw_scene

EXIT_OK, EXIT_SPEC, EXIT_PARTIAL = 0, 1, 2


def _parser():
    p = argparse.ArgumentParser(prog="starcr", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (("run", "run a Monte-Carlo sweep and write CSV files"),
                        ("trace", "write per-iteration convergence traces"),
                        ("validate", "check a spec file without running it")):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("spec", help="YAML experiment spec file")
        sp.add_argument("--seed", type=int, default=None, help="override the master seed")
        sp.add_argument("--workers", type=int, default=1, help="worker processes (default 1)")
        sp.add_argument("--out", default=".", help="output directory (default: cwd)")
    return p


def _print_summary(summary, stream):
    stream.write(f"{'scheme':<18} {'value':>12} {'trials':>6} {'fail':>4} "
                 f"{'mean bit/s/Hz':>14} {'stderr':>10}\n")
    for s in summary:
        stream.write(f"{s.scheme:<18} {s.value:>12.5g} {s.trials:>6d} {s.failures:>4d} "
                     f"{s.mean_bits:>14.6g} {s.stderr_bits:>10.3g}\n")


def _trace(spec, out):
    """One solve per scheme at the first sweep value and the master seed."""
    out.mkdir(parents=True, exist_ok=True)
    value = spec.values[0]
    cfg = spec.config_for(value)
    failed = 0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        _, channels = draw_scene(cfg, spec.seed)
        for scheme in spec.schemes:
            try:
                rep = run_scheme(scheme, channels, cfg, spec.options(), seed=spec.seed)
            except Exception as exc:  # keep tracing the remaining schemes
                print(f"{scheme}: {type(exc).__name__}: {exc}", file=sys.stderr)
                failed += 1
                continue
            path = out / f"trace_{scheme}.csv"
            harness.emit_convergence_trace(rep, path)
            failed += not rep.ok
            print(f"{scheme}: {rep.iterations} iterations, {rep.termination}, "
                  f"{rep.sum_rate_bits:.6g} bit/s/Hz -> {path}")
    return failed


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        spec = harness.load_spec(args.spec)
        if args.seed is not None:
            spec = spec.with_seed(args.seed)
        if args.workers < 1:
            raise ConfigError("--workers must be at least 1")
    except ConfigError as exc:
        print(f"invalid spec: {exc}", file=sys.stderr)
        return EXIT_SPEC
    if args.command == "validate":
        print(f"ok: sweep {spec.sweep} over {len(spec.values)} values, {spec.trials} trials, "
              f"schemes {', '.join(spec.schemes)}, seed {spec.seed}")
        return EXIT_OK
    out = Path(args.out)
    if args.command == "trace":
        return EXIT_PARTIAL if _trace(spec, out) else EXIT_OK
    rows, summary = harness.run_experiment(spec, workers=args.workers, out_dir=out)
    _print_summary(summary, sys.stdout)
    failed = sum(r.failed for r in rows)
    if failed:
        print(f"{failed} of {len(rows)} trials failed; see {out / 'results.csv'}",
              file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

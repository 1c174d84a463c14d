"""Monte-Carlo experiment runner.

An experiment sweeps one scalar of the scenario (``P_s``, ``N``, ``Gamma``
or ``L``) and, for every sweep value and trial, draws a scene with seed
``master_seed + trial`` and runs each requested scheme on it.  Because the
geometry and channel draws depend only on that seed and on the dimensions,
schemes are compared on matched channels, and power/threshold sweeps reuse
one draw per trial across all values.

Output files (UTF-8, header row):

``results.csv``
    one row per ``(scheme, value, trial)`` in that order; deterministic, so
    rerunning a spec reproduces it byte for byte.
``timings.csv``
    the same keys plus wall-clock seconds (kept apart because timing is not
    reproducible).
``summary.csv``
    mean and standard error of the sum rate per ``(scheme, value)``.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import math
import traceback
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .bcd import SCHEMES, BcdOptions, run_scheme
from .report import SolveReport
from .scene import ConfigError, SystemConfig, draw_scene, parse_quantity

__all__ = [
    "ExperimentSpec",
    "ResultRow",
    "SummaryRow",
    "SWEEP_VARIABLES",
    "RESULT_COLUMNS",
    "SUMMARY_COLUMNS",
    "load_spec",
    "run_trial",
    "run_experiment",
    "summarise",
    "ordering_violations",
    "write_results",
    "write_summary",
    "write_timings",
    "emit_convergence_trace",
    "trace_rows",
]

SWEEP_VARIABLES = ("P_s", "N", "Gamma", "L")
RESULT_COLUMNS = ("scheme", "sweep", "value", "trial", "seed", "status", "termination",
                  "sum_rate_bits", "iterations", "max_it_slack", "error")
TIMING_COLUMNS = ("scheme", "value", "trial", "wall_time")
SUMMARY_COLUMNS = ("scheme", "sweep", "value", "trials", "failures", "mean_bits",
                   "stderr_bits")


@dataclass(frozen=True)
class ExperimentSpec:
    """One sweep.

    Attributes
    ----------
    sweep : str
        Name of the swept scenario field, one of :data:`SWEEP_VARIABLES`.
    values : tuple
        Sweep values in linear units (watts for ``P_s``/``Gamma``).
    trials : int
        Channel draws per value; trial ``i`` uses seed ``seed + i``.
    schemes : tuple of str
        Subset of :data:`starcr.bcd.SCHEMES`.
    base : SystemConfig
        Scenario the sweep value is substituted into.
    seed : int
        Master seed.
    eps_bcd, max_iter : float, int
        Outer stopping rule forwarded to every scheme.
    """

    sweep: str
    values: tuple
    trials: int = 20
    schemes: tuple = SCHEMES
    base: SystemConfig = field(default_factory=SystemConfig)
    seed: int = 0
    eps_bcd: float = 1e-3
    max_iter: int = 100

    def __post_init__(self):
        if self.sweep not in SWEEP_VARIABLES:
            raise ConfigError(f"sweep must be one of {SWEEP_VARIABLES}, got {self.sweep!r}")
        if len(self.values) == 0:
            raise ConfigError("sweep needs at least one value")
        if isinstance(self.trials, bool) or int(self.trials) != self.trials or self.trials < 1:
            raise ConfigError(f"trials must be a positive integer, got {self.trials!r}")
        if len(self.schemes) == 0:
            raise ConfigError("at least one scheme is required")
        bad = [s for s in self.schemes if s not in SCHEMES]
        if bad:
            raise ConfigError(f"unknown schemes {bad}; choose from {SCHEMES}")
        if not self.eps_bcd > 0 or int(self.max_iter) < 1:
            raise ConfigError("eps_bcd must be positive and max_iter at least 1")
        for v in self.values:
            self.config_for(v)  # raises ConfigError on an invalid value

    def config_for(self, value):
        """Scenario with the sweep variable set to ``value``."""
        if self.sweep in ("N", "L"):
            if isinstance(value, bool) or int(value) != value:
                raise ConfigError(f"{self.sweep} values must be integers, got {value!r}")
            value = int(value)
        return self.base.replace(**{self.sweep: value})

    def with_seed(self, seed):
        return dataclasses.replace(self, seed=int(seed))

    def options(self):
        return BcdOptions(eps_bcd=self.eps_bcd, max_iter=int(self.max_iter))

    @classmethod
    def from_mapping(cls, data):
        """Build a spec from a parsed spec file (see the README for the keys)."""
        if not isinstance(data, dict):
            raise ConfigError("experiment spec must be a mapping")
        known = {"sweep", "values", "trials", "schemes", "base", "seed", "eps_bcd",
                 "max_iter"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown spec keys: {sorted(unknown)}")
        for key in ("sweep", "values"):
            if key not in data:
                raise ConfigError(f"spec is missing {key!r}")
        sweep = data["sweep"]
        raw = data["values"]
        if not isinstance(raw, (list, tuple)):
            raise ConfigError("values must be a list")
        if sweep in ("P_s", "Gamma"):
            values = tuple(parse_quantity(v) for v in raw)
        else:
            values = tuple(raw)
        base = SystemConfig.from_mapping(data.get("base") or {})
        schemes = data.get("schemes", SCHEMES)
        if isinstance(schemes, str):
            schemes = [schemes]
        try:
            return cls(sweep=sweep, values=values, trials=data.get("trials", 20),
                       schemes=tuple(schemes), base=base, seed=int(data.get("seed", 0)),
                       eps_bcd=float(data.get("eps_bcd", 1e-3)),
                       max_iter=int(data.get("max_iter", 100)))
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from exc


def load_spec(path):
    """Parse a YAML experiment spec file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read spec file: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"spec file is not valid YAML: {exc}") from exc
    return ExperimentSpec.from_mapping(data)


@dataclass
class ResultRow:
    """Outcome of one scheme on one channel draw."""

    scheme: str
    sweep: str
    value: float
    trial: int
    seed: int
    status: str
    termination: str
    sum_rate_bits: float
    iterations: int
    max_it_slack: float
    wall_time: float
    error: str = ""

    @property
    def failed(self):
        return self.status != "ok"


def _fmt(x):
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def run_trial(spec: ExperimentSpec, scheme, value, trial):
    """Run one scheme on the scene of ``trial``; never raises."""
    seed = spec.seed + int(trial)
    report = None
    try:
        cfg = spec.config_for(value)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            _, channels = draw_scene(cfg, seed)
            report = run_scheme(scheme, channels, cfg, spec.options(), seed=seed)
        status = "ok" if report.ok else "failed"
        slack = report.it_slack[-1] if report.it_slack else -math.inf
        return ResultRow(scheme, spec.sweep, value, int(trial), seed, status,
                         report.termination, report.sum_rate_bits, report.iterations,
                         float(slack), report.wall_time,
                         "" if report.ok else report.notes[-1] if report.notes else "")
    except Exception as exc:  # a failing trial is recorded, the run continues
        msg = f"{type(exc).__name__}: {exc}".replace("\n", " ")
        last = traceback.extract_tb(exc.__traceback__)[-1:]
        if last:
            msg += f" [{Path(last[0].filename).name}:{last[0].lineno}]"
        return ResultRow(scheme, spec.sweep, value, int(trial), seed, "error", "",
                         math.nan, 0, math.nan, 0.0, msg)


def _trial_job(args):
    return run_trial(*args)


def run_experiment(spec: ExperimentSpec, workers=1, out_dir=None):
    """Run every ``(scheme, value, trial)`` of ``spec``.

    Parameters
    ----------
    spec : ExperimentSpec
    workers : int
        Number of worker processes; ``1`` runs serially in-process.
    out_dir : path-like, optional
        If given, ``results.csv``, ``timings.csv`` and ``summary.csv`` are
        written there.

    Returns
    -------
    rows : list of ResultRow
        Ordered by ``(scheme, value, trial)`` regardless of completion order.
    summary : list of SummaryRow
    """
    jobs = [(spec, s, v, t) for s in spec.schemes for v in spec.values
            for t in range(spec.trials)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=int(workers)) as pool:
            rows = list(pool.map(_trial_job, jobs))
    else:
        rows = [_trial_job(j) for j in jobs]
    order = {s: i for i, s in enumerate(spec.schemes)}
    rows.sort(key=lambda r: (order[r.scheme], spec.values.index(r.value), r.trial))
    summary = summarise(rows, spec)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_results(rows, out / "results.csv")
        write_timings(rows, out / "timings.csv")
        write_summary(summary, out / "summary.csv")
    return rows, summary


@dataclass(frozen=True)
class SummaryRow:
    scheme: str
    sweep: str
    value: float
    trials: int
    failures: int
    mean_bits: float
    stderr_bits: float


def summarise(rows, spec=None):
    """Mean and standard error of the sum rate per ``(scheme, value)``.

    Failed trials are counted but excluded from the statistics.
    """
    groups = {}
    for r in rows:
        groups.setdefault((r.scheme, r.sweep, r.value), []).append(r)
    out = []
    for (scheme, sweep, value), rs in groups.items():
        good = np.array([r.sum_rate_bits for r in rs if not r.failed], dtype=float)
        n = good.size
        mean = float(np.mean(good)) if n else math.nan
        se = float(np.std(good, ddof=1) / np.sqrt(n)) if n > 1 else math.nan
        out.append(SummaryRow(scheme, sweep, value, len(rs), len(rs) - n, mean, se))
    return out


def ordering_violations(summary, slack=0.02):
    """Check the expected scheme ordering at each sweep value.

    The expected chain is star-independent >= star-coupled >= equal-splitting
    and every STAR scheme >= conventional-ris >= traditional-cr, each allowing
    ``slack`` relative shortfall.  Returns a list of human-readable
    violations (empty when the ordering holds).
    """
    pairs = [("star-independent", "star-coupled"), ("star-coupled", "equal-splitting"),
             ("star-independent", "conventional-ris"), ("star-coupled", "conventional-ris"),
             ("conventional-ris", "traditional-cr")]
    by = {}
    for s in summary:
        by.setdefault(s.value, {})[s.scheme] = s.mean_bits
    bad = []
    for value, means in by.items():
        for hi, lo in pairs:
            if hi in means and lo in means:
                if not means[hi] >= (1.0 - slack) * means[lo]:
                    bad.append(f"value={value!r}: {hi} {means[hi]:.6g} < "
                               f"(1-{slack}) x {lo} {means[lo]:.6g}")
    return bad


def _write_csv(path, header, records):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for rec in records:
        writer.writerow([_fmt(x) for x in rec])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def write_results(rows, path=None):
    """Deterministic per-trial CSV (no timing); returns the CSV text."""
    return _write_csv(path, RESULT_COLUMNS,
                      [tuple(getattr(r, c) for c in RESULT_COLUMNS) for r in rows])


def write_timings(rows, path=None):
    return _write_csv(path, TIMING_COLUMNS,
                      [tuple(getattr(r, c) for c in TIMING_COLUMNS) for r in rows])


def write_summary(summary, path=None):
    return _write_csv(path, SUMMARY_COLUMNS,
                      [tuple(getattr(s, c) for c in SUMMARY_COLUMNS) for s in summary])


def trace_rows(report: SolveReport):
    """Per-iteration records of a solve: header and rows.

    Columns are ``iteration, objective_nats, sum_rate_bits, max_it_slack``
    followed, when the report carries phase data of a coupled run, by
    ``dtheta_1 .. dtheta_N`` (``theta_t - theta_r`` wrapped into
    ``[0, 2 pi)``).  Row ``0`` is the starting point.
    """
    coupled = report.name.endswith("coupled") and report.phase_diff and \
        len(np.atleast_1d(report.phase_diff[0])) > 0
    header = ["iteration", "objective_nats", "sum_rate_bits", "max_it_slack"]
    N = len(np.atleast_1d(report.phase_diff[0])) if coupled else 0
    header += [f"dtheta_{n + 1}" for n in range(N)]
    rows = []
    for i, obj in enumerate(report.objective):
        row = [i, float(obj), float(obj) / math.log(2.0),
               float(report.it_slack[i]) if i < len(report.it_slack) else math.nan]
        if coupled:
            row += [float(x) for x in np.atleast_1d(report.phase_diff[i])]
        rows.append(row)
    return header, rows


def emit_convergence_trace(report: SolveReport, path=None):
    """Write the per-iteration trace of ``report`` as CSV; returns the text."""
    header, rows = trace_rows(report)
    return _write_csv(path, header, rows)

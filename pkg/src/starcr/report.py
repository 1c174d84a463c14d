"""Iteration log shared by every iterative solver in the package."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

__all__ = ["SolveReport", "TERMINATION_REASONS"]

TERMINATION_REASONS = ("converged", "max-iters", "infeasible", "solver-failure", "stalled")


@dataclass
class SolveReport:
    """Per-iteration record of an iterative solve.

    ``objective`` holds one value per completed iteration (``objective[0]`` is
    the value at the starting point where the solver records one).
    ``termination`` is set exactly once through :meth:`finish`.
    """

    name: str = ""
    objective: list = field(default_factory=list)
    it_slack: list = field(default_factory=list)
    violation: list = field(default_factory=list)
    phase_diff: list = field(default_factory=list)
    inner: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)
    termination: str | None = None
    message: str = ""
    wall_time: float = 0.0
    sum_rate_bits: float = float("nan")
    _t0: float = field(default_factory=time.perf_counter, repr=False)

    @property
    def iterations(self):
        """Number of completed iterations (trace entries after the start value)."""
        return max(len(self.objective) - 1, 0)

    def finish(self, reason, message=""):
        if self.termination is not None:
            raise RuntimeError(f"termination already set to {self.termination!r}")
        if reason not in TERMINATION_REASONS:
            raise ValueError(f"unknown termination reason {reason!r}")
        self.termination = reason
        self.message = message
        self.wall_time = time.perf_counter() - self._t0
        return self

    @property
    def ok(self):
        return self.termination in ("converged", "max-iters")

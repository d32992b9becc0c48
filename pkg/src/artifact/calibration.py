"""Fusion at a given step and the step-size search for a precision target."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .data import PolynomialModel, SensorStats, pstd
from .errors import (
    DegenerateWindowError,
    FusionError,
    StepUnderflowError,
    WindowTooCoarseError,
)
from .operator import GlPlan, check_order, gl_apply_model

MIN_STEP = 1e-12


@dataclass(frozen=True)
class FusionResult:
    plan: GlPlan
    impact: np.ndarray
    fused_values: np.ndarray
    fused_mean: float
    amplification: float
    normalized_values: np.ndarray
    normalized_std: float

    @property
    def h(self) -> float:
        return self.plan.h


def fusion_plan(stats: SensorStats, nu: float, h: float) -> GlPlan:
    """Operator plan over the deviation window ``[min S_i, max S_i]``."""
    a, b = stats.window
    if not a < b:
        raise DegenerateWindowError("all sensor deviations are equal; window is empty")
    if not h > 0:
        raise ValueError(f"step must be positive, got {h}")
    if h >= b - a:
        raise WindowTooCoarseError(f"step {h} is not finer than the window length {b - a}")
    return GlPlan.build(nu, h, a, b)


def fuse_values(plan: GlPlan, model: PolynomialModel, impact: np.ndarray, reference: float):
    """Apply ``plan`` at every impact parameter and normalize to ``reference``."""
    fused = np.asarray(gl_apply_model(model, plan, impact))
    mean = float(fused.mean())
    gain = mean / reference
    if not math.isfinite(gain) or gain == 0:
        raise FusionError(f"amplification factor is degenerate ({gain})")
    normalized = fused / gain
    return fused, mean, gain, normalized


def fuse(model: PolynomialModel, stats: SensorStats, nu: float, h: float) -> FusionResult:
    """Fused value per sensor, amplification K and normalized deviation S."""
    nu = check_order(nu)
    plan = fusion_plan(stats, nu, h)
    impact = np.array(stats.per_sensor_std, dtype=float)
    fused, mean, gain, normalized = fuse_values(plan, model, impact, stats.true_value)
    for arr in (impact, fused, normalized):
        arr.setflags(write=False)
    return FusionResult(plan, impact, fused, mean, gain, normalized, pstd(normalized))


@dataclass(frozen=True)
class CalibrationStep:
    h: float
    n: int
    std: float
    amplification: float
    admissible: bool


@dataclass(frozen=True)
class CalibrationTrace:
    target: float
    slack: float
    steps: tuple[CalibrationStep, ...]
    final_h: float
    converged: bool
    tight: bool

    @property
    def final(self) -> CalibrationStep:
        return next(s for s in reversed(self.steps) if s.h == self.final_h)


def _probes(h0: float | None, shrink: float, schedule: Sequence[float] | None, max_iters: int):
    if schedule is not None:
        sched = [float(h) for h in schedule]
        if not sched:
            raise ValueError("probe schedule is empty")
        if any(not b < a for a, b in zip(sched, sched[1:])):
            raise ValueError("probe schedule must be strictly decreasing")
        yield from sched[:max_iters]
        return
    if h0 is None or not h0 > 0:
        raise ValueError(f"initial step must be positive, got {h0}")
    if not 0 < shrink < 1:
        raise ValueError(f"shrink factor must lie in (0, 1), got {shrink}")
    h = float(h0)
    for _ in range(max_iters):
        yield h
        h *= shrink


def calibrate_step(
    model: PolynomialModel,
    stats: SensorStats,
    nu: float,
    target: float,
    h0: float | None = None,
    shrink: float = 0.5,
    slack: float = 0.1,
    max_iters: int = 20,
    schedule: Sequence[float] | None = None,
) -> CalibrationTrace:
    """Shrink the step until the normalized deviation meets ``target``.

    A probe is admissible when ``S <= target``. The search stops at the first
    admissible probe that is also close from below, ``target - S <= slack*target``.
    If the probes run out first, the last admissible probe is returned with
    ``tight=False``; with no admissible probe at all, ``converged`` is False.
    Probes come from ``schedule`` when given, else ``h0 * shrink**i``.
    """
    if not target >= 0:
        raise ValueError(f"precision target must be non-negative, got {target}")
    if not 0 < slack <= 1:
        raise ValueError(f"slack must lie in (0, 1], got {slack}")
    if max_iters < 1:
        raise ValueError("max_iters must be at least 1")

    steps: list[CalibrationStep] = []
    for h in _probes(h0, shrink, schedule, max_iters):
        if h < MIN_STEP:
            raise StepUnderflowError(f"step underflowed to {h}")
        res = fuse(model, stats, nu, h)
        s = res.normalized_std
        ok = s <= target
        steps.append(CalibrationStep(h, res.plan.n, s, res.amplification, ok))
        if ok and target - s <= slack * target:
            return CalibrationTrace(target, slack, tuple(steps), h, True, True)

    admissible = [s for s in steps if s.admissible]
    if admissible:
        return CalibrationTrace(target, slack, tuple(steps), admissible[-1].h, True, False)
    return CalibrationTrace(target, slack, tuple(steps), steps[-1].h, False, False)

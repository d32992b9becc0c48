"""End-to-end run: statistics, fit, step calibration, gain planning, passes."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .calibration import CalibrationTrace, FusionResult, calibrate_step, fuse
from .data import DegreeSelection, SensorDataset, SensorStats, select_degree, sensor_stats
from .errors import FodError, GainUnreachableError
from .operator import check_order
from .oracle import oracle_fuse, oracle_iterate
from .transmission import GainTarget, TransmissionPlan, iterate_fod, iterations_needed

OK = "ok"
PRECISION_UNREACHABLE = "precision-unreachable"
GAIN_UNREACHABLE = "gain-unreachable"
ERROR = "error"

VERIFY_RTOL = 1e-9


@dataclass(frozen=True)
class PipelineConfig:
    nu: float
    target_std: float
    gain: GainTarget
    h0: float | None = None
    schedule: tuple[float, ...] | None = None
    shrink: float = 0.5
    slack: float = 0.1
    max_iters: int = 20
    degree_cap: int = 5
    min_degree: int = 1

    def __post_init__(self):
        check_order(self.nu)
        if not self.target_std >= 0:
            raise ValueError("target_std must be non-negative")
        if self.schedule is not None:
            sched = tuple(float(h) for h in self.schedule)
            if not sched or any(h <= 0 for h in sched):
                raise ValueError("schedule steps must be positive")
            if any(not b < a for a, b in zip(sched, sched[1:])):
                raise ValueError("schedule must be strictly decreasing")
            object.__setattr__(self, "schedule", sched)
        elif self.h0 is None or not self.h0 > 0:
            raise ValueError("either a schedule or a positive h0 is required")
        if self.max_iters < 1 or self.degree_cap < 0:
            raise ValueError("max_iters must be >= 1 and degree_cap >= 0")


@dataclass(frozen=True)
class PipelineReport:
    status: str
    config: PipelineConfig
    stats: SensorStats | None = None
    selection: DegreeSelection | None = None
    calibration: CalibrationTrace | None = None
    fusion: FusionResult | None = None
    transmission: TransmissionPlan | None = None
    iterations: int | None = None
    failed_stage: str | None = None
    message: str = ""
    notes: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return self.status == OK

    @property
    def model(self):
        return self.selection.model if self.selection else None

    @property
    def chosen_h(self) -> float | None:
        return self.calibration.final_h if self.calibration and self.calibration.converged else None

    @property
    def total_gain(self) -> float | None:
        return self.transmission.total_gain if self.transmission else None

    @property
    def pre_std(self) -> float | None:
        return self.stats.system_std if self.stats else None

    @property
    def post_std(self) -> float | None:
        if self.transmission is not None:
            return self.transmission.final_std
        return self.fusion.normalized_std if self.fusion else None

    @property
    def final_values(self) -> np.ndarray | None:
        return self.transmission.final_values if self.transmission else None


def run_pipeline(dataset: SensorDataset, config: PipelineConfig) -> PipelineReport:
    """Run every stage in order; a failing stage yields a partial report."""
    parts: dict = {}
    notes: list[str] = []

    def fail(status, stage, message):
        return PipelineReport(status, config, failed_stage=stage, message=message, notes=tuple(notes), **parts)

    stage = "stats"
    try:
        parts["stats"] = stats = sensor_stats(dataset)
        stage = "fit"
        parts["selection"] = selection = select_degree(
            stats.points, config.degree_cap, stats.true_value, min_degree=config.min_degree
        )
        model = selection.model

        stage = "calibrate"
        try:
            trace = calibrate_step(
                model, stats, config.nu, config.target_std,
                h0=config.h0, shrink=config.shrink, slack=config.slack,
                max_iters=config.max_iters, schedule=config.schedule,
            )
        except FodError as exc:
            return fail(PRECISION_UNREACHABLE, stage, str(exc))
        parts["calibration"] = trace
        if not trace.converged:
            return fail(
                PRECISION_UNREACHABLE, stage,
                f"no probe reached S <= {config.target_std:g} within {len(trace.steps)} probes",
            )
        if not trace.tight:
            notes.append("probe budget exhausted before a probe came within slack of the target")

        stage = "plan"
        parts["fusion"] = fusion = fuse(model, stats, config.nu, trace.final_h)
        target = config.gain.value
        if target < 1:
            notes.append(f"gain target {target:g} < 1 already met; no passes planned")
        try:
            m = iterations_needed(fusion.amplification, target)
        except GainUnreachableError as exc:
            return fail(GAIN_UNREACHABLE, stage, str(exc))
        parts["iterations"] = m

        stage = "iterate"
        parts["transmission"] = plan = iterate_fod(model, stats, config.nu, trace.final_h, m)
        if plan.mismatch_flagged:
            notes.append(
                f"realized gain {plan.total_gain:.6g} differs from planned {plan.planned_gain:.6g}"
            )
        if plan.total_gain < target:
            return fail(GAIN_UNREACHABLE, stage, f"realized gain {plan.total_gain:.6g} < target {target:g}")
        if plan.final_std > config.target_std:
            return fail(
                PRECISION_UNREACHABLE, stage,
                f"deviation after passes {plan.final_std:.6g} exceeds target {config.target_std:g}",
            )
    except FodError as exc:
        return fail(ERROR, stage, f"{type(exc).__name__}: {exc}")
    return PipelineReport(OK, config, notes=tuple(notes), **parts)


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class VerificationSummary:
    checks: tuple[Check, ...] = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> Check:
        return next(c for c in self.checks if c.name == name)


def _close(a: float, b: float, rtol: float = VERIFY_RTOL) -> bool:
    return abs(a - b) <= rtol * max(abs(a), abs(b), 1e-300)


def _allclose(a, b, rtol: float = VERIFY_RTOL) -> bool:
    return len(a) == len(b) and all(_close(float(x), float(y), rtol) for x, y in zip(a, b))


def verify_report(report: PipelineReport, config: PipelineConfig) -> VerificationSummary:
    """Re-derive every claim in a successful report from its own numbers.

    Operator outputs are recomputed with the direct-summation oracle.
    """
    checks: list[Check] = []

    def add(name, ok, detail):
        checks.append(Check(name, bool(ok), detail))

    if report.transmission is None or report.calibration is None or report.stats is None:
        add("complete", False, f"report has no final stage (status {report.status})")
        return VerificationSummary(tuple(checks))

    stats, plan = report.stats, report.transmission
    coeffs = report.model.coefficients
    impact = stats.per_sensor_std.tolist()
    ref = stats.true_value
    target_gain = config.gain.value

    post = report.post_std
    add("precision", post <= config.target_std, f"post deviation {post:.6g} vs target {config.target_std:g}")
    add("gain", report.total_gain >= target_gain, f"K_total {report.total_gain:.6g} vs target {target_gain:g}")

    k, m = plan.k, plan.m
    power = 1.0
    for _ in range(m):
        power *= k
    below = power / k if m > 0 else None
    if target_gain <= 1:
        bracket = m == 0
    else:
        bracket = target_gain <= power and (m == 0 or below < target_gain)
    add("bracket", bracket, f"k={k:.6g}, m={m}, k^m={power:.6g}, K_g={target_gain:g}")

    product = math.prod(p.gain for p in plan.passes[1:])
    add(
        "product_identity",
        _close(report.total_gain, product) and _close(report.total_gain, float(np.mean(plan.final_values)) / ref),
        f"K_total {report.total_gain!r} vs product of pass gains {product!r}",
    )

    trace_ok = True
    for step in report.calibration.steps:
        _, gain, _, s = oracle_fuse(coeffs, impact, config.nu, step.h, ref)
        trace_ok &= _close(step.std, s) and _close(step.amplification, gain)
    final = report.calibration.final
    trace_ok &= final.std <= config.target_std
    add("calibration_trace", trace_ok, f"{len(report.calibration.steps)} probes recomputed")

    h = report.calibration.final_h
    fused, gain, _, _ = oracle_fuse(coeffs, impact, config.nu, h, ref)
    add(
        "oracle_fusion",
        _allclose(report.fusion.fused_values, fused) and _close(report.fusion.amplification, gain),
        f"pass-0 fusion at h={h:g}",
    )
    values, _, total = oracle_iterate(coeffs, impact, config.nu, h, ref, m)
    add(
        "oracle_iteration",
        _allclose(plan.final_values, values) and _close(plan.total_gain, total),
        f"{m} passes recomputed",
    )
    return VerificationSummary(tuple(checks))

"""Gain targets, iteration counts, and iterated operator passes."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .calibration import FusionResult, fuse, fuse_values
from .data import PolynomialModel, SensorStats, polyfit, pstd
from .errors import FodError, GainUnreachableError, InvalidAttenuationError, IterationRefitError

log = logging.getLogger(__name__)

# k within this of 1 cannot amplify in any practical number of passes
_UNIT_GAIN_TOL = 1e-12
MISMATCH_TOL = 0.05


@dataclass(frozen=True)
class GainTarget:
    """Required end-to-end amplification, given directly or from a link budget."""

    value: float
    distance: float | None = None
    segment_length: float | None = None
    attenuation: float | None = None

    @classmethod
    def direct(cls, value: float) -> "GainTarget":
        value = float(value)
        if not math.isfinite(value) or value <= 0:
            raise ValueError(f"gain target must be finite and positive, got {value}")
        return cls(value)

    @classmethod
    def from_attenuation(cls, distance: float, segment_length: float, attenuation: float) -> "GainTarget":
        return cls(required_gain(distance, segment_length, attenuation), distance, segment_length, attenuation)

    @property
    def derived(self) -> bool:
        return self.attenuation is not None


def required_gain(distance: float, segment_length: float, attenuation: float) -> float:
    """``(1/attenuation) ** (distance/segment_length)``."""
    if not 0 < attenuation < 1:
        raise InvalidAttenuationError(f"attenuation coefficient must lie in (0, 1), got {attenuation}")
    if not (distance > 0 and segment_length > 0):
        raise ValueError("distance and segment length must be positive")
    return (1.0 / attenuation) ** (distance / segment_length)


def _power(k: float, m: int) -> float:
    out = 1.0
    for _ in range(m):
        out *= k
    return out


def iterations_needed(k: float, target: float) -> int:
    """Smallest ``m`` with ``k**m >= target`` (``0`` when ``target <= 1``)."""
    if not (k > 0 and target > 0):
        raise ValueError("k and target must be positive")
    if target <= 1:
        if target < 1:
            log.warning("gain target %.6g < 1 is already met; planning zero passes", target)
        return 0
    if k <= 1 + _UNIT_GAIN_TOL:
        raise GainUnreachableError(f"per-pass gain {k!r} cannot reach target {target!r}")
    m = max(1, math.ceil(math.log(target) / math.log(k)))
    # the log estimate can miss by one at exact powers
    while m > 1 and _power(k, m - 1) >= target:
        m -= 1
    while _power(k, m) < target:
        m += 1
    return m


@dataclass(frozen=True)
class PassRecord:
    index: int
    gain: float
    std: float
    mean: float


@dataclass(frozen=True)
class TransmissionPlan:
    """Per-pass trace and final values of ``m`` amplification passes.

    Pass 0 is the precision fusion: its output is divided by its own gain so
    the amplification passes start from data at the reference scale.
    """

    k: float
    m: int
    total_gain: float
    passes: tuple[PassRecord, ...]
    final_values: np.ndarray
    reference: float
    degree: int
    fusion: FusionResult

    @property
    def planned_gain(self) -> float:
        return _power(self.k, self.m)

    @property
    def gain_mismatch(self) -> float:
        return abs(self.total_gain - self.planned_gain) / self.planned_gain

    @property
    def mismatch_flagged(self) -> bool:
        return self.gain_mismatch > MISMATCH_TOL

    @property
    def final_std(self) -> float:
        """Deviation of the final values rescaled to the reference level."""
        return pstd(self.final_values / self.total_gain)


def _run_passes(fusion: FusionResult, degree: int, start: np.ndarray, first: int, count: int, reference: float):
    plan, impact = fusion.plan, fusion.impact
    values = start
    records = []
    for i in range(first, first + count):
        try:
            refit = polyfit(list(zip(impact, values)), degree)
        except FodError as exc:
            raise IterationRefitError(i, exc) from exc
        out, mean, _, normalized = fuse_values(plan, refit, impact, reference)
        records.append(PassRecord(i, mean / float(values.mean()), pstd(normalized), mean))
        values = out
    return values, records


def iterate_fod(
    model: PolynomialModel,
    stats: SensorStats,
    nu: float,
    h: float,
    m: int,
    resume: TransmissionPlan | None = None,
) -> TransmissionPlan:
    """Run ``m`` amplification passes after the pass-0 fusion at step ``h``.

    Each pass refits a polynomial of the model's degree to the previous values
    on the impact grid and applies the same operator. With ``resume`` the passes
    continue from that plan's final values instead of starting over.
    """
    if m < 0:
        raise ValueError(f"pass count must be non-negative, got {m}")
    if resume is None:
        fusion = fuse(model, stats, nu, h)
        start = np.array(fusion.normalized_values)
        prior = (PassRecord(0, fusion.amplification, fusion.normalized_std, fusion.fused_mean),)
        k = fusion.amplification
    else:
        fusion, start, prior, k = resume.fusion, np.array(resume.final_values), resume.passes, resume.k

    reference = stats.true_value
    final, records = _run_passes(fusion, model.degree, start, len(prior), m, reference)
    passes = prior + tuple(records)
    final = np.array(final)
    final.setflags(write=False)
    total = float(final.mean()) / reference
    n_passes = len(passes) - 1
    plan = TransmissionPlan(k, n_passes, total, passes, final, reference, model.degree, fusion)
    if plan.mismatch_flagged:
        log.warning(
            "realized gain %.6g differs from planned %.6g by %.1f%%",
            plan.total_gain, plan.planned_gain, 100 * plan.gain_mismatch,
        )
    return plan

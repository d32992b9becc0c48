"""Sensor tables, per-sensor statistics, and polynomial model fitting."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .errors import InsufficientDataError, SingularFitError, UnderdeterminedFitError

# relative pivot size below which the scaled design matrix counts as rank deficient
_RANK_TOL = 1e-13
# errors this close (relative to the data scale) are treated as ties
_TIE_RTOL = 1e-9


@dataclass(frozen=True)
class SensorDataset:
    """Repeated readings: rows are measurements, columns are sensors."""

    sensor_ids: tuple[str, ...]
    readings: np.ndarray = field(repr=False)

    def __post_init__(self):
        r = np.array(self.readings, dtype=float)
        if r.ndim != 2:
            raise InsufficientDataError("readings must be a rectangular matrix")
        rows, cols = r.shape
        if cols < 2:
            raise InsufficientDataError(f"need at least 2 sensors, got {cols}")
        if rows < 2:
            raise InsufficientDataError(f"need at least 2 readings per sensor, got {rows}")
        if len(self.sensor_ids) != cols:
            raise InsufficientDataError("sensor label count does not match columns")
        if not np.all(np.isfinite(r)) or np.any(r < 0):
            raise InsufficientDataError("readings must be finite and non-negative")
        r.setflags(write=False)
        object.__setattr__(self, "sensor_ids", tuple(str(s) for s in self.sensor_ids))
        object.__setattr__(self, "readings", r)

    @property
    def n_sensors(self) -> int:
        return self.readings.shape[1]

    @property
    def n_readings(self) -> int:
        return self.readings.shape[0]

    def __eq__(self, other):
        if not isinstance(other, SensorDataset):
            return NotImplemented
        return self.sensor_ids == other.sensor_ids and np.array_equal(
            self.readings, other.readings
        )


@dataclass(frozen=True)
class SensorStats:
    per_sensor_mean: np.ndarray
    per_sensor_std: np.ndarray
    true_value: float
    system_std: float

    @property
    def points(self) -> list[tuple[float, float]]:
        """``(deviation, mean)`` pairs: impact parameter against measurement."""
        return list(zip(self.per_sensor_std.tolist(), self.per_sensor_mean.tolist()))

    @property
    def window(self) -> tuple[float, float]:
        return float(self.per_sensor_std.min()), float(self.per_sensor_std.max())


def sensor_stats(dataset: SensorDataset) -> SensorStats:
    """Column means, population deviations, their grand mean and spread."""
    r = dataset.readings
    means = r.mean(axis=0)
    stds = r.std(axis=0)  # ddof=0: population deviation
    means.setflags(write=False)
    stds.setflags(write=False)
    return SensorStats(means, stds, float(means.mean()), float(means.std()))


@dataclass(frozen=True)
class PolynomialModel:
    """``E(x) = a_0 + a_1 x + ... + a_n x^n`` fitted over ``[domain_lo, domain_hi]``."""

    coefficients: tuple[float, ...]
    domain_lo: float = -math.inf
    domain_hi: float = math.inf

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coefficients)
        if not coeffs or not all(math.isfinite(c) for c in coeffs):
            raise ValueError("coefficients must be a non-empty sequence of finite reals")
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        acc = np.full_like(x, self.coefficients[-1])
        for c in reversed(self.coefficients[:-1]):
            acc = acc * x + c
        return acc if acc.ndim else float(acc)


def polyfit(points: Sequence[tuple[float, float]], degree: int) -> PolynomialModel:
    """Ordinary least squares over the monomial basis, solved by QR.

    Columns are scaled to unit norm before factorization and the scaling is
    undone on the coefficients.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    x, y = pts[:, 0], pts[:, 1]
    if degree < 0:
        raise ValueError(f"degree must be non-negative, got {degree}")
    if degree >= len(x):
        raise UnderdeterminedFitError(
            f"degree {degree} needs more than {len(x)} points"
        )
    vander = np.vander(x, degree + 1, increasing=True)
    norms = np.linalg.norm(vander, axis=0)
    if np.any(norms == 0):
        raise SingularFitError("design matrix has an all-zero column")
    q, r = np.linalg.qr(vander / norms)
    diag = np.abs(np.diag(r))
    if diag.min() <= _RANK_TOL * diag.max():
        raise SingularFitError(f"design matrix is rank deficient at degree {degree}")
    coeffs = np.linalg.solve(r, q.T @ y) / norms
    return PolynomialModel(tuple(coeffs), float(x.min()), float(x.max()))


Metric = Literal["true_value", "residual"]


@dataclass(frozen=True)
class DegreeSelection:
    chosen_degree: int
    total_error_by_degree: dict[int, float]
    excluded: dict[int, str]
    model: PolynomialModel


def degree_error(model: PolynomialModel, points, true_value: float, metric: Metric = "true_value") -> float:
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    fitted = model(pts[:, 0])
    target = true_value if metric == "true_value" else pts[:, 1]
    return float(np.abs(fitted - target).sum())


def select_degree(
    points: Sequence[tuple[float, float]],
    max_degree: int,
    true_value: float,
    *,
    min_degree: int = 1,
    metric: Metric = "true_value",
) -> DegreeSelection:
    """Fit every candidate degree and keep the one with the smallest total error.

    With ``metric="true_value"`` the error is ``sum |fit(x_i) - true_value|``;
    with ``metric="residual"`` it is ``sum |fit(x_i) - y_i|``. Ties go to the
    lower degree.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    top = min(max_degree, len(pts) - 1)
    if top < min_degree:
        raise UnderdeterminedFitError(
            f"no candidate degrees in [{min_degree}, {max_degree}] for {len(pts)} points"
        )
    errors: dict[int, float] = {}
    excluded: dict[int, str] = {}
    models: dict[int, PolynomialModel] = {}
    for d in range(min_degree, top + 1):
        try:
            models[d] = polyfit(pts, d)
        except (SingularFitError, UnderdeterminedFitError) as exc:
            excluded[d] = str(exc)
            continue
        errors[d] = degree_error(models[d], pts, true_value, metric)
    if not errors:
        raise SingularFitError("every candidate degree failed to fit")
    tie = _TIE_RTOL * float(np.abs(pts[:, 1]).sum())
    best = min(errors.values())
    chosen = min(d for d, e in errors.items() if e <= best + tie)
    return DegreeSelection(chosen, errors, excluded, models[chosen])


def pstd(values) -> float:
    """Population standard deviation."""
    return float(np.std(np.asarray(values, dtype=float)))

r"""Grünwald-Letnikov weights, the windowed differintegral, and its spectrum.

The operator of order :math:`\nu` with step :math:`h` and ``n`` memory terms is

.. math::

    D_h^\nu f(x) = h^{-\nu} \sum_{j=0}^{n} w_j f(x - j h),
    \qquad w_j = (-1)^j \binom{\nu}{j},

with ``n = floor((b - a) / h)`` for a window ``[a, b]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Literal, Sequence

import numpy as np

from .errors import EmptyInputError, InvalidOrderError, InvalidPlanError

ORDER_MIN = 0.0
ORDER_MAX = 2.0
MAX_TERMS = 5_000_000

# relative distance to an integer below which (b - a) / h snaps to it
_TERM_SNAP = 1e-9

Boundary = Literal["hold", "truncate", "extrapolate"]


def check_order(nu: float) -> float:
    """Return ``nu`` as a float, rejecting non-finite or out-of-range orders."""
    nu = float(nu)
    if not math.isfinite(nu) or not ORDER_MIN <= nu <= ORDER_MAX:
        raise InvalidOrderError(
            f"fractional order must lie in [{ORDER_MIN}, {ORDER_MAX}], got {nu}"
        )
    return nu


def term_count(a: float, b: float, h: float) -> int:
    """``floor((b - a) / h)``, snapping ratios that are an integer up to rounding."""
    ratio = (b - a) / h
    nearest = round(ratio)
    if nearest > 0 and abs(ratio - nearest) <= _TERM_SNAP * nearest:
        return int(nearest)
    return int(math.floor(ratio))


def gl_weights(nu: float, n: int) -> np.ndarray:
    """Signed binomial weights ``w_0..w_n`` by the multiplicative recurrence.

    >>> gl_weights(0.5, 4).tolist()
    [1.0, -0.5, -0.125, -0.0625, -0.0390625]
    """
    nu = check_order(nu)
    if n < 0:
        raise InvalidPlanError(f"term count must be non-negative, got {n}")
    w = np.empty(n + 1)
    w[0] = 1.0
    for j in range(1, n + 1):
        w[j] = w[j - 1] * ((j - 1 - nu) / j)
    return w


@dataclass(frozen=True)
class GlPlan:
    """Order, step, window and precomputed weights for one operator."""

    nu: float
    h: float
    window_lo: float
    window_hi: float
    n: int
    weights: np.ndarray = field(repr=False, compare=False)

    def __post_init__(self):
        if not (math.isfinite(self.h) and self.h > 0):
            raise InvalidPlanError(f"step must be positive, got {self.h}")
        if not self.window_lo < self.window_hi:
            raise InvalidPlanError(
                f"window must satisfy a < b, got [{self.window_lo}, {self.window_hi}]"
            )
        if len(self.weights) != self.n + 1:
            raise InvalidPlanError("weights length does not match term count")
        self.weights.setflags(write=False)

    @classmethod
    def build(cls, nu: float, h: float, a: float, b: float) -> "GlPlan":
        nu = check_order(nu)
        h = float(h)
        if not (math.isfinite(h) and h > 0):
            raise InvalidPlanError(f"step must be positive, got {h}")
        if not a < b:
            raise InvalidPlanError(f"window must satisfy a < b, got [{a}, {b}]")
        n = term_count(a, b, h)
        if n > MAX_TERMS:
            raise InvalidPlanError(f"step {h} needs {n} terms over the window (limit {MAX_TERMS})")
        return cls(nu, h, float(a), float(b), n, gl_weights(nu, n))

    @property
    def scale(self) -> float:
        return self.h ** (-self.nu)

    @property
    def offsets(self) -> np.ndarray:
        """Backward sample offsets ``j*h`` for ``j = 0..n``."""
        return np.arange(self.n + 1) * self.h


def gl_apply_model(model: Callable[[np.ndarray], np.ndarray], plan: GlPlan, x) -> float | np.ndarray:
    """Apply the operator to a callable model at ``x`` (scalar or array).

    The model is evaluated at ``x - j*h`` even when that falls below the
    window; polynomial models extrapolate analytically.
    """
    xs = np.asarray(x, dtype=float)
    pts = xs[..., None] - plan.offsets
    out = plan.scale * (np.asarray(model(pts), dtype=float) * plan.weights).sum(axis=-1)
    if xs.ndim == 0:
        return float(out)
    return out


def gl_apply_sequence(
    values: Sequence[float],
    plan: GlPlan,
    boundary: Boundary = "hold",
    extrapolate_degree: int = 1,
) -> np.ndarray:
    """Apply the operator to samples on a grid of spacing ``plan.h``.

    ``boundary`` controls samples before index 0: ``"hold"`` repeats the first
    sample, ``"truncate"`` drops the missing terms, ``"extrapolate"`` refits a
    polynomial of ``extrapolate_degree`` to the samples and evaluates it.
    """
    v = np.asarray(values, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise EmptyInputError("sequence must contain at least one value")
    n = plan.n
    w = plan.weights
    if boundary == "truncate":
        out = np.array(
            [w[: min(n, i) + 1] @ v[i::-1][: min(n, i) + 1] for i in range(v.size)]
        )
        return plan.scale * out
    if boundary == "hold":
        left = np.full(n, v[0])
    elif boundary == "extrapolate":
        from .data import polyfit

        grid = np.arange(v.size) * plan.h
        deg = min(extrapolate_degree, v.size - 1)
        fit = polyfit(list(zip(grid, v)), deg)
        left = fit(-np.arange(n, 0, -1) * plan.h)
    else:
        raise ValueError(f"unknown boundary mode {boundary!r}")
    ext = np.concatenate([left, v])
    # ext[n + i - j] is the sample j steps behind index i
    out = np.array([w @ ext[n + i - np.arange(n + 1)] for i in range(v.size)])
    return plan.scale * out


@dataclass(frozen=True)
class SpectralPoint:
    omega: float
    amplitude: float
    phase: float


def spectral_response(nu: float, omegas: Sequence[float]) -> list[SpectralPoint]:
    """Amplitude ``|w|**nu`` and phase ``(pi*nu/2)*sign(w)`` of the ideal operator."""
    nu = check_order(nu)
    points = []
    for w in omegas:
        w = float(w)
        if not math.isfinite(w):
            raise ValueError(f"frequency must be finite, got {w}")
        amp = abs(w) ** nu  # 0.0 ** 0.0 == 1.0
        phase = math.copysign(math.pi * nu / 2, w) if w != 0 else 0.0
        points.append(SpectralPoint(w, amp, phase))
    return points

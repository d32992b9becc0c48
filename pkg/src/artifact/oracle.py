"""Direct-summation reference for the fusion and iteration routes.

Everything here is deliberately naive and shares no code with the main path:
weights come from ``scipy.special.binom`` rather than the recurrence, the
polynomial is summed term by term rather than by Horner's rule, and refits
use ``numpy.linalg.lstsq`` (SVD) rather than the QR route.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import binom


def direct_weight(nu: float, j: int) -> float:
    return (-1) ** j * float(binom(nu, j))


def direct_terms(a: float, b: float, h: float) -> int:
    return math.floor((b - a) / h * (1 + 1e-9))


def direct_poly(coeffs, x: float) -> float:
    return math.fsum(c * x**p for p, c in enumerate(coeffs))


def direct_gl(coeffs, nu: float, h: float, n: int, x: float) -> float:
    terms = [direct_weight(nu, j) * direct_poly(coeffs, x - j * h) for j in range(n + 1)]
    return h ** (-nu) * math.fsum(terms)


def lstsq_fit(xs, ys, degree: int) -> list[float]:
    design = np.array([[x**p for p in range(degree + 1)] for x in xs])
    sol, *_ = np.linalg.lstsq(design, np.asarray(ys, dtype=float), rcond=None)
    return sol.tolist()


def oracle_fuse(coeffs, impact, nu: float, h: float, reference: float):
    """Return ``(fused, K, normalized, S)`` by direct summation."""
    a, b = min(impact), max(impact)
    n = direct_terms(a, b, h)
    fused = [direct_gl(coeffs, nu, h, n, x) for x in impact]
    gain = math.fsum(fused) / len(fused) / reference
    normalized = [f / gain for f in fused]
    mu = math.fsum(normalized) / len(normalized)
    s = math.sqrt(math.fsum((v - mu) ** 2 for v in normalized) / len(normalized))
    return fused, gain, normalized, s


def oracle_iterate(coeffs, impact, nu: float, h: float, reference: float, m: int):
    """Return ``(final_values, per_pass_gains, K_total)`` for ``m`` passes."""
    a, b = min(impact), max(impact)
    n = direct_terms(a, b, h)
    degree = len(coeffs) - 1
    _, _, values, _ = oracle_fuse(coeffs, impact, nu, h, reference)
    gains = []
    for _ in range(m):
        refit = lstsq_fit(impact, values, degree)
        out = [direct_gl(refit, nu, h, n, x) for x in impact]
        gains.append(math.fsum(out) / math.fsum(values))
        values = out
    total = math.fsum(values) / len(values) / reference
    return values, gains, total

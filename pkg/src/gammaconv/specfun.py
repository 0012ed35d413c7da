"""Special functions evaluated in log/scaled space.

Everything here is a pure function.  Values that can overflow a double
(large Kummer arguments, big gamma-kernel products) are returned as
:class:`ScaledValue`, a (log magnitude, sign) pair; conversion back to a
plain float is the caller's explicit, checked step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as sp

from .errors import ConvergenceError, DomainError

__all__ = [
    "SeriesControl",
    "ScaledValue",
    "DEFAULT_CONTROL",
    "ln_gamma",
    "reg_lower_gamma",
    "pochhammer_log",
    "kummer_1f1",
    "kummer_1f1_terms",
]

_NEG_INF = float("-inf")


@dataclass(frozen=True)
class SeriesControl:
    """Truncation policy for infinite series.

    rel_tol: relative tolerance for dropping the series tail, in (0, 1).
    max_terms: hard cap on the number of terms per series dimension.
    """

    rel_tol: float = 1e-15
    max_terms: int = 10_000

    def __post_init__(self):
        if not (0.0 < self.rel_tol < 1.0):
            raise DomainError(f"rel_tol must be in (0, 1), got {self.rel_tol}")
        if self.max_terms < 1:
            raise DomainError(f"max_terms must be >= 1, got {self.max_terms}")


DEFAULT_CONTROL = SeriesControl()


@dataclass(frozen=True)
class ScaledValue:
    """A real number stored as sign * exp(log_magnitude).

    sign is 0 iff the value is exactly zero, in which case log_magnitude
    is -inf by convention.
    """

    log_magnitude: float
    sign: int

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise DomainError(f"sign must be -1, 0, or +1, got {self.sign}")
        if self.sign == 0 and self.log_magnitude != _NEG_INF:
            raise DomainError("zero ScaledValue must carry -inf log magnitude")

    @classmethod
    def zero(cls) -> "ScaledValue":
        return cls(_NEG_INF, 0)

    @classmethod
    def from_float(cls, value: float) -> "ScaledValue":
        if value == 0.0:
            return cls.zero()
        return cls(math.log(abs(value)), 1 if value > 0 else -1)

    def to_float(self) -> float:
        """Convert to a plain float; raises OverflowError past the double range."""
        if self.sign == 0:
            return 0.0
        if self.log_magnitude > 709.0:
            raise OverflowError(
                f"scaled value exp({self.log_magnitude:.6g}) exceeds double range"
            )
        return self.sign * math.exp(self.log_magnitude)


def ln_gamma(x: float) -> float:
    """log Gamma(x) for x > 0."""
    if not x > 0:
        raise DomainError(f"ln_gamma requires x > 0, got {x}")
    return math.lgamma(x)


def reg_lower_gamma(a, x):
    """Regularized lower incomplete gamma P(a, x) = gamma(a, x) / Gamma(a).

    Accepts scalars or numpy arrays in either slot; a > 0 and x >= 0.
    """
    a_arr = np.asarray(a, dtype=float)
    x_arr = np.asarray(x, dtype=float)
    if np.any(a_arr <= 0):
        raise DomainError("reg_lower_gamma requires a > 0")
    if np.any(x_arr < 0):
        raise DomainError("reg_lower_gamma requires x >= 0")
    out = sp.gammainc(a_arr, x_arr)
    if np.isscalar(a) and np.isscalar(x):
        return float(out)
    return out


def pochhammer_log(x: float, m: int) -> ScaledValue:
    """Rising factorial (x)_m = x (x+1) ... (x+m-1) as a scaled value."""
    if not x > 0:
        raise DomainError(f"pochhammer_log requires x > 0, got {x}")
    if m < 0:
        raise DomainError(f"pochhammer_log requires m >= 0, got {m}")
    if m == 0:
        return ScaledValue(0.0, 1)
    # Direct log-product keeps the lgamma-difference identity a real test.
    log_mag = float(np.sum(np.log(x + np.arange(m, dtype=float))))
    return ScaledValue(log_mag, 1)


def _kummer_series_pos(a: float, b: float, z: float, ctrl: SeriesControl):
    """Sum sum_k (a)_k z^k / ((b)_k k!) for z > 0, a > 0.

    All terms are positive.  Terms are generated in blocks from the ratio
    recurrence t_{k+1} = t_k (a+k) z / ((b+k)(k+1)) and accumulated with a
    running log-scale offset.  Termination requires two consecutive terms
    below rel_tol relative to the accumulated sum.
    """
    log_tol = math.log(ctrl.rel_tol)
    sqrt_z = math.sqrt(z)
    # Terms peak near k ~ z and fall off like exp(-c^2/2) at k = z +/- c
    # sqrt(z).  For large z, anchor the recurrence just below the peak
    # window: the skipped head contributes at most ~z exp(-c^2/2) of the
    # peak term, kept under rel_tol by the choice of c.  This makes the
    # cost O(sqrt(z)) instead of O(z).
    c = math.sqrt(2.0 * (-log_tol + math.log1p(z) + 5.0))
    k_start = int(z - c * sqrt_z)
    if z > 256.0 and k_start > 0:
        log_t = (
            math.lgamma(a + k_start)
            - math.lgamma(a)
            + k_start * math.log(z)
            - math.lgamma(b + k_start)
            + math.lgamma(b)
            - math.lgamma(k_start + 1.0)
        )
        log_sum = log_t
        k0 = k_start
        terms = k_start + 1
        first = max(int(min(ctrl.max_terms, 2.2 * c * sqrt_z + 64.0)), 4)
    else:
        log_sum = 0.0  # log of partial sum; starts at t_0 = 1
        log_t = 0.0  # log of the most recent term
        k0 = 0
        terms = 1
        first = max(int(min(ctrl.max_terms, z + 12.0 * sqrt_z + 64.0)), 4)
    block = first
    while True:
        k = np.arange(k0, k0 + block, dtype=float)
        # Single fused log of the (positive) term ratio.
        log_ratio = np.log((a + k) * z / ((b + k) * (k + 1.0)))
        log_terms = log_t + np.cumsum(log_ratio)
        m = max(float(log_terms.max()), log_sum)
        log_sum = m + math.log(
            math.exp(log_sum - m) + float(np.exp(log_terms - m).sum())
        )
        log_t = float(log_terms[-1])
        terms += block
        threshold = log_sum + log_tol
        if log_terms[-1] < threshold and log_terms[-2] < threshold:
            # Trim the reported term count to the first index at which two
            # consecutive terms fell under tolerance.
            below = log_terms < threshold
            idx = np.flatnonzero(below[1:] & below[:-1])
            if idx.size:
                terms = k0 + int(idx[0]) + 3  # +1 for t_0, +2 for the pair
            return log_sum, terms
        if terms >= ctrl.max_terms:
            raise ConvergenceError(
                f"1F1({a}, {b}, {z}) did not converge within "
                f"{ctrl.max_terms} terms (last relative term "
                f"{math.exp(log_t - log_sum):.3e})",
                terms_used=terms,
                last_term=math.exp(log_t - log_sum),
            )
        k0 += block
        block = 64


def kummer_1f1_terms(
    a: float, b: float, z: float, ctrl: SeriesControl = DEFAULT_CONTROL
) -> tuple[ScaledValue, int]:
    """Kummer 1F1(a; b; z) as a scaled value, plus the series-term count.

    Requires a >= 0 and b > 0.  For z < 0 the reflection
    1F1(a; b; z) = e^z 1F1(b-a; b; -z) is applied so the series is summed
    with non-negative terms only; this additionally needs b >= a, which
    every caller in this package satisfies.
    """
    if not b > 0:
        raise DomainError(f"kummer_1f1 requires b > 0, got b={b}")
    if a < 0:
        raise DomainError(f"kummer_1f1 requires a >= 0, got a={a}")
    if z < 0:
        if b - a < 0:
            raise DomainError(
                f"negative-argument reflection needs b >= a, got a={a}, b={b}"
            )
        inner, terms = kummer_1f1_terms(b - a, b, -z, ctrl)
        return ScaledValue(inner.log_magnitude + z, inner.sign), terms
    if a == 0 or z == 0:
        return ScaledValue(0.0, 1), 1
    log_sum, terms = _kummer_series_pos(a, b, z, ctrl)
    return ScaledValue(log_sum, 1), terms


def kummer_1f1(
    a: float, b: float, z: float, ctrl: SeriesControl = DEFAULT_CONTROL
) -> ScaledValue:
    """Kummer confluent hypergeometric function 1F1(a; b; z), scaled."""
    value, _ = kummer_1f1_terms(a, b, z, ctrl)
    return value

"""Exact pmf of renewal counts under mixture-of-exponentials holding times.

Three evaluation routes for Pr(N(t) = n):

* the direct Kummer-function formula for a two-component mixture
  (``pmf_s2``), which bypasses all convolution CDFs;
* the same quantity assembled from differences of convolution CDFs
  (``pmf_raw_s2``), kept as an independent oracle and timing baseline;
* the general mixture route over compositions of n (``pmf_general``),
  which reduces to ``pmf_s2`` for two components.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import comb

import numpy as np
from scipy import special as sp

from . import barnabani, mathai, moschopoulos
from .errors import BudgetError, DomainError, FitFailureError
from .model import (
    ConvolutionSpec,
    EvalResult,
    GammaComponent,
    MixtureExpSpec,
    canonicalize,
    validate_mixture,
)
from .specfun import DEFAULT_CONTROL, SeriesControl, kummer_1f1

__all__ = [
    "RenewalQuery",
    "h_diff",
    "pmf_s2",
    "pmf_raw_s2",
    "pmf_general",
    "pmf_normalization",
    "COMPOSITION_BUDGET",
]

#: Default cap on the number of compositions pmf_general may enumerate.
COMPOSITION_BUDGET = 1_000_000

_CDF_METHODS = ("mathai", "moschopoulos", "approx")

_NEG_INF = float("-inf")


@dataclass(frozen=True)
class RenewalQuery:
    """A (time horizon, event count) query for the renewal pmf."""

    t: float
    n: int

    def __post_init__(self):
        if not (math.isfinite(self.t) and self.t > 0):
            raise DomainError(f"t must be positive and finite, got {self.t}")
        if self.n < 0:
            raise DomainError(f"n must be >= 0, got {self.n}")


def h_diff(
    y: float,
    a1: int,
    b1: float,
    a2: int,
    b2: float,
    ctrl: SeriesControl = DEFAULT_CONTROL,
) -> float:
    """F(y; (a1,b1),(a2,b2)) - F(y; (a1+1,b1),(a2,b2)) in closed form.

    H(y) = y^(a1+a2) e^(-y/b1) / (b1^a1 b2^a2 Gamma(a1+a2+1))
           * 1F1(a2; a1+a2+1; y (1/b1 - 1/b2)).

    No ordering constraint on b1, b2; the 1F1 argument may be negative.
    Shapes are the Erlang integers of the renewal application; a1 = a2 = 0
    yields the survival e^(-y/b1) of a single exponential.
    """
    if y <= 0:
        raise DomainError(f"h_diff requires y > 0, got {y}")
    if a1 < 0 or a2 < 0:
        raise DomainError("h_diff requires non-negative integer shapes")
    if b1 <= 0 or b2 <= 0:
        raise DomainError("h_diff requires positive scales")
    z = y * (1.0 / b1 - 1.0 / b2)
    f1 = kummer_1f1(a2, a1 + a2 + 1.0, z, ctrl)
    log_h = (
        (a1 + a2) * math.log(y)
        - y / b1
        - a1 * math.log(b1)
        - a2 * math.log(b2)
        - math.lgamma(a1 + a2 + 1.0)
        + f1.log_magnitude
    )
    return math.exp(log_h)


def _psi_log(b_first: float, b_second: float, t: float, k: int, n: int,
             ctrl: SeriesControl) -> float:
    """log psi(b_first, b_second, t, k, n) from the direct pmf formula."""
    z = t * (1.0 / b_first - 1.0 / b_second)
    f1 = kummer_1f1(n - k, n + 1.0, z, ctrl)
    return -t / b_first + f1.log_magnitude


def _log_f1_family(n: int, z: float, ctrl: SeriesControl) -> "np.ndarray | list":
    """log 1F1(m; n+1; z) for every m = 0..n+1 at a shared z >= 0.

    All parameters are integers, so every term is a ratio of integer
    gamma values; one lgamma lookup table serves the whole family.  The
    series length J follows the same peak-plus-margin rule as the scalar
    Kummer series: terms decay factorially past j ~ z for every row
    because the ratio is at most z / (j + 1).
    """
    if z == 0.0:
        return [0.0] * (n + 2)
    c = math.sqrt(2.0 * (-math.log(ctrl.rel_tol) + math.log1p(z) + 5.0))
    J = int(z + c * math.sqrt(z + 1.0) + 12.0)
    if J >= ctrl.max_terms:
        raise BudgetError(
            f"1F1 family at z={z:.6g} needs ~{J} terms, over the "
            f"max_terms budget {ctrl.max_terms}"
        )
    if (n + 2) * (J + 1) <= 640:
        # Tiny case: plain scalar recurrences beat array dispatch and the
        # largest term is only e^z, safely inside the double range.
        tol = ctrl.rel_tol
        out = [0.0] * (n + 2)
        for m in range(1, n + 2):
            term = 1.0
            total = 1.0
            for j in range(J):
                term *= (m + j) * z / ((n + 1 + j) * (j + 1.0))
                total += term
                if term < tol * total and j >= z:
                    break
            out[m] = math.log(total)
        return out
    log_z = math.log(z)
    G = sp.gammaln(np.arange(n + J + 3, dtype=float))  # G[i] = lgamma(i)
    j = np.arange(J + 1)
    m = np.arange(1, n + 2)
    log_terms = (
        G[m[:, None] + j[None, :]]
        - G[m][:, None]
        + j * log_z
        - (G[n + 1 + j] - G[n + 1] + G[1 + j])
    )
    row_max = log_terms.max(axis=1, keepdims=True)
    log_f1 = row_max[:, 0] + np.log(np.exp(log_terms - row_max).sum(axis=1))
    return np.concatenate(([0.0], log_f1))


def pmf_s2(
    mix: MixtureExpSpec,
    q: RenewalQuery,
    ctrl: SeriesControl = DEFAULT_CONTROL,
) -> float:
    """Pr(N(t) = n) for a two-component mixture, direct 1F1 formula.

    With z = t (1/b1 - 1/b2) >= 0 (swapping components if needed), the
    Kummer transformation folds both psi factors into one family
    F[m] = 1F1(m; n+1; z):

        psi(b1, b2, t, k, n) = e^(-t/b1) F[n - k]
        psi(b2, b1, t, n-k, n) = e^(-t/b2) 1F1(k; n+1; -z)
                               = e^(-t/b1) F[n + 1 - k],

    so one shared table covers every summand.  Summands are assembled in
    log space (binomial coefficient, powers of t, p and the scales) and
    are all non-negative; degenerate weights (p = 0 or 1) drop the
    vanishing side of the bracket.
    """
    mix = validate_mixture(mix)
    if mix.size == 1:
        return _poisson_pmf(q.t / mix.scales[0], q.n)
    if mix.size != 2:
        raise DomainError(f"pmf_s2 requires a 2-component mixture, got {mix.size}")
    p = mix.weights[0]
    b1, b2 = mix.scales
    t, n = q.t, q.n
    z = t / b1 - t / b2
    if z < 0.0:
        p, b1, b2, z = 1.0 - p, b2, b1, -z
    log_f1 = _log_f1_family(n, z, ctrl)
    log_p = math.log(p) if p > 0.0 else _NEG_INF
    log_1mp = math.log1p(-p) if p < 1.0 else _NEG_INF
    base = n * math.log(t) - t / b1

    if isinstance(log_f1, list):
        lgn = math.lgamma(n + 1.0)
        total = 0.0
        for k in range(n + 1):
            if (k and p == 0.0) or (n - k and p == 1.0):
                continue
            log_mix = (k * log_p if k else 0.0) + ((n - k) * log_1mp if n - k else 0.0)
            log_pref = (
                base
                - k * math.log(b1)
                - (n - k) * math.log(b2)
                - math.lgamma(k + 1.0)
                - math.lgamma(n - k + 1.0)
                + log_mix
            )
            bracket = (p * math.exp(log_f1[n - k]) if p > 0.0 else 0.0) + (
                (1.0 - p) * math.exp(log_f1[n + 1 - k]) if p < 1.0 else 0.0
            )
            total += bracket * math.exp(log_pref)
        return min(total, 1.0)

    k = np.arange(n + 1)
    G = sp.gammaln(np.arange(1, n + 2, dtype=float))  # G[i] = lgamma(i + 1)
    log_pref = (
        base
        - k * math.log(b1)
        - (n - k) * math.log(b2)
        - G[k]
        - G[n - k]
        + np.where(k > 0, k * log_p, 0.0)
        + np.where(k < n, (n - k) * log_1mp, 0.0)
    )
    log_bracket = np.logaddexp(log_p + log_f1[n - k], log_1mp + log_f1[n + 1 - k])
    term_log = log_pref + log_bracket
    m = float(term_log.max())
    if m == _NEG_INF:
        return 0.0
    total = math.exp(m) * float(np.exp(term_log - m).sum())
    return min(total, 1.0)


def _poisson_pmf(lam: float, n: int) -> float:
    return math.exp(n * math.log(lam) - lam - math.lgamma(n + 1.0)) if n else math.exp(-lam)


def _conv_cdf(
    components: list[tuple[int, float]],
    y: float,
    method: str,
    ctrl: SeriesControl | None,
    cache: dict | None = None,
) -> float:
    """CDF of a convolution of Erlang components, zero shapes dropped.

    The empty convolution is a point mass at zero, so its CDF is 1 for
    y > 0.  Remaining equal-scale components are merged by canonicalize.
    """
    kept = tuple(sorted((a, b) for a, b in components if a > 0))
    if not kept:
        return 1.0
    if cache is not None and kept in cache:
        return cache[kept]
    spec = canonicalize(
        ConvolutionSpec(tuple(GammaComponent(float(a), b) for a, b in kept))
    )
    if len(spec) == 1:
        (c,) = spec.components
        value = float(sp.gammainc(c.shape, y / c.scale))
    elif method == "mathai":
        value = (
            mathai.cdf2(spec, y, ctrl or DEFAULT_CONTROL).value
            if len(spec) == 2
            else mathai.cdf_n(spec, y, ctrl).value
        )
    elif method == "moschopoulos":
        value = moschopoulos.cdf(spec, y, ctrl or DEFAULT_CONTROL).value
    elif method == "approx":
        try:
            value = barnabani.cdf_approx(
                spec, y, ctrl or barnabani.CONTROL_APPROX
            ).value
        except FitFailureError:
            # Some compositions have weight cumulants no GNBD can match;
            # fall back to the exact series for those terms only.
            value = moschopoulos.cdf(spec, y, ctrl or DEFAULT_CONTROL).value
    else:
        raise DomainError(f"unknown CDF method {method!r}; use one of {_CDF_METHODS}")
    if cache is not None:
        cache[kept] = value
    return value


def pmf_raw_s2(
    mix: MixtureExpSpec,
    q: RenewalQuery,
    method: str = "mathai",
    ctrl: SeriesControl | None = None,
) -> float:
    """Pr(N(t) = n) assembled from convolution-CDF differences (S = 2).

    Same value contract as pmf_s2; exists as an independent oracle and as
    the timing baseline in which H is evaluated through a full CDF method.
    """
    mix = validate_mixture(mix)
    if mix.size == 1:
        return _poisson_pmf(q.t / mix.scales[0], q.n)
    if mix.size != 2:
        raise DomainError(f"pmf_raw_s2 requires a 2-component mixture, got {mix.size}")
    p = mix.weights[0]
    b1, b2 = mix.scales
    t, n = q.t, q.n

    # Every H appearance is evaluated afresh through the chosen CDF
    # method; memoizing repeated shape pairs would change the baseline
    # being measured.
    def h(as1: int, bs1: float, as2: int, bs2: float) -> float:
        f_lo = _conv_cdf([(as1, bs1), (as2, bs2)], t, method, ctrl)
        f_hi = _conv_cdf([(as1 + 1, bs1), (as2, bs2)], t, method, ctrl)
        return max(f_lo - f_hi, 0.0)

    total = 0.0
    for k in range(n + 1):
        log_mix = (
            (k * math.log(p) if k else 0.0)
            + ((n - k) * math.log1p(-p) if n - k else 0.0)
        )
        if (k and p == 0.0) or (n - k and p == 1.0):
            continue
        weight = math.exp(
            math.lgamma(n + 1.0)
            - math.lgamma(k + 1.0)
            - math.lgamma(n - k + 1.0)
            + log_mix
        )
        bracket = p * h(k, b1, n - k, b2) + (1.0 - p) * h(n - k, b2, k, b1)
        total += bracket * weight
    return min(total, 1.0)


def _compositions(n: int, parts: int):
    """Yield all tuples of `parts` non-negative integers summing to n."""
    if parts == 1:
        yield (n,)
        return
    for first in range(n + 1):
        for rest in _compositions(n - first, parts - 1):
            yield (first,) + rest


def pmf_general(
    mix: MixtureExpSpec,
    q: RenewalQuery,
    method: str = "moschopoulos",
    ctrl: SeriesControl | None = None,
    budget: int = COMPOSITION_BUDGET,
) -> float:
    """Pr(N(t) = n) for an S-component mixture via composition enumeration.

    Sums over all compositions (k_1, ..., k_S) of n; each composition
    needs S + 1 distinct convolution CDFs (the base one plus one per
    incremented component), shared through a per-query memo table.
    Enumerations larger than `budget` compositions are rejected.
    """
    mix = validate_mixture(mix)
    s = mix.size
    if s == 1:
        return _poisson_pmf(q.t / mix.scales[0], q.n)
    n_comp = comb(q.n + s - 1, s - 1)
    if n_comp > budget:
        raise BudgetError(
            f"composition count {n_comp} exceeds budget {budget} "
            f"(n={q.n}, S={s})"
        )
    t, n = q.t, q.n
    log_w = [math.log(w) for w in mix.weights]
    cache: dict = {}
    total = 0.0
    for ks in _compositions(n, s):
        base_comps = list(zip(ks, mix.scales))
        f_base = _conv_cdf(base_comps, t, method, ctrl, cache)
        bracket = 0.0
        for s_idx in range(s):
            bumped = list(base_comps)
            bumped[s_idx] = (ks[s_idx] + 1, mix.scales[s_idx])
            f_hi = _conv_cdf(bumped, t, method, ctrl, cache)
            bracket += mix.weights[s_idx] * max(f_base - f_hi, 0.0)
        log_multi = math.lgamma(n + 1.0) - sum(
            math.lgamma(k + 1.0) for k in ks
        ) + sum(k * lw for k, lw in zip(ks, log_w))
        total += bracket * math.exp(log_multi)
    return min(total, 1.0)


def pmf_normalization(
    mix: MixtureExpSpec,
    t: float,
    tail_tol: float = 1e-10,
    method: str = "proposition",
    ctrl: SeriesControl | None = None,
    n_cap: int = 10_000,
) -> tuple[float, int]:
    """Sum Pr(N(t) = n) over n until the running tail estimate drops.

    Returns (accumulated probability, largest n evaluated).  Stops once
    the pmf has passed its mode and fallen below tail_tol.
    """
    mix = validate_mixture(mix)
    total = 0.0
    peak = 0.0
    n = 0
    while n <= n_cap:
        if method == "proposition":
            if mix.size <= 2:
                p_n = pmf_s2(mix, RenewalQuery(t, n), ctrl or DEFAULT_CONTROL)
            else:
                p_n = pmf_general(mix, RenewalQuery(t, n), "moschopoulos", ctrl)
        else:
            p_n = pmf_general(mix, RenewalQuery(t, n), method, ctrl)
        total += p_n
        peak = max(peak, p_n)
        if p_n < tail_tol and peak > 0.0 and p_n < peak:
            mean_count = t / sum(
                w * b for w, b in zip(mix.weights, mix.scales)
            )
            if n > mean_count:
                return total, n
        n += 1
    return total, n_cap


def eval_result(value: float, terms: int = 0) -> EvalResult:
    """Wrap a bare probability in the shared result record."""
    return EvalResult(value, terms, None)

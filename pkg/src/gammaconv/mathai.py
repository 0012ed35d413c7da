"""Exact gamma-convolution density/CDF via confluent hypergeometric series.

For n = 2 the density uses the closed Kummer-function form and the CDF a
negative-binomial-weighted incomplete-gamma series.  For n >= 3 the
density is an (n-1)-fold multiple series summed by shells of constant
total degree; the CDF integrates the same series term by term, which
turns the shell weights into products of negative-binomial masses with
total mass exactly one and yields a rigorous truncation bound.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special as sp

from .errors import ConvergenceError, DomainError
from .model import ConvolutionSpec, EvalResult, canonicalize
from .specfun import DEFAULT_CONTROL, SeriesControl, kummer_1f1_terms

__all__ = ["density2", "cdf2", "density_n", "cdf_n", "CONTROL_N"]

#: Default truncation policy for the n >= 3 nested series (slightly looser
#: than the univariate default, reflecting the larger term count).
CONTROL_N = SeriesControl(rel_tol=1e-13, max_terms=10_000)

_LOG_TINY = math.log(4.9e-324)


def _log_gamma_pdf(x: float, shape: float, scale: float) -> float:
    return (
        (shape - 1.0) * math.log(x)
        - x / scale
        - math.lgamma(shape)
        - shape * math.log(scale)
    )


def _density_at_zero(spec: ConvolutionSpec) -> EvalResult:
    """Analytic x -> 0 limit of the convolution density."""
    gamma = spec.total_shape
    if gamma > 1.0:
        return EvalResult(0.0, 1, 0.0)
    if gamma == 1.0:
        beta1 = spec.components[0].scale
        log_c = float(
            np.sum(spec.shapes * (math.log(beta1) - np.log(spec.scales)))
        )
        return EvalResult(math.exp(log_c) / beta1, 1, 0.0)
    raise DomainError(
        f"density diverges at x = 0 for total shape {gamma} < 1"
    )


def density2(
    spec: ConvolutionSpec, x: float, ctrl: SeriesControl = DEFAULT_CONTROL
) -> EvalResult:
    """Density of a two-component gamma convolution, closed 1F1 form.

    f(x) = (b1/b2)^a2 g(x; a1+a2, b1) 1F1(a2; a1+a2; (1/b1 - 1/b2) x)
    with b1 the smaller scale; fully assembled in log space.  A spec whose
    components merged to a single gamma is evaluated directly.
    """
    spec = canonicalize(spec)
    if len(spec) > 2:
        raise DomainError(f"density2 requires n <= 2 components, got {len(spec)}")
    if x < 0:
        raise DomainError(f"density requires x >= 0, got {x}")
    if x == 0.0:
        return _density_at_zero(spec)
    if len(spec) == 1:
        (c,) = spec.components
        return EvalResult(math.exp(_log_gamma_pdf(x, c.shape, c.scale)), 1, 0.0)
    c1, c2 = spec.components
    gamma = c1.shape + c2.shape
    z = (1.0 / c1.scale - 1.0 / c2.scale) * x
    f1, terms = kummer_1f1_terms(c2.shape, gamma, z, ctrl)
    log_f = (
        c2.shape * (math.log(c1.scale) - math.log(c2.scale))
        + _log_gamma_pdf(x, gamma, c1.scale)
        + f1.log_magnitude
    )
    return EvalResult(0.0 if log_f < _LOG_TINY else math.exp(log_f), terms, None)


def cdf2(
    spec: ConvolutionSpec, y: float, ctrl: SeriesControl = DEFAULT_CONTROL
) -> EvalResult:
    """CDF of a two-component gamma convolution.

    F(y) = sum_k w_k G(y/b1; k + a1 + a2) where the w_k are the masses of a
    negative binomial with size a2 and success probability b1/b2.  The
    remaining weight mass gives the truncation bound
    (1 - sum w_k) G(y/b1; K+1+gamma), valid because G decreases in shape.
    """
    spec = canonicalize(spec)
    if len(spec) > 2:
        raise DomainError(f"cdf2 requires n <= 2 components, got {len(spec)}")
    if y < 0:
        raise DomainError(f"cdf requires y >= 0, got {y}")
    if y == 0.0:
        return EvalResult(0.0, 1, 0.0)
    if len(spec) == 1:
        (c,) = spec.components
        return EvalResult(float(sp.gammainc(c.shape, y / c.scale)), 1, 0.0)
    c1, c2 = spec.components
    gamma = c1.shape + c2.shape
    a2 = c2.shape
    q = c1.scale / c2.scale
    log_q = math.log(c1.scale) - math.log(c2.scale)
    log_1mq = math.log1p(-q)
    u = y / c1.scale

    value = 0.0
    cum_w = 0.0
    k0 = 0
    # NB bulk estimate: mean + 12 sd covers the weight mass far below any
    # practical tolerance; extend geometrically if the bound disagrees.
    mean = a2 * (1.0 - q) / q
    sd = math.sqrt(a2 * (1.0 - q)) / q
    block = max(int(mean + 12.0 * sd) + 32, 32)
    while True:
        k = np.arange(k0, k0 + block, dtype=float)
        log_w = (
            a2 * log_q
            + sp.gammaln(a2 + k)
            - math.lgamma(a2)
            - sp.gammaln(k + 1.0)
            + k * log_1mq
        )
        w = np.exp(log_w)
        value += float(w @ sp.gammainc(gamma + k, u))
        cum_w += float(w.sum())
        k0 += block
        tail = max(1.0 - cum_w, 0.0) * float(sp.gammainc(gamma + k0, u))
        if tail <= ctrl.rel_tol * max(value, 5e-324):
            return EvalResult(min(value, 1.0), k0, tail)
        if k0 >= ctrl.max_terms:
            raise ConvergenceError(
                f"cdf2 weight series not converged after {k0} terms "
                f"(remaining weight mass {1.0 - cum_w:.3e})",
                terms_used=k0,
                last_term=1.0 - cum_w,
            )
        block = max(block // 2, 64)


class _ScaledAccumulator:
    """Running sum of positive terms given in log space."""

    __slots__ = ("offset", "total")

    def __init__(self):
        self.offset = _LOG_TINY
        self.total = 0.0

    def add(self, log_term: float) -> None:
        if log_term == float("-inf"):
            return
        if log_term > self.offset:
            self.total = self.total * math.exp(self.offset - log_term) + 1.0
            self.offset = log_term
        else:
            self.total += math.exp(log_term - self.offset)

    def log_sum(self) -> float:
        if self.total == 0.0:
            return float("-inf")
        return self.offset + math.log(self.total)


def _series_cutoff(z: float, ctrl: SeriesControl) -> int:
    """Per-dimension truncation for 1F1-type term sequences."""
    return int(min(ctrl.max_terms, z + 12.0 * math.sqrt(z) + 60.0)) + 1


def _log_convolve(log_a: np.ndarray, log_b: np.ndarray) -> np.ndarray:
    """Convolution of two non-negative sequences given in log space."""
    n = log_a.shape[0] + log_b.shape[0] - 1
    out = np.empty(n)
    for r in range(n):
        lo = max(0, r - log_b.shape[0] + 1)
        hi = min(r, log_a.shape[0] - 1)
        w = log_a[lo : hi + 1] + log_b[r - hi : r - lo + 1][::-1]
        m = float(w.max())
        out[r] = m + math.log(float(np.sum(np.exp(w - m))))
    return out


def density_n(
    spec: ConvolutionSpec, x: float, ctrl: SeriesControl | None = None
) -> EvalResult:
    """Density via the multiple-series representation, any n >= 1.

    The (n-1)-dimensional series is summed by shells of constant total
    degree r.  After canonicalization every z_j = (1/b1 - 1/b_j) x is
    positive, so all terms are non-negative and the shell sums decay once
    r exceeds roughly max_j z_j.  Terminates when two consecutive shells
    contribute less than rel_tol relative to the accumulated sum.
    """
    spec = canonicalize(spec)
    if ctrl is None:
        ctrl = DEFAULT_CONTROL if len(spec) <= 2 else CONTROL_N
    if x < 0:
        raise DomainError(f"density requires x >= 0, got {x}")
    if x == 0.0:
        return _density_at_zero(spec)
    if len(spec) == 1:
        (c,) = spec.components
        return EvalResult(math.exp(_log_gamma_pdf(x, c.shape, c.scale)), 1, 0.0)

    shapes = spec.shapes
    scales = spec.scales
    beta1 = scales[0]
    gamma = spec.total_shape
    zs = (1.0 / beta1 - 1.0 / scales[1:]) * x
    alphas = shapes[1:]

    # Per-dimension term sequences in log space: the log of
    # A_j[k] = (a_j)_k z_j^k / k!.  The sequences themselves need not
    # decay (only the shell totals do, once the global 1/(gamma)_r
    # damping takes over), so every dimension is extended to the shell
    # count implied by the total argument sum z_1 + ... + z_{n-1}, and
    # their dynamic range can exceed hundreds of orders of magnitude --
    # all shell arithmetic below is log-sum-exp.
    kj = _series_cutoff(float(np.sum(zs)), ctrl)
    k = np.arange(kj, dtype=float)
    log_seqs = [
        sp.gammaln(a + k) - math.lgamma(a) + k * math.log(z) - sp.gammaln(k + 1.0)
        for a, z in zip(alphas, zs)
    ]

    # Collapse all but the last dimension into one sequence so the shell
    # loop below is always a sliding log-sum-exp of two vectors.
    log_head = log_seqs[0]
    for log_s in log_seqs[1:-1]:
        log_head = _log_convolve(log_head, log_s)
    if len(log_seqs) > 1:
        log_tail = log_seqs[-1]
    else:
        log_tail = np.zeros(1)

    n_head = log_head.shape[0]
    n_tail = log_tail.shape[0]
    r_max = n_head + n_tail - 2
    log_gamma_base = math.lgamma(gamma)

    acc = _ScaledAccumulator()
    log_tol = math.log(ctrl.rel_tol)
    below_prev = False
    terms_used = 0
    shells_done = r_max
    best_log_shell = -math.inf
    for r in range(r_max + 1):
        lo = max(0, r - n_tail + 1)
        hi = min(r, n_head - 1)
        window = log_head[lo : hi + 1] + log_tail[r - hi : r - lo + 1][::-1]
        wm = float(window.max())
        log_shell = (
            wm
            + math.log(float(np.sum(np.exp(window - wm))))
            + log_gamma_base
            - math.lgamma(gamma + r)
        )
        terms_used += hi - lo + 1
        acc.add(log_shell)
        # Stop only on the decaying side of the shell peak: small shells
        # before the peak must not be read as convergence.
        past_peak = log_shell < best_log_shell
        best_log_shell = max(best_log_shell, log_shell)
        below = past_peak and log_shell < acc.log_sum() + log_tol
        if below and below_prev and r >= 1:
            shells_done = r
            break
        below_prev = below
        if r + 1 >= ctrl.max_terms:
            raise ConvergenceError(
                f"multiple series not converged after {r + 1} shells",
                terms_used=terms_used,
            )
    else:
        # Ran out of pre-computed sequence terms before the shells decayed
        # below tolerance; per-dimension cutoffs were chosen so this only
        # happens if the control is pathological.
        raise ConvergenceError(
            f"multiple series exhausted {r_max + 1} shells without "
            f"meeting rel_tol={ctrl.rel_tol}",
            terms_used=terms_used,
        )

    log_phi = acc.log_sum()
    log_f = (
        -float(np.sum(shapes * np.log(scales)))
        - log_gamma_base
        + (gamma - 1.0) * math.log(x)
        - x / beta1
        + log_phi
    )
    _ = shells_done
    return EvalResult(0.0 if log_f < _LOG_TINY else math.exp(log_f), terms_used, None)


def cdf_n(
    spec: ConvolutionSpec, y: float, ctrl: SeriesControl | None = None
) -> EvalResult:
    """CDF via term-by-term integration of the multiple series, any n >= 1.

    F(y) = sum_r W_r G(y/b1; gamma + r) where W_r, the shell weights, are
    convolutions of negative-binomial masses and therefore sum to one.
    The reported tail bound is (1 - accumulated mass) G(y/b1; gamma+R+1).
    """
    spec = canonicalize(spec)
    if ctrl is None:
        ctrl = DEFAULT_CONTROL if len(spec) <= 2 else CONTROL_N
    if y < 0:
        raise DomainError(f"cdf requires y >= 0, got {y}")
    if y == 0.0:
        return EvalResult(0.0, 1, 0.0)
    if len(spec) == 1:
        (c,) = spec.components
        return EvalResult(float(sp.gammainc(c.shape, y / c.scale)), 1, 0.0)

    shapes = spec.shapes
    scales = spec.scales
    beta1 = scales[0]
    gamma = spec.total_shape
    qs = beta1 / scales[1:]
    alphas = shapes[1:]
    u = y / beta1

    # Negative-binomial weight sequence per dimension (size a_j, success
    # probability q_j); masses, so no scaling is needed.
    seqs = []
    for a, q in zip(alphas, qs):
        mean = a * (1.0 - q) / q
        sd = math.sqrt(a * (1.0 - q)) / q
        kj = int(min(ctrl.max_terms, mean + 12.0 * sd + 60.0)) + 1
        while True:
            k = np.arange(kj, dtype=float)
            log_b = (
                a * math.log(q)
                + sp.gammaln(a + k)
                - math.lgamma(a)
                - sp.gammaln(k + 1.0)
                + k * math.log1p(-q)
            )
            b = np.exp(log_b)
            if 1.0 - b.sum() <= 0.1 * ctrl.rel_tol or kj >= ctrl.max_terms:
                break
            kj = min(2 * kj, ctrl.max_terms)
        seqs.append(b)

    head = seqs[0]
    for s in seqs[1:-1]:
        head = np.convolve(head, s)
    tail_seq = seqs[-1] if len(seqs) > 1 else np.ones(1)

    n_head = head.shape[0]
    n_tail = tail_seq.shape[0]
    r_max = n_head + n_tail - 2

    value = 0.0
    mass = 0.0
    terms_used = 0
    tail_bound = float("inf")
    for r in range(r_max + 1):
        lo = max(0, r - n_tail + 1)
        hi = min(r, n_head - 1)
        w_r = float(head[lo : hi + 1] @ tail_seq[r - hi : r - lo + 1][::-1])
        terms_used += hi - lo + 1
        value += w_r * float(sp.gammainc(gamma + r, u))
        mass += w_r
        tail_bound = max(1.0 - mass, 0.0) * float(sp.gammainc(gamma + r + 1, u))
        if tail_bound <= ctrl.rel_tol * max(value, 5e-324):
            return EvalResult(min(value, 1.0), terms_used, tail_bound)
        if r + 1 >= ctrl.max_terms:
            break
    raise ConvergenceError(
        f"cdf shell series not converged (remaining mass {1.0 - mass:.3e}, "
        f"tail bound {tail_bound:.3e})",
        terms_used=terms_used,
        last_term=tail_bound,
    )

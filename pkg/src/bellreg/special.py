"""Scalar special functions used across the package.

Principal-branch Lambert W on the nonnegative ray, Bell numbers in log space,
digamma/trigamma, log-gamma/log-factorial, and the regularized incomplete
gamma function (chi-square tail probabilities). Everything here is pure and
depends only on numpy and the stdlib.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

EULER_GAMMA = 0.5772156649015329

# Bernoulli-number coefficients B_{2k}/(2k) for the digamma asymptotic series
_DIGAMMA_COEFS = (
    1.0 / 12.0, -1.0 / 120.0, 1.0 / 252.0, -1.0 / 240.0,
    1.0 / 132.0, -691.0 / 32760.0, 1.0 / 12.0,
)
# Bernoulli numbers B_{2k} for the trigamma asymptotic series
_TRIGAMMA_COEFS = (
    1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0,
    5.0 / 66.0, -691.0 / 2730.0, 7.0 / 6.0,
)


def lambert_w0(x):
    """Principal Lambert W on x >= 0: the w >= 0 with w * exp(w) = x.

    Halley iteration started from log1p(x) for x < e and from
    log(x) - log(log(x)) otherwise; converges to |w e^w - x| <= 1e-13
    max(1, x) in a handful of steps. Accepts scalars or arrays.
    """
    scalar = np.ndim(x) == 0
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("lambert_w0: input must be finite")
    if np.any(arr < 0):
        raise ValueError("lambert_w0 is only defined for x >= 0 here")

    w = np.where(arr < math.e, np.log1p(arr), 0.0)
    big = arr >= math.e
    if np.any(big):
        lx = np.log(np.where(big, arr, math.e))
        w = np.where(big, lx - np.log(lx), w)
    w = np.minimum(w, 700.0)  # keep exp(w) representable

    tol = 1e-13 * np.maximum(1.0, arr)
    for _ in range(50):
        ew = np.exp(w)
        f = w * ew - arr
        if np.all(np.abs(f) <= tol):
            break
        wp1 = w + 1.0
        denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1)
        w = w - f / denom
    else:
        raise RuntimeError("lambert_w0 failed to converge")
    return float(w) if scalar else w


@dataclass(frozen=True)
class LogBellTable:
    """log(B_y) for y = 0..max_index; B_y are the Bell numbers.

    B_y overflows float64 near y = 218, so only logarithms are stored. The
    table is immutable and safe to share between concurrent samplers.
    """

    max_index: int
    values: np.ndarray

    def __post_init__(self):
        if self.max_index < 0:
            raise ValueError("max_index must be nonnegative")
        if len(self.values) != self.max_index + 1:
            raise ValueError("values must have length max_index + 1")
        self.values.setflags(write=False)

    def __len__(self) -> int:
        return self.max_index + 1


def build_log_bell_table(max_index: int) -> LogBellTable:
    """Tabulate log Bell numbers via the binomial recurrence in log space.

    B_{n+1} = sum_k C(n, k) B_k, carried as log-sum-exp with log-binomials
    from a cumulative log-factorial table. O(max_index^2).
    """
    max_index = int(max_index)
    if max_index < 0:
        raise ValueError("max_index must be nonnegative")
    if max_index > 10**6:
        raise ValueError("max_index beyond practical bound 1e6")
    logb = np.zeros(max_index + 1)
    if max_index >= 1:
        logb[1] = 0.0
    if max_index >= 2:
        # log k! for k = 0..max_index-1
        logfact = np.concatenate(([0.0], np.cumsum(np.log(np.arange(1.0, max_index)))))
        for n in range(1, max_index):
            k = np.arange(n + 1)
            logbinom = logfact[n] - logfact[k] - logfact[n - k]
            terms = logbinom + logb[: n + 1]
            m = terms.max()
            logb[n + 1] = m + math.log(np.exp(terms - m).sum())
    return LogBellTable(max_index=max_index, values=logb)


def digamma(x: float) -> float:
    """psi(x) = d/dx log Gamma(x) for x > 0.

    Upward recurrence to shift the argument above 10, then the Bernoulli
    asymptotic series; absolute error well under 1e-12 on (0, inf).
    """
    x = float(x)
    if not (x > 0):
        raise ValueError("digamma requires x > 0")
    acc = 0.0
    while x < 10.0:
        acc -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    series = 0.0
    p = inv2
    for c in _DIGAMMA_COEFS:
        series += c * p
        p *= inv2
    return acc + math.log(x) - 0.5 / x - series


def trigamma(x: float) -> float:
    """psi'(x), the derivative of digamma, for x > 0."""
    x = float(x)
    if not (x > 0):
        raise ValueError("trigamma requires x > 0")
    acc = 0.0
    while x < 10.0:
        acc += 1.0 / (x * x)
        x += 1.0
    inv2 = 1.0 / (x * x)
    series = 0.0
    p = inv2 / x
    for c in _TRIGAMMA_COEFS:
        series += c * p
        p *= inv2
    return acc + 1.0 / x + 0.5 * inv2 + series


def log_gamma(x: float) -> float:
    """log Gamma(x) for x > 0 (stdlib lgamma)."""
    if not (x > 0):
        raise ValueError("log_gamma requires x > 0")
    return math.lgamma(x)


def log_factorial(y: int) -> float:
    """log(y!) for a nonnegative integer y, via log-gamma."""
    if y < 0:
        raise ValueError("log_factorial requires y >= 0")
    return math.lgamma(y + 1.0)


def _lower_gamma_series(a: float, x: float) -> float:
    """Regularized lower incomplete gamma P(a, x) by its power series."""
    if x <= 0.0:
        return 0.0
    term = 1.0 / a
    total = term
    n = a
    for _ in range(10000):
        n += 1.0
        term *= x / n
        total += term
        if abs(term) < abs(total) * 1e-16:
            break
    else:
        raise RuntimeError("incomplete gamma series failed to converge")
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _upper_gamma_cf(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x) by Lentz's continued fraction."""
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b if b != 0 else 1.0 / tiny
    h = d
    for i in range(1, 10000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    else:
        raise RuntimeError("incomplete gamma continued fraction failed to converge")
    return h * math.exp(-x + a * math.log(x) - math.lgamma(a))


def regularized_gamma_q(a: float, x: float) -> float:
    """Q(a, x) = Gamma(a, x)/Gamma(a), the upper regularized incomplete gamma."""
    if a <= 0:
        raise ValueError("regularized_gamma_q requires a > 0")
    if x < 0:
        raise ValueError("regularized_gamma_q requires x >= 0")
    if x == 0.0:
        return 1.0
    if x < a + 1.0:
        return 1.0 - _lower_gamma_series(a, x)
    return _upper_gamma_cf(a, x)


def chisq_sf(x: float, df: int) -> float:
    """Chi-square survival function P(X > x) with df degrees of freedom."""
    if df < 1 or int(df) != df:
        raise ValueError("df must be a positive integer")
    if x < 0:
        raise ValueError("chisq_sf requires x >= 0")
    return regularized_gamma_q(df / 2.0, x / 2.0)


def chisq_cdf(x: float, df: int) -> float:
    """Chi-square CDF via the complementary (lower-gamma) series."""
    if df < 1 or int(df) != df:
        raise ValueError("df must be a positive integer")
    if x < 0:
        raise ValueError("chisq_cdf requires x >= 0")
    return _lower_gamma_series(df / 2.0, x / 2.0)

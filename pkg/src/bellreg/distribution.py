"""The Bell distribution as a standalone probability object.

pmf: f(y) = theta^y * exp(1 - e^theta) * B_y / y!  on y = 0, 1, 2, ...
with B_y the Bell numbers. Mean theta*e^theta, variance mean*(1+theta), so
the distribution is overdispersed for every theta > 0.
"""

from __future__ import annotations

import math

import numpy as np

from .special import LogBellTable, build_log_bell_table, lambert_w0, log_factorial

# e^theta overflows float64 just above 709; anything near that is far outside
# the count-data regime anyway.
THETA_MAX = 700.0

_SAMPLING_TAIL = 1e-15
_MAX_SUPPORT = 10**6


def _check_theta(theta: float) -> float:
    theta = float(theta)
    if not (theta > 0) or not math.isfinite(theta):
        raise ValueError("theta must be a positive finite real")
    if theta > THETA_MAX:
        raise ValueError(f"theta = {theta} exceeds the overflow guard {THETA_MAX}")
    return theta


def log_pmf(y, theta: float, table: LogBellTable):
    """Log-probability of counts y under Bell(theta).

    y may be a scalar or an array of nonnegative integers; the table must
    cover max(y).
    """
    theta = _check_theta(theta)
    scalar = np.ndim(y) == 0
    ya = np.asarray(y, dtype=np.int64)
    if np.any(ya < 0):
        raise ValueError("counts must be nonnegative")
    if ya.size and int(ya.max()) > table.max_index:
        raise IndexError(
            f"log-Bell table covers y <= {table.max_index}, got y = {int(ya.max())}"
        )
    logfact = np.array([log_factorial(int(v)) for v in np.atleast_1d(ya)])
    out = (
        np.atleast_1d(ya) * math.log(theta)
        + (1.0 - math.exp(theta))
        + table.values[np.atleast_1d(ya)]
        - logfact
    )
    return float(out[0]) if scalar else out


def mean(theta: float) -> float:
    """E(Y) = theta * e^theta."""
    theta = _check_theta(theta)
    return theta * math.exp(theta)


def variance(theta: float) -> float:
    """V(Y) = theta * e^theta * (1 + theta); always exceeds the mean."""
    theta = _check_theta(theta)
    return mean(theta) * (1.0 + theta)


def _cumulative_probs(theta: float) -> np.ndarray:
    """CDF table out to a tail below _SAMPLING_TAIL."""
    size = 64
    while True:
        table = build_log_bell_table(size)
        probs = np.exp(log_pmf(np.arange(size + 1), theta, table))
        cum = np.cumsum(probs)
        if 1.0 - cum[-1] < _SAMPLING_TAIL:
            return cum
        size *= 2
        if size > _MAX_SUPPORT:
            raise RuntimeError(
                "Bell sampler exhausted 1e6 support points; theta out of range"
            )


def sample(theta: float, rng: np.random.Generator, size=None):
    """Exact draws from Bell(theta) by sequential inversion of the CDF.

    Deterministic given the generator state. Returns an int for size=None,
    else an int64 array of the requested shape.
    """
    theta = _check_theta(theta)
    cum = _cumulative_probs(theta)
    u = rng.random(size=size)
    draws = np.searchsorted(cum, u, side="left")
    return int(draws) if size is None else draws.astype(np.int64)


def mle_theta(ybar: float) -> float:
    """Moment/ML estimate of theta from a sample mean: W0(ybar).

    The likelihood equation for an i.i.d. Bell sample reduces to
    theta * e^theta = ybar, so the MLE is the Lambert W of the mean.
    """
    ybar = float(ybar)
    if not (ybar > 0):
        raise ValueError(
            "mle_theta requires ybar > 0; an all-zero sample has no interior MLE"
        )
    return lambert_w0(ybar)

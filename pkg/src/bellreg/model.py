"""Regression-model layer: dataset container, priors, and log-densities.

Both count models use the log link: mu_i = exp(X_i' beta). The Bell model
maps the mean back to its parameter through the Lambert W, theta_i = W0(mu_i).
Log-likelihoods include all constant terms (Bell numbers and factorials) so
that information criteria are comparable across models.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .special import LogBellTable, digamma, lambert_w0, log_factorial, trigamma

# Linear predictors are clipped here before exponentiation. Values at the clip
# still evaluate to finite (astronomically negative) log-likelihoods, so
# far-out proposals and overdispersed chain starts reject naturally instead of
# poisoning the sampler with NaNs.
ETA_CLIP = 500.0

MODEL_KINDS = ("bell", "poisson")


class NumericalError(RuntimeError):
    """A log-density evaluated to a non-finite value."""


@dataclass(frozen=True)
class Dataset:
    """Response counts plus a design matrix whose first column is the intercept."""

    y: np.ndarray
    X: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.y)
        X = np.asarray(self.X, dtype=float)
        if X.ndim != 2:
            raise ValueError("X must be a 2-d matrix")
        if y.ndim != 1 or len(y) != X.shape[0]:
            raise ValueError("y must be 1-d with one entry per row of X")
        if np.any(y < 0) or np.any(y != np.floor(y)):
            raise ValueError("responses must be nonnegative integers")
        if not np.all(np.isfinite(X)):
            raise ValueError("design matrix contains non-finite entries")
        n, p = X.shape
        if not (n >= p >= 1):
            raise ValueError(f"need n >= p >= 1, got n={n}, p={p}")
        if not np.all(X[:, 0] == 1.0):
            raise ValueError("first column of X must be the all-ones intercept")
        object.__setattr__(self, "y", y.astype(np.int64))
        object.__setattr__(self, "X", X)
        self.y.setflags(write=False)
        self.X.setflags(write=False)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def log_factorials(self) -> np.ndarray:
        return np.array([log_factorial(int(v)) for v in self.y])


@dataclass(frozen=True)
class FlatNormalPrior:
    """Independent N(0, tau^2) on every coefficient; tau large = diffuse."""

    tau: float = 100.0

    def __post_init__(self):
        if not (self.tau > 0):
            raise ValueError("tau must be positive")


@dataclass(frozen=True)
class GPrior:
    """Zellner-style prior N_p(M u, g n (X'X)^{-1}) with u = (1, 0, ..., 0)'.

    The hyperparameters come from an expert marginal prior on the mean with
    shape a_mu and scale b_mu; under the log link the matching moments are
    M = psi(a_mu) + log(b_mu) and g = psi'(a_mu) / p.
    """

    a_mu: float = 1.0
    b_mu: float = 1.0
    p: int = 1
    M: float = field(init=False)
    g: float = field(init=False)

    def __post_init__(self):
        if not (self.a_mu > 0 and self.b_mu > 0):
            raise ValueError("a_mu and b_mu must be positive")
        if self.p < 1:
            raise ValueError("p must be at least 1")
        object.__setattr__(self, "M", digamma(self.a_mu) + math.log(self.b_mu))
        object.__setattr__(self, "g", trigamma(self.a_mu) / self.p)

    def mean_vector(self) -> np.ndarray:
        u = np.zeros(self.p)
        u[0] = self.M
        return u


PriorSpec = FlatNormalPrior | GPrior


def linear_predictor(dataset: Dataset, beta: np.ndarray) -> np.ndarray:
    """eta_i = X_i' beta (unclipped); mu_i = exp(eta_i)."""
    beta = np.asarray(beta, dtype=float)
    if beta.shape != (dataset.p,):
        raise ValueError(f"beta must have length {dataset.p}, got shape {beta.shape}")
    return dataset.X @ beta


def bell_log_likelihood(dataset: Dataset, beta, table: LogBellTable) -> float:
    """Sum_i [ y_i log W0(mu_i) + 1 - e^{W0(mu_i)} + log B_{y_i} - log y_i! ]."""
    if int(dataset.y.max()) > table.max_index:
        raise IndexError("log-Bell table does not cover max(y)")
    eta = np.clip(linear_predictor(dataset, beta), -ETA_CLIP, ETA_CLIP)
    mu = np.exp(eta)
    theta = lambert_w0(mu)
    terms = (
        dataset.y * np.log(theta)
        + (1.0 - np.exp(theta))
        + table.values[dataset.y]
        - dataset.log_factorials()
    )
    total = float(terms.sum())
    if not math.isfinite(total):
        bad = int(np.flatnonzero(~np.isfinite(terms))[0])
        raise NumericalError(f"non-finite Bell log-likelihood at observation {bad}")
    return total


def poisson_log_likelihood(dataset: Dataset, beta) -> float:
    """Sum_i [ y_i eta_i - exp(eta_i) - log y_i! ] under the log link."""
    eta = np.clip(linear_predictor(dataset, beta), -ETA_CLIP, ETA_CLIP)
    terms = dataset.y * eta - np.exp(eta) - dataset.log_factorials()
    total = float(terms.sum())
    if not math.isfinite(total):
        bad = int(np.flatnonzero(~np.isfinite(terms))[0])
        raise NumericalError(f"non-finite Poisson log-likelihood at observation {bad}")
    return total


def _gram_matrix(dataset: Dataset) -> np.ndarray:
    return dataset.X.T @ dataset.X


def log_prior(prior: PriorSpec, beta, dataset: Dataset) -> float:
    """Fully normalized log prior density at beta."""
    beta = np.asarray(beta, dtype=float)
    p = dataset.p
    if beta.shape != (p,):
        raise ValueError(f"beta must have length {p}")
    if isinstance(prior, FlatNormalPrior):
        return float(
            -0.5 * np.sum(beta**2) / prior.tau**2
            - p * math.log(prior.tau)
            - 0.5 * p * math.log(2.0 * math.pi)
        )
    if isinstance(prior, GPrior):
        if prior.p != p:
            raise ValueError("GPrior was built for a different number of columns")
        xtx = _gram_matrix(dataset)
        sign, logdet_xtx = np.linalg.slogdet(xtx)
        if sign <= 0:
            raise ValueError(
                "X'X is singular; drop collinear columns before using the G-prior"
            )
        diff = beta - prior.mean_vector()
        gn = prior.g * dataset.n
        quad = float(diff @ xtx @ diff) / gn
        # covariance g n (X'X)^{-1}: log det = p log(gn) - log det(X'X)
        logdet_cov = p * math.log(gn) - logdet_xtx
        return -0.5 * (quad + logdet_cov + p * math.log(2.0 * math.pi))
    raise TypeError(f"unknown prior type {type(prior).__name__}")


def log_posterior(kind: str, prior: PriorSpec, dataset: Dataset, beta,
                  table: LogBellTable | None = None) -> float:
    """Unnormalized log posterior: log-likelihood(kind) + log-prior."""
    if kind not in MODEL_KINDS:
        raise ValueError(f"kind must be one of {MODEL_KINDS}")
    if kind == "bell":
        if table is None:
            raise ValueError("the Bell model needs a log-Bell table")
        ll = bell_log_likelihood(dataset, beta, table)
    else:
        ll = poisson_log_likelihood(dataset, beta)
    return ll + log_prior(prior, beta, dataset)


def make_log_posterior(kind: str, prior: PriorSpec, dataset: Dataset,
                       table: LogBellTable | None = None):
    """Build a fast closure equal to log_posterior(kind, prior, dataset, .).

    Precomputes everything that does not depend on beta (Gram matrix, prior
    normalization, per-observation constants); the sampler calls this tens of
    thousands of times.
    """
    if kind not in MODEL_KINDS:
        raise ValueError(f"kind must be one of {MODEL_KINDS}")
    X = dataset.X
    y = dataset.y.astype(float)
    n, p = dataset.n, dataset.p
    logfact = dataset.log_factorials()

    if kind == "bell":
        if table is None:
            raise ValueError("the Bell model needs a log-Bell table")
        if int(dataset.y.max()) > table.max_index:
            raise IndexError("log-Bell table does not cover max(y)")
        ll_const = float(np.sum(table.values[dataset.y] - logfact)) + n
    else:
        ll_const = -float(logfact.sum())

    if isinstance(prior, FlatNormalPrior):
        inv_tau2 = 1.0 / prior.tau**2
        prior_const = -p * math.log(prior.tau) - 0.5 * p * math.log(2.0 * math.pi)

        def logprior(beta):
            return -0.5 * float(beta @ beta) * inv_tau2 + prior_const

    elif isinstance(prior, GPrior):
        if prior.p != p:
            raise ValueError("GPrior was built for a different number of columns")
        xtx = _gram_matrix(dataset)
        sign, logdet_xtx = np.linalg.slogdet(xtx)
        if sign <= 0:
            raise ValueError(
                "X'X is singular; drop collinear columns before using the G-prior"
            )
        gn = prior.g * n
        mean_vec = prior.mean_vector()
        prior_const = -0.5 * (p * math.log(gn) - logdet_xtx
                              + p * math.log(2.0 * math.pi))

        def logprior(beta):
            diff = beta - mean_vec
            return -0.5 * float(diff @ xtx @ diff) / gn + prior_const

    else:
        raise TypeError(f"unknown prior type {type(prior).__name__}")

    if kind == "bell":
        bell_values = table.values

        def logpost(beta):
            eta = np.clip(X @ beta, -ETA_CLIP, ETA_CLIP)
            theta = lambert_w0(np.exp(eta))
            ll = float(y @ np.log(theta) - np.exp(theta).sum()) + ll_const
            out = ll + logprior(beta)
            return out if math.isfinite(out) else -math.inf

        logpost.ll_values = bell_values  # keeps the table alive alongside
    else:

        def logpost(beta):
            eta = np.clip(X @ beta, -ETA_CLIP, ETA_CLIP)
            ll = float(y @ eta - np.exp(eta).sum()) + ll_const
            out = ll + logprior(beta)
            return out if math.isfinite(out) else -math.inf

    return logpost

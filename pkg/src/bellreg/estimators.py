"""Scikit-learn style estimators wrapping the Bayesian count-regression core.

BellRegression and PoissonRegression share a fit/predict surface: fit(X, y)
runs the multi-chain Metropolis-Hastings sampler on the posterior and stores
pooled summaries; predict(X) returns the fitted mean exp(X beta_hat) at the
posterior-mean coefficients. Hyperparameters follow sklearn conventions
(stored verbatim in __init__, validated in fit), so get_params/set_params,
cloning, and pipelines work as usual.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .inference import CriteriaReport, GofReport, chisq_gof, criteria_report, summarize
from .model import Dataset, FlatNormalPrior, GPrior
from .sampler import McmcConfig, ProposalSpec, gelman_rubin_all, run_chains
from .special import build_log_bell_table

_TABLE_SLACK = 16  # log-Bell table is built a little past max(y)


class _BayesianCountRegression(RegressorMixin, BaseEstimator):
    _kind = ""

    def __init__(self, prior="gprior", tau=100.0, a_mu=1.0, b_mu=1.0,
                 n_iter=50_000, burn_in=10_000, thin=20, n_chains=2,
                 proposal_sigma=None, target_accept=0.234,
                 covariance_shape="gram", adapt=True, level=0.95,
                 add_intercept=True, seed=0):
        self.prior = prior
        self.tau = tau
        self.a_mu = a_mu
        self.b_mu = b_mu
        self.n_iter = n_iter
        self.burn_in = burn_in
        self.thin = thin
        self.n_chains = n_chains
        self.proposal_sigma = proposal_sigma
        self.target_accept = target_accept
        self.covariance_shape = covariance_shape
        self.adapt = adapt
        self.level = level
        self.add_intercept = add_intercept
        self.seed = seed

    def _design(self, X: np.ndarray) -> np.ndarray:
        return np.column_stack([np.ones(X.shape[0]), X]) if self.add_intercept else X

    def _build_prior(self, p: int):
        if self.prior == "gprior":
            return GPrior(a_mu=self.a_mu, b_mu=self.b_mu, p=p)
        if self.prior == "flat":
            return FlatNormalPrior(tau=self.tau)
        raise ValueError("prior must be 'gprior' or 'flat'")

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=float, ensure_min_samples=1)
        dataset = Dataset(y=y, X=self._design(X))
        table = None
        if self._kind == "bell":
            table = build_log_bell_table(int(dataset.y.max()) + _TABLE_SLACK)
        prior = self._build_prior(dataset.p)
        config = McmcConfig(
            n_iter=self.n_iter, burn_in=self.burn_in, thin=self.thin,
            n_chains=self.n_chains, seed=self.seed,
            proposal=ProposalSpec(
                mode="adaptive" if self.adapt else "fixed",
                sigma=self.proposal_sigma,
                target_accept=self.target_accept,
                covariance_shape=self.covariance_shape,
            ),
        )
        chains = run_chains(self._kind, prior, dataset, config, table)

        self.n_features_in_ = X.shape[1]
        self.dataset_ = dataset
        self.table_ = table
        self.prior_ = prior
        self.config_ = config
        self.chains_ = chains
        self.summary_ = summarize(chains, level=self.level)
        self.coef_ = self.summary_.mean.copy()
        self.intercept_ = float(self.coef_[0]) if self.add_intercept else 0.0
        self.rhat_ = gelman_rubin_all(chains) if self.n_chains >= 2 else None
        self.accept_rate_ = chains.accept_rates.copy()
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, expected {self.n_features_in_}"
            )
        eta = self._design(X) @ self.coef_
        return np.exp(np.clip(eta, -500.0, 500.0))

    def information_criteria(self) -> CriteriaReport:
        check_is_fitted(self, "chains_")
        return criteria_report(self._kind, self.dataset_, self.chains_, self.table_)

    def goodness_of_fit(self, cells=(0, 1, 2, 3, 4)) -> GofReport:
        check_is_fitted(self, "dataset_")
        return chisq_gof(self.dataset_.y, self._kind, cells=cells)


class BellRegression(_BayesianCountRegression):
    """Bayesian Bell regression: counts with built-in overdispersion."""

    _kind = "bell"


class PoissonRegression(_BayesianCountRegression):
    """Bayesian Poisson regression baseline under the same priors and sampler."""

    _kind = "poisson"

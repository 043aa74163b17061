"""Bayesian Bell and Poisson count regression.

The Bell distribution handles overdispersed counts with a single parameter;
this package fits log-link Bell (and baseline Poisson) regression by
random-walk Metropolis-Hastings under a Zellner-style G-prior or a diffuse
normal prior, and reports posterior summaries, convergence diagnostics, and
model-selection criteria (LMPL, DIC, EAIC, EBIC).
"""

from . import distribution, special
from .datasets import load_dataset, load_mines
from .estimators import BellRegression, PoissonRegression
from .inference import (
    CriteriaReport,
    GofReport,
    PosteriorReport,
    chisq_gof,
    cpo_lmpl,
    criteria_report,
    dic,
    eaic_ebic,
    hpd_interval,
    mse_mae,
    summarize,
)
from .model import (
    Dataset,
    FlatNormalPrior,
    GPrior,
    bell_log_likelihood,
    linear_predictor,
    log_posterior,
    log_prior,
    poisson_log_likelihood,
)
from .sampler import (
    ChainSet,
    McmcConfig,
    ProposalSpec,
    autocorrelation,
    gelman_rubin,
    gelman_rubin_all,
    run_chain,
    run_chains,
)
from .simulation import coefficient_truth, run_simulation_study, simulate_dataset
from .special import LogBellTable, build_log_bell_table, lambert_w0

__version__ = "0.1.0"

__all__ = [
    "BellRegression",
    "PoissonRegression",
    "Dataset",
    "FlatNormalPrior",
    "GPrior",
    "McmcConfig",
    "ProposalSpec",
    "ChainSet",
    "LogBellTable",
    "PosteriorReport",
    "CriteriaReport",
    "GofReport",
    "lambert_w0",
    "build_log_bell_table",
    "linear_predictor",
    "bell_log_likelihood",
    "poisson_log_likelihood",
    "log_prior",
    "log_posterior",
    "run_chain",
    "run_chains",
    "gelman_rubin",
    "gelman_rubin_all",
    "autocorrelation",
    "summarize",
    "hpd_interval",
    "mse_mae",
    "cpo_lmpl",
    "dic",
    "eaic_ebic",
    "criteria_report",
    "chisq_gof",
    "simulate_dataset",
    "coefficient_truth",
    "run_simulation_study",
    "load_dataset",
    "load_mines",
    "distribution",
    "special",
    "__version__",
]

"""Random-walk Metropolis-Hastings with burn-in, thinning, and multi-chain
execution, plus Gelman-Rubin and autocorrelation diagnostics.

Proposals are multivariate normal steps beta' = beta + s * L z, where L L' is
either the identity or the Gram-inverse shape n (X'X)^{-1}. The scalar s can
adapt during burn-in by Robbins-Monro updates toward a target acceptance rate
and is frozen afterwards, so retained draws always come from a fixed kernel.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .model import Dataset, PriorSpec, make_log_posterior
from .special import LogBellTable

TARGET_ACCEPT_DEFAULT = 0.234


@dataclass(frozen=True)
class ProposalSpec:
    """Random-walk kernel settings.

    mode "adaptive" tunes the scalar scale during burn-in (Robbins-Monro on
    the log scale); "fixed" keeps sigma as given. covariance_shape "gram"
    uses n (X'X)^{-1} as the step shape, "identity" the unit matrix.
    """

    mode: str = "adaptive"
    sigma: float | None = None  # None = 2.38 / sqrt(p) at run time
    target_accept: float = TARGET_ACCEPT_DEFAULT
    covariance_shape: str = "gram"

    def __post_init__(self):
        if self.mode not in ("fixed", "adaptive"):
            raise ValueError("mode must be 'fixed' or 'adaptive'")
        if self.covariance_shape not in ("identity", "gram"):
            raise ValueError("covariance_shape must be 'identity' or 'gram'")
        if self.sigma is not None and not (self.sigma > 0):
            raise ValueError("sigma must be positive")
        if not (0.1 < self.target_accept < 0.6):
            raise ValueError("target_accept must lie in (0.1, 0.6)")


@dataclass(frozen=True)
class McmcConfig:
    n_iter: int = 50_000
    burn_in: int = 10_000
    thin: int = 20
    n_chains: int = 2
    seed: int = 0
    proposal: ProposalSpec = field(default_factory=ProposalSpec)

    def __post_init__(self):
        if self.n_iter <= 0 or self.thin < 1 or self.n_chains < 1:
            raise ValueError("n_iter, thin, n_chains must be positive")
        if not (0 <= self.burn_in < self.n_iter):
            raise ValueError("need 0 <= burn_in < n_iter")

    @property
    def n_retained(self) -> int:
        return (self.n_iter - self.burn_in) // self.thin


@dataclass
class ChainSet:
    """Retained draws of all chains: draws[c, j] is the j-th kept beta of chain c."""

    draws: np.ndarray           # (n_chains, m, p)
    log_post: np.ndarray        # (n_chains, m)
    iterations: np.ndarray      # (m,) raw iteration numbers of kept draws
    accept_rates: np.ndarray    # (n_chains,)
    sigmas: np.ndarray          # (n_chains,) frozen proposal scales
    config: McmcConfig
    warnings: list[str] = field(default_factory=list)

    @property
    def n_chains(self) -> int:
        return self.draws.shape[0]

    @property
    def n_retained(self) -> int:
        return self.draws.shape[1]

    @property
    def p(self) -> int:
        return self.draws.shape[2]

    def pooled(self) -> np.ndarray:
        """All retained draws stacked across chains, shape (c*m, p)."""
        return self.draws.reshape(-1, self.draws.shape[2])


def _chain_rng(seed: int, chain_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(chain_index,)))


def random_walk_metropolis(log_density, x0, config: McmcConfig,
                           rng: np.random.Generator, chol: np.ndarray | None = None):
    """Core MH loop over an arbitrary log-density (also the test hook).

    Returns (draws (m,p), log-density trace (m,), accept_rate, frozen sigma,
    iteration numbers (m,)).
    """
    x = np.asarray(x0, dtype=float).copy()
    p = x.shape[0]
    lp = float(log_density(x))
    if not math.isfinite(lp):
        raise ValueError("initial point has non-finite log density")
    if chol is None:
        chol = np.eye(p)

    spec = config.proposal
    sigma = spec.sigma if spec.sigma is not None else 2.38 / math.sqrt(p)
    log_sigma = math.log(sigma)
    adaptive = spec.mode == "adaptive"

    m = config.n_retained
    draws = np.empty((m, p))
    trace = np.empty(m)
    iters = np.empty(m, dtype=np.int64)
    accepted = 0

    for t in range(1, config.n_iter + 1):
        step = math.exp(log_sigma) * (chol @ rng.standard_normal(p))
        proposal = x + step
        lp_prop = float(log_density(proposal))
        delta = lp_prop - lp
        alpha = 1.0 if delta >= 0 else math.exp(delta)
        if rng.random() < alpha:
            x = proposal
            lp = lp_prop
            accepted += 1
        if adaptive and t <= config.burn_in:
            log_sigma += (alpha - spec.target_accept) / t**0.6
        if t > config.burn_in and (t - config.burn_in) % config.thin == 0:
            j = (t - config.burn_in) // config.thin - 1
            draws[j] = x
            trace[j] = lp
            iters[j] = t

    return draws, trace, accepted / config.n_iter, math.exp(log_sigma), iters


def _proposal_chol(dataset: Dataset, spec: ProposalSpec) -> np.ndarray:
    if spec.covariance_shape == "identity":
        return np.eye(dataset.p)
    gram = dataset.X.T @ dataset.X
    try:
        shape = dataset.n * np.linalg.inv(gram)
        return np.linalg.cholesky(shape)
    except np.linalg.LinAlgError as exc:
        raise ValueError(
            "X'X is singular; drop collinear columns or use the identity proposal"
        ) from exc


def overdispersed_start(p: int, chain_index: int) -> np.ndarray:
    """Chain start: the zero vector offset by +/-0.5 on every coordinate."""
    sign = 1.0 if chain_index % 2 == 0 else -1.0
    return np.full(p, 0.5 * sign)


def run_chain(kind: str, prior: PriorSpec, dataset: Dataset, config: McmcConfig,
              chain_index: int, table: LogBellTable | None = None):
    """One MH chain for the model posterior; see run_chains for the full set."""
    logpost = make_log_posterior(kind, prior, dataset, table)
    rng = _chain_rng(config.seed, chain_index)
    chol = _proposal_chol(dataset, config.proposal)
    x0 = overdispersed_start(dataset.p, chain_index)
    try:
        return random_walk_metropolis(logpost, x0, config, rng, chol)
    except ValueError as exc:
        raise ValueError(f"chain {chain_index}: {exc}") from exc


def run_chains(kind: str, prior: PriorSpec, dataset: Dataset, config: McmcConfig,
               table: LogBellTable | None = None) -> ChainSet:
    """Independent chains with derived seeds and overdispersed starts."""
    all_draws, all_trace, rates, sigmas = [], [], [], []
    iters = None
    warnings: list[str] = []
    for c in range(config.n_chains):
        draws, trace, rate, sigma, iters = run_chain(
            kind, prior, dataset, config, c, table
        )
        if rate < 0.01:
            warnings.append(
                f"chain {c}: acceptance rate {rate:.4f} below 0.01 after adaptation"
            )
        all_draws.append(draws)
        all_trace.append(trace)
        rates.append(rate)
        sigmas.append(sigma)
    return ChainSet(
        draws=np.stack(all_draws),
        log_post=np.stack(all_trace),
        iterations=iters,
        accept_rates=np.array(rates),
        sigmas=np.array(sigmas),
        config=config,
        warnings=warnings,
    )


def gelman_rubin(chains: ChainSet | np.ndarray, coordinate: int = 0) -> float:
    """Potential scale reduction factor sqrt(((m-1)/m W + B/m) / W).

    W is the mean within-chain variance and B = m var(chain means), both with
    denominator m-1 / c-1 respectively. Requires at least two chains.
    """
    x = chains.draws[:, :, coordinate] if isinstance(chains, ChainSet) else np.asarray(chains)
    c, m = x.shape
    if c < 2 or m < 2:
        raise ValueError("Gelman-Rubin needs >= 2 chains with >= 2 draws each")
    means = x.mean(axis=1)
    w = float(x.var(axis=1, ddof=1).mean())
    b = m * float(means.var(ddof=1))
    if w == 0.0:
        raise ValueError("within-chain variance is zero; R-hat undefined")
    return math.sqrt(((m - 1) / m * w + b / m) / w)


def gelman_rubin_all(chains: ChainSet) -> np.ndarray:
    return np.array([gelman_rubin(chains, j) for j in range(chains.p)])


def autocorrelation(x: np.ndarray, max_lag: int) -> np.ndarray:
    """Sample ACF of a single-coordinate chain at lags 0..max_lag."""
    x = np.asarray(x, dtype=float)
    m = len(x)
    if max_lag >= m:
        raise ValueError("max_lag must be smaller than the chain length")
    centered = x - x.mean()
    denom = float(centered @ centered)
    if denom == 0.0:
        raise ValueError("constant chain; autocorrelation undefined")
    return np.array([
        float(centered[: m - k] @ centered[k:]) / denom for k in range(max_lag + 1)
    ])


def save_chain_csv(path, chains: ChainSet, chain_index: int):
    """Dump one chain's retained draws for external trace plotting."""
    p = chains.p
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration"] + [f"beta_{j}" for j in range(p)] + ["log_posterior"])
        for i, it in enumerate(chains.iterations):
            row = [int(it)] + [repr(float(v)) for v in chains.draws[chain_index, i]]
            row.append(repr(float(chains.log_post[chain_index, i])))
            writer.writerow(row)


def with_seed(config: McmcConfig, seed: int) -> McmcConfig:
    return replace(config, seed=seed)

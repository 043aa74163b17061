"""Posterior summaries, estimation-error metrics, model-selection criteria,
and the chi-square goodness-of-fit test on marginal counts.

Summaries and criteria pool the retained draws of all chains. Per-draw
likelihood matrices are evaluated in one vectorized pass, and the CPO
harmonic means are formed in log space for stability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import distribution
from .model import ETA_CLIP, Dataset, NumericalError
from .sampler import ChainSet
from .special import LogBellTable, build_log_bell_table, chisq_sf, lambert_w0, log_factorial


@dataclass
class PosteriorReport:
    """Per-coefficient posterior mean, median, SD, and HPD bounds."""

    level: float
    mean: np.ndarray
    median: np.ndarray
    psd: np.ndarray
    hpd_lower: np.ndarray
    hpd_upper: np.ndarray

    def to_dict(self) -> dict:
        return {
            "level": self.level,
            "mean": self.mean.tolist(),
            "median": self.median.tolist(),
            "psd": self.psd.tolist(),
            "hpd_lower": self.hpd_lower.tolist(),
            "hpd_upper": self.hpd_upper.tolist(),
        }

    def format_table(self, names: list[str] | None = None) -> str:
        p = len(self.mean)
        names = names or [f"beta_{j}" for j in range(p)]
        width = max(len(n) for n in names)
        lines = [
            f"{'':{width}}  {'mean':>10} {'median':>10} {'psd':>10} "
            f"{'hpd_lo':>10} {'hpd_hi':>10}"
        ]
        for j, name in enumerate(names):
            lines.append(
                f"{name:{width}}  {self.mean[j]:>10.4f} {self.median[j]:>10.4f} "
                f"{self.psd[j]:>10.4f} {self.hpd_lower[j]:>10.4f} {self.hpd_upper[j]:>10.4f}"
            )
        return "\n".join(lines)


@dataclass
class CriteriaReport:
    """LMPL (larger is better) and DIC/EAIC/EBIC (smaller is better)."""

    lmpl: float
    dic: float
    eaic: float
    ebic: float
    cpo: np.ndarray

    def to_dict(self) -> dict:
        return {
            "lmpl": self.lmpl,
            "dic": self.dic,
            "eaic": self.eaic,
            "ebic": self.ebic,
            "cpo": self.cpo.tolist(),
        }

    def format_table(self) -> str:
        return (
            f"{'LMPL':>10} {'DIC':>10} {'EAIC':>10} {'EBIC':>10}\n"
            f"{self.lmpl:>10.4f} {self.dic:>10.4f} {self.eaic:>10.4f} {self.ebic:>10.4f}"
        )


@dataclass
class GofReport:
    """Observed-vs-expected cell counts with the chi-square statistic."""

    labels: list[str]
    observed: np.ndarray
    expected: np.ndarray
    statistic: float
    df: int
    p_value: float

    def to_dict(self) -> dict:
        return {
            "labels": self.labels,
            "observed": self.observed.tolist(),
            "expected": self.expected.tolist(),
            "statistic": self.statistic,
            "df": self.df,
            "p_value": self.p_value,
        }

    def format_table(self) -> str:
        lines = [f"{'count':>8} {'observed':>9} {'expected':>10}"]
        for lab, o, e in zip(self.labels, self.observed, self.expected):
            lines.append(f"{lab:>8} {int(o):>9d} {e:>10.3f}")
        lines.append(f"chi2 = {self.statistic:.3f}, df = {self.df}, p = {self.p_value:.3f}")
        return "\n".join(lines)


def hpd_interval(draws: np.ndarray, level: float) -> tuple[float, float]:
    """Shortest window over sorted draws containing ceil(level * m) of them.

    Ties break toward the earliest window, so the result is deterministic.
    """
    if not (0.0 < level < 1.0):
        raise ValueError("level must be in (0, 1)")
    xs = np.sort(np.asarray(draws, dtype=float))
    m = len(xs)
    k = math.ceil(level * m)
    if k < 2:
        raise ValueError("too few draws for an HPD interval")
    widths = xs[k - 1:] - xs[: m - k + 1]
    i = int(np.argmin(widths))  # argmin returns the first minimizer
    return float(xs[i]), float(xs[i + k - 1])


def summarize(chains: ChainSet, level: float = 0.95) -> PosteriorReport:
    """Pooled posterior mean / median / SD / HPD for every coefficient."""
    pooled = chains.pooled()
    if pooled.shape[0] < 100:
        raise ValueError("need at least 100 pooled draws to summarize")
    p = pooled.shape[1]
    lows = np.empty(p)
    highs = np.empty(p)
    for j in range(p):
        lows[j], highs[j] = hpd_interval(pooled[:, j], level)
    return PosteriorReport(
        level=level,
        mean=pooled.mean(axis=0),
        median=np.median(pooled, axis=0),
        psd=pooled.std(axis=0, ddof=1),
        hpd_lower=lows,
        hpd_upper=highs,
    )


def mse_mae(estimates, truth) -> tuple[float, float]:
    """Mean squared and mean absolute error over coefficients."""
    est = np.asarray(estimates, dtype=float)
    tru = np.asarray(truth, dtype=float)
    if est.shape != tru.shape:
        raise ValueError("estimates and truth must have equal length")
    err = est - tru
    return float(np.mean(err**2)), float(np.mean(np.abs(err)))


def per_observation_log_density(kind: str, dataset: Dataset, draws: np.ndarray,
                                table: LogBellTable | None = None) -> np.ndarray:
    """(M, n) matrix of log f(y_i | beta_k) for all retained draws."""
    eta = np.clip(draws @ dataset.X.T, -ETA_CLIP, ETA_CLIP)
    y = dataset.y.astype(float)
    logfact = dataset.log_factorials()
    if kind == "bell":
        if table is None or int(dataset.y.max()) > table.max_index:
            raise ValueError("the Bell model needs a log-Bell table covering max(y)")
        theta = lambert_w0(np.exp(eta))
        out = (y * np.log(theta) + (1.0 - np.exp(theta))
               + table.values[dataset.y] - logfact)
    elif kind == "poisson":
        out = y * eta - np.exp(eta) - logfact
    else:
        raise ValueError("kind must be 'bell' or 'poisson'")
    if not np.all(np.isfinite(out)):
        k, i = np.argwhere(~np.isfinite(out))[0]
        raise NumericalError(f"non-finite log density at draw {k}, observation {i}")
    return out


def _logsumexp(a: np.ndarray, axis=None) -> np.ndarray:
    m = np.max(a, axis=axis, keepdims=True)
    out = np.log(np.sum(np.exp(a - m), axis=axis)) + np.squeeze(m, axis=axis)
    return out


def cpo_lmpl(kind: str, dataset: Dataset, chains: ChainSet,
             table: LogBellTable | None = None) -> tuple[np.ndarray, float]:
    """Conditional predictive ordinates and their summed logs.

    CPO_i is the harmonic mean of f(y_i | beta) over retained draws,
    log CPO_i = log M - logsumexp_k(-log f_ik), accumulated in log space.
    """
    logf = per_observation_log_density(kind, dataset, chains.pooled(), table)
    m_total = logf.shape[0]
    log_cpo = math.log(m_total) - _logsumexp(-logf, axis=0)
    return np.exp(log_cpo), float(log_cpo.sum())


def dic(kind: str, dataset: Dataset, chains: ChainSet,
        table: LogBellTable | None = None) -> float:
    """Deviance information criterion 2[-2 mean_k log L(beta_k) + log L(beta_bar)]."""
    logf = per_observation_log_density(kind, dataset, chains.pooled(), table)
    loglik = logf.sum(axis=1)
    beta_bar = chains.pooled().mean(axis=0)
    ll_bar = float(
        per_observation_log_density(kind, dataset, beta_bar[None, :], table).sum()
    )
    return float(-4.0 * loglik.mean() + 2.0 * ll_bar)


def eaic_ebic(kind: str, dataset: Dataset, chains: ChainSet,
              table: LogBellTable | None = None) -> tuple[float, float]:
    """Expected AIC and BIC from the mean retained-draw log-likelihood."""
    logf = per_observation_log_density(kind, dataset, chains.pooled(), table)
    lbar = float(logf.sum(axis=1).mean())
    p, n = dataset.p, dataset.n
    return -2.0 * lbar + 2.0 * p, -2.0 * lbar + p * math.log(n)


def criteria_report(kind: str, dataset: Dataset, chains: ChainSet,
                    table: LogBellTable | None = None) -> CriteriaReport:
    cpo, lmpl = cpo_lmpl(kind, dataset, chains, table)
    eaic, ebic = eaic_ebic(kind, dataset, chains, table)
    return CriteriaReport(
        lmpl=lmpl, dic=dic(kind, dataset, chains, table),
        eaic=eaic, ebic=ebic, cpo=cpo,
    )


def chisq_gof(y, kind: str, cells=(0, 1, 2, 3, 4)) -> GofReport:
    """Chi-square fit of the marginal counts to Bell or Poisson.

    Each listed count is its own cell and one extra cell absorbs the upper
    tail. The single parameter is fit by moment matching on the sample mean
    (theta = W0(ybar) for Bell, lambda = ybar for Poisson); df = cells - 1.
    """
    y = np.asarray(y, dtype=np.int64)
    n = len(y)
    if n < 1:
        raise ValueError("need at least one observation")
    ybar = float(y.mean())
    if not (ybar > 0):
        raise ValueError("all-zero sample; no positive mean to fit")
    cells = sorted(int(c) for c in cells)
    top = cells[-1]

    if kind == "bell":
        theta = lambert_w0(ybar)
        table = build_log_bell_table(top)
        probs = np.exp(distribution.log_pmf(np.arange(top + 1), theta, table))
    elif kind == "poisson":
        lam = ybar
        probs = np.exp(
            np.arange(top + 1) * math.log(lam) - lam
            - np.array([log_factorial(k) for k in range(top + 1)])
        )
    else:
        raise ValueError("kind must be 'bell' or 'poisson'")

    cell_probs = [float(probs[c]) for c in cells]
    expected = np.array(cell_probs + [0.0]) * n
    expected[-1] = n - expected[:-1].sum()  # tail cell absorbs the rest
    if np.any(expected < 1e-8):
        raise ValueError("an expected cell count is ~0; use a coarser grouping")

    observed = np.array([int(np.sum(y == c)) for c in cells] + [int(np.sum(y > top))])
    statistic = float(((observed - expected) ** 2 / expected).sum())
    df = len(cells)  # (#cells including tail) - 1
    return GofReport(
        labels=[str(c) for c in cells] + [f">={top + 1}"],
        observed=observed,
        expected=expected,
        statistic=statistic,
        df=df,
        p_value=chisq_sf(statistic, df),
    )

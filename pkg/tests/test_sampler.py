"""Sampler core, chain orchestration, and convergence diagnostics."""

import math

import numpy as np
import pytest

from bellreg.model import Dataset, FlatNormalPrior
from bellreg.sampler import (
    ChainSet,
    McmcConfig,
    ProposalSpec,
    autocorrelation,
    gelman_rubin,
    overdispersed_start,
    random_walk_metropolis,
    run_chain,
    run_chains,
)
from bellreg.special import build_log_bell_table

TABLE = build_log_bell_table(64)


def std_normal_logpdf(x):
    return -0.5 * float(x @ x)


class TestCore:
    def test_standard_normal_pseudo_target(self):
        config = McmcConfig(n_iter=90_000, burn_in=10_000, thin=20, n_chains=1, seed=3)
        rng = np.random.default_rng(3)
        draws, _, rate, _, _ = random_walk_metropolis(
            std_normal_logpdf, np.zeros(1), config, rng
        )
        assert draws.shape == (4000, 1)
        assert abs(draws.mean()) < 0.05
        assert abs(draws.var(ddof=1) - 1.0) < 0.1
        assert 0.1 < rate < 0.6

    def test_near_zero_scale_accepts_everything(self):
        config = McmcConfig(
            n_iter=2000, burn_in=0, thin=1, n_chains=1,
            proposal=ProposalSpec(mode="fixed", sigma=1e-9),
        )
        rng = np.random.default_rng(0)
        draws, _, rate, _, _ = random_walk_metropolis(
            std_normal_logpdf, np.array([0.3]), config, rng
        )
        assert rate > 0.999
        assert np.all(np.abs(draws - 0.3) < 1e-5)

    def test_retained_count_arithmetic(self):
        for n_iter, burn, thin in [(50_000, 10_000, 20), (1003, 100, 7), (10, 0, 3)]:
            config = McmcConfig(n_iter=n_iter, burn_in=burn, thin=thin, n_chains=1,
                                proposal=ProposalSpec(mode="fixed", sigma=0.5))
            assert config.n_retained == (n_iter - burn) // thin
            draws, trace, _, _, iters = random_walk_metropolis(
                std_normal_logpdf, np.zeros(1), config, np.random.default_rng(1)
            )
            assert len(draws) == len(trace) == len(iters) == config.n_retained
            assert iters[0] == burn + thin
            assert iters[-1] <= n_iter

    def test_adaptation_frozen_after_burn_in(self):
        # same seed, same burn-in, different total length: frozen scale identical
        base = dict(burn_in=2000, thin=10, n_chains=1, seed=11)
        _, _, _, sigma_a, _ = random_walk_metropolis(
            std_normal_logpdf, np.zeros(2), McmcConfig(n_iter=4000, **base),
            np.random.default_rng(11),
        )
        _, _, _, sigma_b, _ = random_walk_metropolis(
            std_normal_logpdf, np.zeros(2), McmcConfig(n_iter=12_000, **base),
            np.random.default_rng(11),
        )
        assert sigma_a == sigma_b

    def test_nonfinite_start_rejected(self):
        config = McmcConfig(n_iter=10, burn_in=0, thin=1, n_chains=1)
        with pytest.raises(ValueError):
            random_walk_metropolis(
                lambda x: -math.inf, np.zeros(1), config, np.random.default_rng(0)
            )


@pytest.fixture(scope="module")
def small_problem():
    rng = np.random.default_rng(8)
    X = np.column_stack([np.ones(25), rng.standard_normal(25)])
    y = rng.poisson(1.5, size=25)
    return Dataset(y=y, X=X), FlatNormalPrior(tau=100.0)


class TestChains:
    def test_deterministic_given_seed(self, small_problem):
        ds, prior = small_problem
        config = McmcConfig(n_iter=3000, burn_in=500, thin=5, n_chains=2, seed=7)
        a = run_chains("bell", prior, ds, config, TABLE)
        b = run_chains("bell", prior, ds, config, TABLE)
        np.testing.assert_array_equal(a.draws, b.draws)
        np.testing.assert_array_equal(a.log_post, b.log_post)
        np.testing.assert_array_equal(a.accept_rates, b.accept_rates)

    def test_chain_streams_differ(self, small_problem):
        ds, prior = small_problem
        config = McmcConfig(n_iter=2000, burn_in=200, thin=5, n_chains=2, seed=7)
        cs = run_chains("poisson", prior, ds, config)
        assert not np.array_equal(cs.draws[0], cs.draws[1])

    def test_single_chain_reduces_to_run_chain(self, small_problem):
        ds, prior = small_problem
        config = McmcConfig(n_iter=2000, burn_in=200, thin=5, n_chains=1, seed=9)
        cs = run_chains("poisson", prior, ds, config)
        draws, trace, rate, _, _ = run_chain("poisson", prior, ds, config, 0)
        np.testing.assert_array_equal(cs.draws[0], draws)
        assert cs.accept_rates[0] == rate

    def test_overdispersed_starts_alternate(self):
        np.testing.assert_array_equal(overdispersed_start(3, 0), np.full(3, 0.5))
        np.testing.assert_array_equal(overdispersed_start(3, 1), np.full(3, -0.5))

    def test_retained_draws_have_finite_logpost(self, small_problem):
        ds, prior = small_problem
        config = McmcConfig(n_iter=3000, burn_in=500, thin=5, n_chains=2, seed=1)
        cs = run_chains("bell", prior, ds, config, TABLE)
        assert np.all(np.isfinite(cs.log_post))
        assert cs.n_retained == (3000 - 500) // 5


class TestGelmanRubin:
    def test_hand_example(self):
        chains = np.array([[1.0, 2.0, 3.0, 4.0], [1.0, 2.0, 3.0, 4.0]])
        assert gelman_rubin(chains) == pytest.approx(math.sqrt(3.0 / 4.0), abs=1e-12)

    def test_same_distribution_near_one(self):
        rng = np.random.default_rng(0)
        chains = rng.standard_normal((2, 2000))
        assert 0.99 <= gelman_rubin(chains) <= 1.05

    def test_separated_chains_large(self):
        rng = np.random.default_rng(1)
        chains = np.stack([rng.standard_normal(500), rng.standard_normal(500) + 10.0])
        assert gelman_rubin(chains) > 1.1

    def test_zero_within_variance(self):
        with pytest.raises(ValueError):
            gelman_rubin(np.array([[1.0, 1.0, 1.0], [2.0, 2.0, 2.0]]))

    def test_needs_two_chains(self):
        with pytest.raises(ValueError):
            gelman_rubin(np.ones((1, 100)))


class TestAutocorrelation:
    def test_lag_zero_is_one(self):
        x = np.random.default_rng(0).standard_normal(500)
        assert autocorrelation(x, 10)[0] == 1.0

    def test_iid_band(self):
        x = np.random.default_rng(1).standard_normal(10_000)
        acf = autocorrelation(x, 20)
        assert np.all(np.abs(acf[1:]) < 0.05)

    def test_alternating_sequence(self):
        x = np.array([1.0, -1.0] * 200)
        assert autocorrelation(x, 1)[1] == pytest.approx(-1.0, abs=5e-3)

    def test_constant_chain_rejected(self):
        with pytest.raises(ValueError):
            autocorrelation(np.ones(100), 5)

    def test_max_lag_bound(self):
        with pytest.raises(ValueError):
            autocorrelation(np.arange(10.0), 10)


class TestPosteriorAgainstQuadrature:
    def test_intercept_only_bell_matches_grid(self):
        """Light version of the grid-quadrature comparison (acceptance runs
        the full m >= 8000 one)."""
        rng = np.random.default_rng(123)
        from bellreg import distribution
        y = np.array([distribution.sample(1.0, rng) for _ in range(30)])
        ds = Dataset(y=y, X=np.ones((30, 1)))
        prior = FlatNormalPrior(tau=100.0)
        from bellreg.model import make_log_posterior
        logpost = make_log_posterior("bell", prior, ds, TABLE)

        grid = np.linspace(-3.0, 3.0, 2001)
        logvals = np.array([logpost(np.array([b])) for b in grid])
        w = np.exp(logvals - logvals.max())
        w /= w.sum()
        mean_oracle = float(w @ grid)
        sd_oracle = math.sqrt(float(w @ (grid - mean_oracle) ** 2))

        config = McmcConfig(n_iter=30_000, burn_in=5_000, thin=10, n_chains=2, seed=5)
        cs = run_chains("bell", prior, ds, config, TABLE)
        pooled = cs.pooled()[:, 0]
        assert pooled.mean() == pytest.approx(mean_oracle, abs=0.03)
        assert pooled.std(ddof=1) == pytest.approx(sd_oracle, rel=0.15)

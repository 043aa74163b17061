"""Bell distribution: pmf values, moments, exact sampling, moment MLE.

The compound-Poisson representation (a Poisson(e^theta - 1) number of
zero-truncated Poisson(theta) summands) serves as an independent sampling
oracle for the inversion sampler.
"""

import math

import numpy as np
import pytest

from bellreg import distribution as dist
from bellreg.special import build_log_bell_table

TABLE = build_log_bell_table(256)


class TestLogPmf:
    def test_spec_points(self):
        assert dist.log_pmf(0, 1.0, TABLE) == pytest.approx(1.0 - math.e, abs=1e-12)
        assert dist.log_pmf(1, 1.0, TABLE) == pytest.approx(1.0 - math.e, abs=1e-12)
        # 2 log(1/2) + 1 - e^{1/2} + log 2 - log 2! computed by hand
        expected = 2.0 * math.log(0.5) + 1.0 - math.exp(0.5)
        assert expected == pytest.approx(-2.0350156318, abs=1e-9)
        assert dist.log_pmf(2, 0.5, TABLE) == pytest.approx(expected, abs=1e-12)

    def test_vectorized(self):
        ys = np.arange(10)
        vals = dist.log_pmf(ys, 0.7, TABLE)
        assert vals.shape == (10,)
        for y in ys:
            assert vals[y] == pytest.approx(dist.log_pmf(int(y), 0.7, TABLE))

    @pytest.mark.parametrize("theta", [0.1, 0.5, 1.0, 2.0])
    def test_normalization(self, theta):
        # support cutoff chosen so the remaining tail is below 1e-12
        probs = np.exp(dist.log_pmf(np.arange(TABLE.max_index + 1), theta, TABLE))
        assert probs.sum() == pytest.approx(1.0, abs=1e-9)

    def test_guards(self):
        with pytest.raises(ValueError):
            dist.log_pmf(1, 0.0, TABLE)
        with pytest.raises(ValueError):
            dist.log_pmf(1, 701.0, TABLE)
        with pytest.raises(IndexError):
            dist.log_pmf(TABLE.max_index + 1, 1.0, TABLE)


class TestMoments:
    def test_mean(self):
        assert dist.mean(1.0) == pytest.approx(math.e, rel=1e-14)
        assert dist.mean(0.5) == pytest.approx(0.8243606354, abs=1e-9)
        assert dist.mean(1e-9) == pytest.approx(1e-9, rel=1e-6)

    def test_variance(self):
        assert dist.variance(1.0) == pytest.approx(2.0 * math.e, rel=1e-14)
        assert dist.variance(0.5) == pytest.approx(1.2365409530, abs=1e-9)

    @pytest.mark.parametrize("theta", [1e-4, 0.1, 0.5, 1.0, 3.0])
    def test_overdispersion(self, theta):
        assert dist.variance(theta) / dist.mean(theta) == pytest.approx(1.0 + theta)
        assert dist.variance(theta) > dist.mean(theta)


class TestSampling:
    def test_moments_at_theta_one(self):
        rng = np.random.default_rng(17)
        n = 200_000
        draws = dist.sample(1.0, rng, size=n)
        se_mean = math.sqrt(dist.variance(1.0) / n)
        assert draws.mean() == pytest.approx(math.e, abs=3 * se_mean)
        assert draws.var(ddof=1) == pytest.approx(2.0 * math.e, rel=0.05)

    def test_tiny_theta_mostly_zero(self):
        rng = np.random.default_rng(3)
        draws = dist.sample(0.01, rng, size=20_000)
        p0 = math.exp(1.0 - math.exp(0.01))
        assert p0 == pytest.approx(0.99, abs=0.001)
        assert np.mean(draws == 0) == pytest.approx(p0, abs=0.005)

    def test_deterministic_given_state(self):
        a = dist.sample(0.8, np.random.default_rng(42), size=1000)
        b = dist.sample(0.8, np.random.default_rng(42), size=1000)
        np.testing.assert_array_equal(a, b)

    def test_scalar_draw(self):
        val = dist.sample(1.0, np.random.default_rng(0))
        assert isinstance(val, int)

    def test_against_compound_poisson_oracle(self):
        """Same law as Poisson(e^theta - 1) many zero-truncated Poisson(theta)."""
        theta = 1.0
        rng = np.random.default_rng(99)
        n = 100_000
        counts = rng.poisson(math.exp(theta) - 1.0, size=n)
        total = np.zeros(n, dtype=np.int64)
        remaining = counts.copy()
        while np.any(remaining > 0):
            active = remaining > 0
            draw = rng.poisson(theta, size=int(active.sum()))
            accepted = draw > 0  # zero-truncation by rejection
            idx = np.flatnonzero(active)[accepted]
            total[idx] += draw[accepted]
            remaining[idx] -= 1
        ours = dist.sample(theta, np.random.default_rng(7), size=n)
        # empirical pmfs agree within 4 binomial standard errors per cell
        for y in range(11):
            p_oracle = np.mean(total == y)
            p_ours = np.mean(ours == y)
            se = math.sqrt(2 * p_oracle * (1 - p_oracle) / n) + 1e-12
            assert abs(p_ours - p_oracle) < 4 * se

    def test_law_matches_pmf(self):
        theta = 1.0
        n = 200_000
        draws = dist.sample(theta, np.random.default_rng(5), size=n)
        probs = np.exp(dist.log_pmf(np.arange(11), theta, TABLE))
        for y in range(11):
            se = math.sqrt(probs[y] * (1 - probs[y]) / n)
            assert abs(np.mean(draws == y) - probs[y]) < 4 * se + 1e-12


class TestMleTheta:
    def test_fixed_points(self):
        assert dist.mle_theta(math.e) == pytest.approx(1.0, abs=1e-12)
        assert dist.mle_theta(0.8243606354) == pytest.approx(0.5, abs=1e-9)

    def test_mine_mean(self):
        # 98 fractures over 44 mines
        assert dist.mle_theta(98.0 / 44.0) == pytest.approx(0.9029, abs=5e-4)

    @pytest.mark.parametrize("theta", np.geomspace(1e-4, 5.0, 12))
    def test_roundtrip_through_mean(self, theta):
        assert dist.mle_theta(dist.mean(theta)) == pytest.approx(theta, abs=1e-9)

    def test_degenerate_sample(self):
        with pytest.raises(ValueError):
            dist.mle_theta(0.0)

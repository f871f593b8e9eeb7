"""
Tests for the equilibrium coefficients, effort and the Monte Carlo oracle.
"""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from pydantic import ValidationError

from robust_tournament.design.closed_form import solve_n3_closed_form
from robust_tournament.noise.adversary import QuantileDensity, adversarial_m
from robust_tournament.noise.reconstruction import exponential_limit, reconstruct_distribution
from robust_tournament.equilibrium import (
    PowerCost,
    beta_from_B,
    compute_B,
    equilibrium_effort,
    marginal_benefit,
    monte_carlo_B,
)
from robust_tournament.numerics.kernel import schedule_from_differentials
from robust_tournament.verification import random_interior_d


@pytest.fixture(scope="module")
def uniform_dist():
    return reconstruct_distribution(QuantileDensity.uniform(), 0.0, 401)


class TestComputeB:

    @pytest.mark.parametrize("n", [2, 3, 5, 10, 40])
    def test_uniform_noise(self, n):
        assert_allclose(compute_B(QuantileDensity.uniform(), n), 1.0, rtol=1e-12)

    @pytest.mark.parametrize("n", [2, 4, 9])
    @pytest.mark.parametrize("rate", [1.0, 2.5])
    def test_exponential_noise(self, n, rate):
        expected = rate * np.arange(1, n) / n
        assert_allclose(compute_B(QuantileDensity.exponential(rate), n), expected, rtol=1e-12)

    def test_beta_summation_by_parts(self):
        d = random_interior_d(6, np.random.default_rng(3))
        m = adversarial_m(d, 0.0)
        B = compute_B(m, 6)
        beta = beta_from_B(B)
        assert beta.size == 6
        assert float(beta.sum()) == pytest.approx(0.0, abs=1e-14)
        assert float(beta @ schedule_from_differentials(d)) == pytest.approx(float(d @ B), rel=1e-12)


class TestMarginalBenefit:

    def test_uniform_sums_differentials(self):
        d = random_interior_d(7, np.random.default_rng(1))
        assert marginal_benefit(d, QuantileDensity.uniform()) == pytest.approx(float(d.sum()), rel=1e-12)

    def test_exponential_ignores_allocation(self):
        for seed in range(3):
            d = random_interior_d(8, np.random.default_rng(seed))
            assert marginal_benefit(d, QuantileDensity.exponential(2.0)) == pytest.approx(2.0 / 8, rel=1e-12)

    def test_adversarial_value(self):
        d = solve_n3_closed_form().differentials
        m = adversarial_m(d, 0.0)
        assert marginal_benefit(d, m) == pytest.approx(math.exp(-0.2328), abs=2e-4)
        assert marginal_benefit(d, m) == pytest.approx(m.constant, rel=1e-12)

    @pytest.mark.parametrize("n", [4, 7])
    @pytest.mark.parametrize("noise", ["adversarial", "exponential", "uniform"])
    def test_integral_matches_kernel_moments(self, n, noise):
        rng = np.random.default_rng(n)
        d = random_interior_d(n, rng)
        m = {
            "adversarial": lambda: adversarial_m(random_interior_d(n, rng), 0.3),
            "exponential": lambda: QuantileDensity.exponential(1.7),
            "uniform": QuantileDensity.uniform,
        }[noise]()
        assert marginal_benefit(d, m) == pytest.approx(float(d @ compute_B(m, n)), rel=1e-12)


class TestEffort:

    def test_quadratic_cost_uniform_noise(self):
        # d = (0, 1/2) spends the budget with sum d = 1/2
        assert equilibrium_effort([0.0, 0.5], QuantileDensity.uniform()) == pytest.approx(0.5, rel=1e-12)

    def test_cubic_cost_inversion(self):
        assert PowerCost(p=3.0, c0=1.0).inverse_marginal(4.0) == pytest.approx(2.0)

    def test_exponential_rate_n(self):
        for seed in range(3):
            d = random_interior_d(5, np.random.default_rng(seed))
            assert equilibrium_effort(d, QuantileDensity.exponential(5.0)) == pytest.approx(1.0, rel=1e-12)

    def test_adversarial_effort(self):
        d = solve_n3_closed_form().differentials
        effort = equilibrium_effort(d, adversarial_m(d, 0.0), PowerCost(p=2.0, c0=1.0))
        assert effort == pytest.approx(0.7923, abs=2e-4)

    @pytest.mark.parametrize("kwargs", [{"p": 1.0}, {"p": 0.5}, {"c0": 0.0}, {"c0": -1.0}])
    def test_invalid_cost(self, kwargs):
        with pytest.raises(ValidationError):
            PowerCost(**kwargs)


class TestMonteCarlo:

    def test_uniform_three_agents(self, uniform_dist):
        estimate = monte_carlo_B(uniform_dist, 3, samples=200_000, bump=0.005, seed=11)
        assert estimate.within([1.0, 1.0], sigmas=4.0)
        assert estimate.batches == 2

    def test_two_agents(self, uniform_dist):
        estimate = monte_carlo_B(uniform_dist, 2, samples=100_000, bump=0.005, seed=5)
        assert estimate.within([1.0], sigmas=4.0)

    def test_reproducible(self, uniform_dist):
        first = monte_carlo_B(uniform_dist, 4, samples=20_000, seed=42)
        second = monte_carlo_B(uniform_dist, 4, samples=20_000, seed=42)
        assert_allclose(first.estimates, second.estimates, rtol=0, atol=0)
        assert first.to_dict()["seed"] == 42

    def test_argument_checks(self, uniform_dist):
        with pytest.raises(ValueError):
            monte_carlo_B(uniform_dist, 3, samples=9_999)
        with pytest.raises(ValueError):
            monte_carlo_B(uniform_dist, 3, samples=20_000, bump=0.5)
        with pytest.raises(ValueError):
            monte_carlo_B(uniform_dist, 3, samples=20_000, bump=1e-6)

    @pytest.mark.slow
    def test_million_samples_uniform(self, uniform_dist):
        estimate = monte_carlo_B(uniform_dist, 3, samples=1_000_000, bump=0.005, seed=0)
        assert estimate.within([1.0, 1.0], sigmas=3.0)

    @pytest.mark.slow
    def test_million_samples_exponential(self):
        dist = exponential_limit(0.0, 0.0)
        estimate = monte_carlo_B(dist, 4, samples=1_000_000, bump=0.005, seed=0)
        assert estimate.within(np.arange(1, 4) / 4, sigmas=3.0)

    def test_default_bump_on_adversarial_noise(self):
        d = solve_n3_closed_form().differentials
        m = adversarial_m(d, 0.0)
        dist = reconstruct_distribution(m, 0.0, 2001)
        estimate = monte_carlo_B(dist, 3, samples=200_000, seed=3)
        assert estimate.bump == pytest.approx(1e-2 * dist.reference_length())
        assert estimate.within(compute_B(m, 3), sigmas=4.0)

    @pytest.mark.slow
    def test_million_samples_default_bump_adversarial(self):
        d = solve_n3_closed_form().differentials
        m = adversarial_m(d, 0.0)
        estimate = monte_carlo_B(reconstruct_distribution(m, 0.0, 2001), 3, samples=1_000_000, seed=0)
        assert estimate.within(compute_B(m, 3), sigmas=3.0)

    @pytest.mark.slow
    def test_million_samples_default_bump_exponential(self):
        estimate = monte_carlo_B(exponential_limit(0.0, 0.0), 4, samples=1_000_000, seed=0)
        assert estimate.within(np.arange(1, 4) / 4, sigmas=3.0)

"""
Tests for the quadrature rules and the beta-kernel mixture.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose
from scipy.stats import binom

from robust_tournament.config import QuadratureSpec, SolverConfig
from robust_tournament.errors import EndpointSingularityError, QuadratureDivergenceError
from robust_tournament.numerics.quadrature import gauss_legendre_rule, graded_rule, integrate
from robust_tournament.numerics.kernel import (
    PrizeDifferentials,
    PrizeSchedule,
    a_values,
    basis_pair,
    beta_kernels,
    binomial_weights,
    check_tournament_size,
    eval_a,
    gradient_l,
    kernel_peaks,
    objective_W,
    winner_take_all,
)
from robust_tournament.design.asymptotics import asymptotic_d, harmonic_mixture
from robust_tournament.verification import feasible_difference, random_interior_d

PUBLISHED_D3 = (0.8109, 0.0945)
PUBLISHED_D4 = (0.6968, 0.0, 0.1011)


def naive_a(d, z):
    n = len(d) + 1
    return sum(
        d[r - 1] * r * math.comb(n - 1, r) * z ** (n - r - 1) * (1 - z) ** (r - 1)
        for r in range(1, n)
    )


class TestQuadrature:

    def test_polynomial_is_exact(self):
        assert integrate(lambda z: z ** 5, QuadratureSpec()) == pytest.approx(1 / 6, abs=1e-15)

    def test_graded_rule_handles_log_singularity(self):
        value = integrate(lambda z: -np.log(z), QuadratureSpec(), graded=True)
        assert value == pytest.approx(1.0, abs=1e-10)

    def test_divergent_integral_raises(self):
        with pytest.raises(QuadratureDivergenceError):
            integrate(lambda z: 1.0 / z, QuadratureSpec(), graded=True)

    @pytest.mark.parametrize("panels", [1, 2, 3, 16])
    def test_rules_have_unit_mass(self, panels):
        for rule in (gauss_legendre_rule(32, panels), graded_rule(32, panels)):
            assert rule.weights.sum() == pytest.approx(1.0, abs=1e-14)
            assert np.all((rule.nodes > 0) & (rule.nodes < 1))

    def test_panels_scale_with_n(self):
        q = QuadratureSpec()
        assert q.panels_for(10) == 16
        assert q.panels_for(1000) == 250


class TestPrizeTypes:

    @pytest.mark.parametrize("bad", [1, 0, -3, 2.5, True])
    def test_tournament_size_rejected(self, bad):
        with pytest.raises(ValueError):
            check_tournament_size(bad)

    def test_budget_enforced(self):
        with pytest.raises(ValueError):
            PrizeDifferentials(np.array([0.5, 0.5]))
        with pytest.raises(ValueError):
            PrizeDifferentials(np.array([1.5, -0.25]))

    def test_schedule_round_trip(self):
        d = PrizeDifferentials(np.array([0.5, 0.25]))
        v = d.to_schedule()
        assert_allclose(v.values, [0.75, 0.25, 0.0])
        assert_allclose(v.to_differentials().values, d.values)

    def test_schedule_must_be_monotone(self):
        with pytest.raises(ValueError):
            PrizeSchedule(np.array([0.25, 0.75, 0.0]))

    def test_normalized_scales_to_budget(self):
        d = PrizeDifferentials.normalized([2.0, 1.0, 1.0])
        assert d.budget() == pytest.approx(1.0, abs=1e-15)

    def test_winner_take_all(self):
        assert winner_take_all(4).tolist() == [1.0, 0.0, 0.0, 0.0]
        assert_allclose(winner_take_all(4).to_differentials().values, [1.0, 0.0, 0.0])


class TestBinomialWeights:

    @pytest.mark.parametrize("trials", [1, 5, 50])
    def test_matches_scipy(self, trials):
        p = np.linspace(0.0, 1.0, 41)
        expected = binom.pmf(np.arange(trials + 1)[:, None], trials, p[None, :])
        assert_allclose(binomial_weights(trials, p), expected, rtol=1e-10, atol=1e-300)

    def test_large_trials_stay_normalized(self):
        weights = binomial_weights(3000, np.array([0.001, 0.3, 0.5, 0.999]))
        assert np.all(np.isfinite(weights))
        assert_allclose(weights.sum(axis=0), 1.0, rtol=1e-12)

    def test_kernels_integrate_to_one(self):
        _, fine = basis_pair(12, QuadratureSpec())
        assert_allclose(fine.rule.integrate(fine.matrix), 1.0, rtol=1e-13)

    def test_kernel_peaks(self):
        assert_allclose(kernel_peaks(4), [1.0, 0.5, 0.0])
        assert_allclose(kernel_peaks(2), [0.5])
        for n in (5, 9):
            z = np.linspace(0, 1, 2001)
            kernels = beta_kernels(n, z)
            assert_allclose(z[np.argmax(kernels, axis=1)], kernel_peaks(n), atol=1e-3)


class TestEvalA:

    def test_two_agents(self):
        assert eval_a(0.7, [1.0]) == pytest.approx(1.0, abs=1e-15)

    def test_three_agents_endpoints(self):
        assert eval_a(0.0, PUBLISHED_D3) == pytest.approx(0.1890, abs=1e-12)
        assert eval_a(1.0, PUBLISHED_D3) == pytest.approx(1.6218, abs=1e-12)

    def test_matches_polynomial_sum(self):
        d = asymptotic_d(10).values
        assert eval_a(0.5, d) == pytest.approx(naive_a(d, 0.5), abs=1e-12)

    def test_harmonic_mixture_closed_form(self):
        z = np.linspace(0.0, 1.0, 101)
        for n in (3, 10, 1000):
            assert_allclose(a_values(asymptotic_d(n), z), harmonic_mixture(n, z), rtol=1e-10)

    def test_z_outside_unit_interval(self):
        with pytest.raises(ValueError):
            eval_a(1.2, PUBLISHED_D3)
        with pytest.raises(ValueError):
            a_values([-0.1, 0.5], [0.5])


class TestObjective:

    def test_two_agents_is_zero(self):
        assert objective_W([1.0]) == pytest.approx(0.0, abs=1e-15)

    def test_three_agents(self):
        assert objective_W(PUBLISHED_D3) == pytest.approx(-0.2328, abs=1e-3)

    def test_four_agents(self):
        assert objective_W(PUBLISHED_D4) == pytest.approx(-1.2626, abs=1e-3)

    def test_zero_endpoint_needs_singular_mode(self):
        with pytest.raises(EndpointSingularityError):
            objective_W([0.0, 0.5])
        # a(z) = 1 - z, so W = -1
        assert objective_W([0.0, 0.5], endpoint_singular=True) == pytest.approx(-1.0, abs=1e-8)

    def test_all_zero_vector_diverges(self):
        with pytest.raises(QuadratureDivergenceError):
            objective_W([0.0, 0.0], endpoint_singular=True)

    @settings(deadline=None, max_examples=25)
    @given(n=st.integers(3, 12), seed_a=st.integers(0, 2 ** 32 - 1), seed_b=st.integers(0, 2 ** 32 - 1))
    def test_concave_along_segments(self, n, seed_a, seed_b):
        d = random_interior_d(n, np.random.default_rng(seed_a))
        e = random_interior_d(n, np.random.default_rng(seed_b))
        midpoint = objective_W(0.5 * (d + e))
        assert midpoint >= 0.5 * (objective_W(d) + objective_W(e)) - 1e-12


class TestGradient:

    def test_two_agents(self):
        assert_allclose(gradient_l([1.0]), [1.0], atol=1e-14)

    def test_three_agents(self):
        ell = gradient_l(PUBLISHED_D3)
        assert ell[0] == pytest.approx(1.0, abs=2e-3)
        assert ell[1] == pytest.approx(2.0, abs=2e-3)

    def test_four_agents_middle_rank(self):
        assert gradient_l(PUBLISHED_D4)[1] == pytest.approx(1.919, abs=2e-3)

    def test_zero_endpoint_diverges(self):
        with pytest.raises(EndpointSingularityError):
            gradient_l([0.0, 0.5])

    @settings(deadline=None, max_examples=30)
    @given(n=st.integers(2, 30), seed=st.integers(0, 2 ** 32 - 1))
    def test_euler_identity(self, n, seed):
        d = random_interior_d(n, np.random.default_rng(seed))
        assert float(d @ gradient_l(d)) == pytest.approx(1.0, abs=1e-10)

    def test_matches_finite_differences(self):
        d = random_interior_d(6, np.random.default_rng(7))
        ell = gradient_l(d)
        h = 1e-6
        for r in range(d.size):
            bump = np.zeros_like(d)
            bump[r] = h
            # W is defined off the budget plane, so plain partials apply
            numeric = (objective_W(d + bump) - objective_W(d - bump)) / (2 * h)
            assert numeric == pytest.approx(ell[r], rel=1e-5)

    @pytest.mark.parametrize("n", [3, 5, 8])
    def test_matches_feasible_direction_differences(self, n):
        cfg = SolverConfig()
        rng = np.random.default_rng(100 + n)
        ranks = np.arange(1, n)
        for _ in range(20):
            d = random_interior_d(n, rng)
            ell = gradient_l(d, cfg.quadrature) / ranks
            for r in range(n - 1):
                s = (r + 1) % (n - 1)
                # moving along e_r/r - e_s/s keeps the budget, so W changes at l_r/r - l_s/s
                expected = ell[r] - ell[s]
                scale = max(abs(ell[r]), abs(ell[s]))
                assert abs(feasible_difference(d, r, s, cfg) - expected) <= 1e-5 * scale

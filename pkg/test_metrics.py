"""
Tests for the inequality metrics.
"""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from robust_tournament.numerics.kernel import winner_take_all
from robust_tournament.design.asymptotics import asymptotic_v
from robust_tournament.metrics import (
    gini,
    gini_sweep,
    harmonic,
    lorenz,
    lorenz_dominates,
    majorizes,
    pairwise_gini,
)

ROBUST_3 = [0.9055, 0.0945, 0.0]
ROBUST_4 = [0.7979, 0.1011, 0.1011, 0.0]


class TestGini:

    def test_equal_prizes(self):
        assert gini(np.full(5, 0.2)) == pytest.approx(0.0, abs=1e-15)

    @pytest.mark.parametrize("n", [2, 3, 17, 100, 1000])
    def test_harmonic_schedule_is_one_half(self, n):
        assert gini(asymptotic_v(n)) == pytest.approx(0.5, abs=1e-12)

    def test_robust_three_agents(self):
        assert gini(ROBUST_3) == pytest.approx(0.6037, abs=2e-4)

    def test_winner_take_all(self):
        assert gini(winner_take_all(5)) == pytest.approx(0.8)

    def test_budget_checked(self):
        with pytest.raises(ValueError):
            gini([0.5, 0.2, 0.0])
        with pytest.raises(ValueError):
            gini([1.2, -0.2])

    @settings(deadline=None, max_examples=50)
    @given(st.lists(st.floats(0.0, 10.0), min_size=2, max_size=40).filter(lambda xs: sum(xs) > 1e-3))
    def test_sorted_formula_matches_pairwise(self, raw):
        v = np.sort(np.asarray(raw))[::-1] / np.sum(raw)
        assert gini(v) == pytest.approx(pairwise_gini(v), abs=1e-12)


class TestLorenz:

    def test_equal_prizes_on_diagonal(self):
        curve = lorenz(np.full(4, 0.25))
        assert_allclose(curve.y, curve.x, atol=1e-15)
        assert curve.area_gap() == pytest.approx(0.0, abs=1e-15)

    def test_winner_take_all_hugs_zero(self):
        curve = lorenz(winner_take_all(4))
        assert_allclose(curve.y, [0.0, 0.0, 0.0, 0.0, 1.0])

    def test_robust_three_agents(self):
        curve = lorenz(ROBUST_3)
        assert_allclose(curve.points, [[0, 0], [1 / 3, 0], [2 / 3, 0.0945], [1, 1]], atol=1e-12)

    def test_area_gap_is_gini_for_breakpoints(self):
        v = asymptotic_v(9)
        assert lorenz(v).area_gap() == pytest.approx(gini(v), abs=1e-12)

    def test_resampling(self):
        curve = lorenz(ROBUST_3, resolution=7)
        assert curve.points.shape == (7, 2)
        assert curve.at(0.5) == pytest.approx(0.0945 / 2)


class TestOrdering:

    def test_majorization(self):
        assert majorizes(winner_take_all(4).values, np.full(4, 0.25))
        assert not majorizes(np.full(4, 0.25), winner_take_all(4).values)
        assert majorizes(ROBUST_3, asymptotic_v(3).values)

    def test_majorization_needs_equal_length(self):
        with pytest.raises(ValueError):
            majorizes([1.0, 0.0], [1.0, 0.0, 0.0])

    def test_lorenz_dominance_across_sizes(self):
        assert lorenz_dominates(ROBUST_3, asymptotic_v(3))
        assert not lorenz_dominates(asymptotic_v(3), ROBUST_3)
        assert lorenz_dominates(winner_take_all(5), asymptotic_v(3))


class TestHarmonic:

    @pytest.mark.parametrize("k, expected", [(0, 0.0), (1, 1.0), (3, 11 / 6), (100, 5.18738)])
    def test_values(self, k, expected):
        assert harmonic(k) == pytest.approx(expected, abs=1e-5)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            harmonic(-1)


class TestGiniSweep:

    def test_three_to_ten(self):
        sweep = gini_sweep(3, 10)
        assert [n for n, _ in sweep] == list(range(3, 11))
        values = [g for _, g in sweep]
        assert values[0] == pytest.approx(0.6037, abs=5e-4)
        assert values[1] == pytest.approx(gini(ROBUST_4), abs=5e-4)
        assert values[1] == pytest.approx(0.5984, abs=5e-4)
        assert all(later < earlier for earlier, later in zip(values, values[1:]))

    def test_range_checked(self):
        with pytest.raises(ValueError):
            gini_sweep(5, 4)

    @pytest.mark.slow
    def test_declines_toward_one_half(self):
        values = [g for _, g in gini_sweep(3, 50)]
        assert all(later < earlier for earlier, later in zip(values, values[1:]))
        assert min(values) > 0.5

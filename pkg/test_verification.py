"""
Tests for the invariant battery behind `verify`.
"""

import numpy as np
import pytest

from robust_tournament.design.asymptotics import asymptotic_d
from robust_tournament.design.solver import solve_robust
from robust_tournament.verification import (
    InvariantVerifier,
    random_interior_d,
    smooth_perturbation,
    verify_differentials,
)

CHECK_NAMES = [
    "KKT",
    "Euler Identity",
    "Gradient",
    "Entropy Binding",
    "Minimax Perturbations",
    "Support Length",
    "B_r Oracle",
]


def test_solved_schedule_passes():
    report = InvariantVerifier(samples=100_000).verify(n=4)
    assert InvariantVerifier().perturbations == 100
    assert [check.check_name for check in report.check_results] == CHECK_NAMES
    assert report.passed, report.to_dict()
    assert report.n == 4


def test_non_optimal_schedule_fails_kkt_only_among_deterministic_checks():
    report = verify_differentials(asymptotic_d(6), samples=20_000, perturbations=100)
    failed = report.failed_checks()
    assert not report.passed
    assert "KKT" in failed
    for name in ("Euler Identity", "Gradient", "Entropy Binding", "Minimax Perturbations", "Support Length"):
        assert name not in failed


def test_two_agents():
    report = InvariantVerifier(samples=20_000).verify(n=2)
    assert report.passed, report.to_dict()


def test_nonzero_entropy_bound():
    d = solve_robust(3).d_star
    report = InvariantVerifier(hbar=0.7, samples=50_000, perturbations=100).verify(d=np.asarray(d))
    results = {check.check_name: check for check in report.check_results}
    assert results["Entropy Binding"].passed
    assert results["Support Length"].passed


def test_missing_input_is_reported():
    report = InvariantVerifier().verify()
    assert not report.passed
    assert report.error is not None


@pytest.mark.parametrize("n", [3, 8, 14, 30])
def test_random_interior_points(n):
    rng = np.random.default_rng(n)
    d = random_interior_d(n, rng)
    assert d.size == n - 1
    assert float(np.arange(1, n) @ d) == pytest.approx(1.0, abs=1e-14)
    if n <= 14:
        assert d.min() >= 0.01 - 1e-15
    assert d.min() > 0


def test_perturbations_are_smooth_and_seeded():
    z = np.linspace(0, 1, 11)
    first = smooth_perturbation(np.random.default_rng(1))(z)
    second = smooth_perturbation(np.random.default_rng(1))(z)
    assert np.array_equal(first, second)
    assert np.all(np.isfinite(first))

"""
Tournament equilibrium quantities for a noise representation m(z).

B_r is the marginal probability of being ranked r or higher at the
symmetric equilibrium. It is the integral of the r-th beta kernel against
m. The first-order condition reads sum_r B_r d_r = c'(x*).
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, Optional, Union

import numpy as np
from numpy.typing import ArrayLike
from pydantic import BaseModel, ConfigDict, Field

from .config import QuadratureSpec
from .numerics.kernel import PrizeDifferentials, as_differentials, basis_pair, check_tournament_size
from .numerics.quadrature import check_refinement
from .noise.adversary import QuantileDensity
from .noise.reconstruction import NoiseDistribution

logger = logging.getLogger(__name__)

MIN_SAMPLES = 10_000
DEFAULT_SAMPLES = 1_000_000
DEFAULT_BUMP_FRACTION = 1e-2
BUMP_RANGE = (1e-4, 1e-1)
BATCH_SIZE = 100_000


class PowerCost(BaseModel):
    """Cost c(x) = c0 * x**p / p with p > 1 and c0 > 0."""

    model_config = ConfigDict(frozen=True)

    p: float = Field(default=2.0, gt=1)
    c0: float = Field(default=1.0, gt=0)

    def cost(self, x: float) -> float:
        return self.c0 * x ** self.p / self.p

    def marginal(self, x: float) -> float:
        return self.c0 * x ** (self.p - 1.0)

    def inverse_marginal(self, value: float) -> float:
        """Effort x with c'(x) = value."""
        return (value / self.c0) ** (1.0 / (self.p - 1.0))


def _kernel_moments(m: QuantileDensity, n: int, q: QuadratureSpec) -> np.ndarray:
    coarse, fine = basis_pair(n, q)
    with np.errstate(divide="ignore", invalid="ignore"):
        moments_coarse = coarse.integrate_against(m(coarse.rule.nodes))
        moments_fine = fine.integrate_against(m(fine.rule.nodes))
    check_refinement(moments_coarse, moments_fine, q, "B_r")
    return moments_fine


def compute_B(m: QuantileDensity, n: int, q: Optional[QuadratureSpec] = None) -> np.ndarray:
    """B_1..B_{n-1}: beta-kernel integrals of m."""
    n = check_tournament_size(n)
    return _kernel_moments(m, n, q or QuadratureSpec())


def beta_from_B(B: ArrayLike) -> np.ndarray:
    """Rank-r marginal probabilities beta_r = B_r - B_{r-1}, r = 1..n, with B_0 = B_n = 0."""
    B = np.asarray(B, dtype=float)
    return np.diff(np.concatenate([[0.0], B, [0.0]]))


def marginal_benefit(
    d: Union[PrizeDifferentials, ArrayLike], m: QuantileDensity, q: Optional[QuadratureSpec] = None
) -> float:
    """Integral of a(z; d) m(z) over [0, 1].

    Summing B_r d_r gives the same value; the integral is taken directly so
    the two sides can be checked against each other.
    """
    q = q or QuadratureSpec()
    d = as_differentials(d)
    coarse, fine = basis_pair(check_tournament_size(d.size + 1), q)
    with np.errstate(divide="ignore", invalid="ignore"):
        value_coarse = coarse.rule.integrate(coarse.a(d) * m(coarse.rule.nodes))
        value_fine = fine.rule.integrate(fine.a(d) * m(fine.rule.nodes))
    check_refinement(value_coarse, value_fine, q, "marginal benefit")
    return float(value_fine)


def equilibrium_effort(
    d: Union[PrizeDifferentials, ArrayLike],
    m: QuantileDensity,
    c: Optional[PowerCost] = None,
    q: Optional[QuadratureSpec] = None,
) -> float:
    """Symmetric equilibrium effort x* solving c'(x*) = marginal benefit."""
    c = c or PowerCost()
    benefit = marginal_benefit(d, m, q)
    if not math.isfinite(benefit) or benefit < 0:
        raise ValueError(f"marginal benefit must be finite and non-negative, got {benefit!r}")
    if benefit == 0.0:
        return 0.0
    return c.inverse_marginal(benefit)


@dataclass(frozen=True, eq=False)
class MonteCarloEstimate:
    """Monte Carlo B_r with standard errors."""
    estimates: np.ndarray
    standard_errors: np.ndarray
    samples: int
    bump: float
    seed: int
    batches: int

    def within(self, exact: ArrayLike, sigmas: float = 3.0) -> bool:
        """Whether every estimate lies within the given number of standard errors."""
        gap = np.abs(self.estimates - np.asarray(exact, dtype=float))
        return bool(np.all(gap <= sigmas * self.standard_errors))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "estimates": self.estimates.tolist(),
            "standard_errors": self.standard_errors.tolist(),
            "samples": self.samples,
            "bump": self.bump,
            "seed": self.seed,
            "batches": self.batches,
        }


def _central_difference(own: np.ndarray, rivals: np.ndarray, h: float, thresholds: np.ndarray) -> np.ndarray:
    """Per-draw (1[rank <= r | +h] - 1[rank <= r | -h]) / 2h, shape (n-1, draws)."""
    above_plus = np.sum(rivals > (own + h)[:, None], axis=1)
    above_minus = np.sum(rivals > (own - h)[:, None], axis=1)
    # rank <= r  <=>  at most r-1 rivals ahead
    return ((above_plus[None, :] <= thresholds).astype(float) - (above_minus[None, :] <= thresholds)) / (2.0 * h)


def monte_carlo_B(
    dist: NoiseDistribution,
    n: int,
    samples: int = DEFAULT_SAMPLES,
    bump: Optional[float] = None,
    seed: int = 0,
    batch_size: int = BATCH_SIZE,
) -> MonteCarloEstimate:
    """Extrapolated central-difference estimate of B_r from simulated tournaments.

    A deviator at x* +/- h faces n-1 opponents at x*. The noise density
    jumps at the support ends, so a plain central difference D(h) is off
    by O(h); the estimate is 2 D(bump/2) - D(bump), which cancels that term.
    All four shifts reuse the same noise draws. Batches get independent
    child seeds, so results depend only on (seed, batch count).
    """
    n = check_tournament_size(n)
    if samples < MIN_SAMPLES:
        raise ValueError(f"samples must be at least {MIN_SAMPLES}")
    length = dist.reference_length()
    if bump is None:
        bump = DEFAULT_BUMP_FRACTION * length
    if not (BUMP_RANGE[0] * length <= bump <= BUMP_RANGE[1] * length):
        raise ValueError(f"bump {bump!r} outside [{BUMP_RANGE[0]}, {BUMP_RANGE[1]}] x support length {length:.6g}")

    batches = -(-samples // batch_size)
    children = np.random.SeedSequence(seed).spawn(batches)
    total = np.zeros(n - 1)
    total_sq = np.zeros(n - 1)
    thresholds = np.arange(n - 1)[:, None]
    remaining = samples
    for child in children:
        size = min(batch_size, remaining)
        remaining -= size
        rng = np.random.default_rng(child)
        own = dist.sample(rng, size)
        rivals = dist.sample(rng, (size, n - 1))
        diff = 2.0 * _central_difference(own, rivals, 0.5 * bump, thresholds)
        diff -= _central_difference(own, rivals, bump, thresholds)
        total += diff.sum(axis=1)
        total_sq += (diff ** 2).sum(axis=1)

    mean = total / samples
    variance = np.clip(total_sq / samples - mean ** 2, 0.0, None) * samples / (samples - 1)
    estimate = MonteCarloEstimate(
        estimates=mean,
        standard_errors=np.sqrt(variance / samples),
        samples=samples,
        bump=bump,
        seed=seed,
        batches=batches,
    )
    logger.debug("Monte Carlo B (n=%d, %d samples): %s", n, samples, np.round(mean, 4))
    return estimate

"""
Harmonic schedule d_r = 1/((n-1) r), the large-n robust approximation.
"""

import logging
from typing import Optional

import numpy as np

from ..config import SolverConfig
from ..errors import SolverConvergenceError
from ..numerics.kernel import PrizeDifferentials, PrizeSchedule, check_tournament_size, objective_W, ranks_for
from .solver import solve_robust

logger = logging.getLogger(__name__)


def asymptotic_d(n: int) -> PrizeDifferentials:
    """d^inf with d_r = 1/((n-1) r)."""
    n = check_tournament_size(n)
    return PrizeDifferentials(1.0 / ((n - 1) * ranks_for(n)))


def asymptotic_v(n: int) -> PrizeSchedule:
    """v^inf with v_r = (H_{n-1} - H_{r-1}) / (n-1)."""
    n = check_tournament_size(n)
    # Tail sums of 1/k equal the harmonic differences without cancellation
    tails = np.cumsum((1.0 / ranks_for(n))[::-1])[::-1]
    return PrizeSchedule(np.append(tails / (n - 1), 0.0))


def harmonic_mixture(n: int, z: np.ndarray) -> np.ndarray:
    """a(z; d^inf) = (1 - z^(n-1)) / ((n-1)(1-z)), continuous at z = 1."""
    n = check_tournament_size(n)
    z = np.asarray(z, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        values = -np.expm1((n - 1) * np.log(z)) / ((n - 1) * (1.0 - z))
    return np.where(z == 1.0, 1.0, np.where(z == 0.0, 1.0 / (n - 1), values))


def asymptotic_gap(n: int, cfg: Optional[SolverConfig] = None) -> float:
    """W(d*) - W(d^inf) on a common quadrature rule."""
    n = check_tournament_size(n)
    if n < 3:
        raise ValueError("the asymptotic gap is defined for n >= 3")
    cfg = cfg or SolverConfig()
    report = solve_robust(n, cfg)
    if not report.converged:
        raise SolverConvergenceError(f"solver did not converge for n={n}", n=n, report=report)
    gap = report.objective - objective_W(asymptotic_d(n), cfg.quadrature)
    logger.debug("Asymptotic gap n=%d: %.6e", n, gap)
    return gap

"""
Inequality metrics for prize schedules.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

import numpy as np
from numpy.typing import ArrayLike
from scipy.integrate import trapezoid

from .config import SolverConfig
from .errors import SolverConvergenceError
from .numerics.kernel import PrizeSchedule
from .design.solver import solve_robust

logger = logging.getLogger(__name__)

# Published tables round prizes to 4 decimals
BUDGET_CHECK_TOL = 1e-3


def _prizes(v: Union[PrizeSchedule, ArrayLike]) -> np.ndarray:
    values = np.asarray(v, dtype=float).ravel()
    if values.size < 1 or np.any(values < 0) or not np.all(np.isfinite(values)):
        raise ValueError("prizes must be finite and non-negative")
    if abs(values.sum() - 1.0) > BUDGET_CHECK_TOL:
        raise ValueError(f"prizes sum to {values.sum():.6f}; the Gini normalization assumes a unit budget")
    return values


def gini(v: Union[PrizeSchedule, ArrayLike]) -> float:
    """Gini coefficient from sorted prizes, O(n log n).

    Args:
        v: Prize schedule with unit budget.

    Returns:
        G = sum_{i,j} |v_i - v_j| / (2 n sum v).
    """
    values = np.sort(_prizes(v))
    n = values.size
    index = np.arange(1, n + 1)
    return float(np.sum((2 * index - n - 1) * values) / (n * values.sum()))


def pairwise_gini(v: Union[PrizeSchedule, ArrayLike]) -> float:
    """Gini coefficient from all pairwise differences, O(n^2)."""
    values = _prizes(v)
    n = values.size
    return float(np.abs(np.subtract.outer(values, values)).sum() / (2 * n * values.sum()))


@dataclass(frozen=True, eq=False)
class LorenzCurve:
    """Population share against cumulative prize share, smallest prizes first."""
    points: np.ndarray

    @property
    def x(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def y(self) -> np.ndarray:
        return self.points[:, 1]

    def at(self, share: ArrayLike) -> np.ndarray:
        return np.interp(share, self.x, self.y)

    def area_gap(self) -> float:
        """Twice the area between the diagonal and the curve."""
        return float(1.0 - 2.0 * trapezoid(self.y, self.x))


def lorenz(v: Union[PrizeSchedule, ArrayLike], resolution: Optional[int] = None) -> LorenzCurve:
    """Lorenz curve at the n+1 breakpoints, or resampled to `resolution` points."""
    values = np.sort(_prizes(v))
    n = values.size
    x = np.linspace(0.0, 1.0, n + 1)
    y = np.concatenate([[0.0], np.cumsum(values)]) / values.sum()
    y[-1] = 1.0
    if resolution is not None:
        if resolution < 2:
            raise ValueError("resolution must be at least 2")
        grid = np.linspace(0.0, 1.0, resolution)
        x, y = grid, np.interp(grid, x, y)
    return LorenzCurve(np.column_stack([x, y]))


def harmonic(k: int) -> float:
    """H_k = sum_{j=1}^k 1/j with H_0 = 0."""
    if k < 0:
        raise ValueError("harmonic numbers need k >= 0")
    return math.fsum(1.0 / j for j in range(1, k + 1))


def majorizes(v: ArrayLike, w: ArrayLike, tol: float = 1e-12) -> bool:
    """Whether v majorizes w (equal length and total)."""
    v = np.sort(np.asarray(v, dtype=float))[::-1]
    w = np.sort(np.asarray(w, dtype=float))[::-1]
    if v.size != w.size:
        raise ValueError("majorization compares schedules of equal length")
    if abs(v.sum() - w.sum()) > tol * max(1.0, abs(v.sum())):
        return False
    return bool(np.all(np.cumsum(v) >= np.cumsum(w) - tol))


def lorenz_dominates(v: ArrayLike, w: ArrayLike, resolution: int = 10_001, tol: float = 1e-12) -> bool:
    """Whether the Lorenz curve of v lies weakly below that of w everywhere."""
    grid = np.linspace(0.0, 1.0, resolution)
    # Breakpoints of both curves keep piecewise-linear comparisons exact
    share = np.union1d(grid, np.union1d(lorenz(v).x, lorenz(w).x))
    return bool(np.all(lorenz(v).at(share) <= lorenz(w).at(share) + tol))


def gini_sweep(n_min: int, n_max: int, cfg: Optional[SolverConfig] = None) -> List[Tuple[int, float]]:
    """Gini coefficient of the robust schedule for each n in [n_min, n_max]."""
    if n_min < 2 or n_min > n_max:
        raise ValueError("gini_sweep needs 2 <= n_min <= n_max")
    results = []
    for n in range(n_min, n_max + 1):
        report = solve_robust(n, cfg)
        if not report.converged:
            raise SolverConvergenceError(f"solver did not converge for n={n}", n=n, report=report)
        results.append((n, gini(report.v_star)))
        logger.debug("Gini n=%d: %.6f", n, results[-1][1])
    return results

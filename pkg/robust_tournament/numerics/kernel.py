"""
Beta-kernel mixture a(z; d), the robust objective W(d) and its gradient.

a(z; d) is evaluated in its binomial-expectation form
a(z; d) = (n-1) * E[d_{S+1}] with S ~ Binomial(n-2, 1-z). The binomial
probabilities come from a multiplicative recurrence anchored at the mode,
so nothing overflows for n in the thousands.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Union

import numpy as np
from numpy.typing import ArrayLike
from scipy.stats import binom

from ..config import QuadratureSpec
from ..errors import EndpointSingularityError, QuadratureDivergenceError
from .quadrature import QuadratureRule, check_refinement, gauss_legendre_rule, graded_rule

logger = logging.getLogger(__name__)

BUDGET_TOL = 1e-12


def check_tournament_size(n: int) -> int:
    """Validate a tournament size and return it as int."""
    if isinstance(n, bool) or int(n) != n or n < 2:
        raise ValueError(f"tournament size must be an integer >= 2, got {n!r}")
    return int(n)


def ranks_for(n: int) -> np.ndarray:
    """Ranks 1..n-1 as floats."""
    return np.arange(1, n, dtype=float)


@dataclass(frozen=True, eq=False)
class PrizeDifferentials:
    """Feasible prize gaps d_r = v_r - v_{r+1}, r = 1..n-1."""
    values: np.ndarray

    def __post_init__(self):
        d = np.array(self.values, dtype=float).ravel()
        if d.size < 1:
            raise ValueError("prize differentials need n >= 2")
        if not np.all(np.isfinite(d)) or np.any(d < 0):
            raise ValueError("prize differentials must be finite and non-negative")
        budget = float(ranks_for(d.size + 1) @ d)
        if abs(budget - 1.0) > BUDGET_TOL:
            raise ValueError(f"budget sum r*d_r = {budget!r} differs from 1")
        d.setflags(write=False)
        object.__setattr__(self, "values", d)

    @classmethod
    def normalized(cls, raw: ArrayLike) -> "PrizeDifferentials":
        """Scale non-negative raw gaps onto the unit budget."""
        d = np.clip(np.asarray(raw, dtype=float).ravel(), 0.0, None)
        budget = ranks_for(d.size + 1) @ d
        if budget <= 0:
            raise ValueError("cannot normalize an all-zero prize vector")
        return cls(d / budget)

    @property
    def n(self) -> int:
        return self.values.size + 1

    def budget(self) -> float:
        return float(ranks_for(self.n) @ self.values)

    def to_schedule(self) -> "PrizeSchedule":
        return PrizeSchedule(schedule_from_differentials(self.values))

    def tolist(self):
        return self.values.tolist()

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)

    def __len__(self) -> int:
        return self.values.size

    def __repr__(self) -> str:
        return f"PrizeDifferentials(n={self.n}, d={np.array2string(self.values, precision=6)})"


@dataclass(frozen=True, eq=False)
class PrizeSchedule:
    """Monotone rank prizes v_1 >= ... >= v_n = 0 summing to one."""
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float).ravel()
        if v.size < 2:
            raise ValueError("a prize schedule needs n >= 2 ranks")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise ValueError("prizes must be finite and non-negative")
        if np.any(np.diff(v) > BUDGET_TOL) or abs(v[-1]) > BUDGET_TOL:
            raise ValueError("prizes must be non-increasing with v_n = 0")
        if abs(v.sum() - 1.0) > BUDGET_TOL:
            raise ValueError(f"prizes sum to {v.sum()!r}, not 1")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.size

    def to_differentials(self) -> PrizeDifferentials:
        return PrizeDifferentials(np.clip(self.values[:-1] - self.values[1:], 0.0, None))

    def tolist(self):
        return self.values.tolist()

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)

    def __len__(self) -> int:
        return self.values.size

    def __repr__(self) -> str:
        return f"PrizeSchedule(n={self.n}, v={np.array2string(self.values, precision=6)})"


def schedule_from_differentials(d: ArrayLike) -> np.ndarray:
    """v_r = sum_{k >= r} d_k with v_n = 0."""
    d = np.asarray(d, dtype=float)
    return np.append(np.cumsum(d[::-1])[::-1], 0.0)


def winner_take_all(n: int) -> PrizeSchedule:
    """The whole budget to rank 1."""
    n = check_tournament_size(n)
    v = np.zeros(n)
    v[0] = 1.0
    return PrizeSchedule(v)


def as_differentials(d: Union[PrizeDifferentials, ArrayLike]) -> np.ndarray:
    """Coerce to a float vector, requiring finite non-negative entries only."""
    values = np.asarray(d, dtype=float).ravel()
    if values.size < 1:
        raise ValueError("prize differentials need n >= 2")
    if not np.all(np.isfinite(values)):
        raise ValueError("prize differentials must be finite")
    if np.any(values < 0):
        raise ValueError("prize differentials must be non-negative")
    return values


def binomial_weights(trials: int, p: ArrayLike) -> np.ndarray:
    """Binomial(trials, p) probabilities for every p, shape (trials+1, len(p)).

    The mode probability comes from scipy; the other entries follow by the
    ratio recurrence outward from the mode, which cannot overflow.
    """
    p = np.atleast_1d(np.asarray(p, dtype=float))
    out = np.zeros((trials + 1, p.size))
    if trials == 0:
        out[0] = 1.0
        return out
    mode = np.clip(np.floor((trials + 1) * p), 0, trials).astype(int)
    out[mode, np.arange(p.size)] = binom.pmf(mode, trials, p)
    with np.errstate(divide="ignore", invalid="ignore"):
        odds = p / (1.0 - p)
        inv_odds = (1.0 - p) / p
    for k in range(trials):
        up = mode <= k
        if up.any():
            out[k + 1, up] = out[k, up] * ((trials - k) / (k + 1)) * odds[up]
    for k in range(trials - 1, -1, -1):
        down = mode > k
        if down.any():
            out[k, down] = out[k + 1, down] * ((k + 1) / (trials - k)) * inv_odds[down]
    # Degenerate columns are exact point masses
    for value, index in ((0.0, 0), (1.0, trials)):
        mask = p == value
        if mask.any():
            out[:, mask] = 0.0
            out[index, mask] = 1.0
    return out


def beta_kernels(n: int, z: ArrayLike) -> np.ndarray:
    """Kernels r*C(n-1,r)*z^(n-r-1)*(1-z)^(r-1) for r = 1..n-1, shape (n-1, len(z))."""
    n = check_tournament_size(n)
    z = np.atleast_1d(np.asarray(z, dtype=float))
    return (n - 1) * binomial_weights(n - 2, 1.0 - z)


def kernel_peaks(n: int) -> np.ndarray:
    """Mode z_r = (n-1-r)/(n-2) of each beta kernel, the quantile rank r rewards."""
    n = check_tournament_size(n)
    if n == 2:
        return np.array([0.5])
    return (n - 1 - ranks_for(n)) / (n - 2)


def _check_unit_interval(z: np.ndarray) -> None:
    if np.any(~np.isfinite(z)) or np.any(z < 0.0) or np.any(z > 1.0):
        raise ValueError("z must lie in [0, 1]")


def a_values(d: Union[PrizeDifferentials, ArrayLike], z: ArrayLike) -> np.ndarray:
    """Vectorized a(z; d) for an array of z in [0, 1]."""
    d = as_differentials(d)
    n = d.size + 1
    z = np.atleast_1d(np.asarray(z, dtype=float))
    _check_unit_interval(z)
    values = d @ beta_kernels(n, z)
    values[z == 0.0] = (n - 1) * d[-1]
    values[z == 1.0] = (n - 1) * d[0]
    return values


def eval_a(z: float, d: Union[PrizeDifferentials, ArrayLike]) -> float:
    """a(z; d) at a single point; exact at both endpoints."""
    return float(a_values(d, [z])[0])


@dataclass(frozen=True, eq=False)
class KernelBasis:
    """Beta kernels sampled on one quadrature rule for a fixed n."""
    n: int
    rule: QuadratureRule
    matrix: np.ndarray

    def a(self, d: np.ndarray) -> np.ndarray:
        return d @ self.matrix

    def objective(self, d: np.ndarray) -> float:
        with np.errstate(divide="ignore"):
            return float(self.rule.integrate(np.log(self.a(d))))

    def gradient(self, d: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return self.matrix @ (self.rule.weights / self.a(d))

    def hessian(self, d: np.ndarray, idx: Optional[np.ndarray] = None) -> np.ndarray:
        """Hessian of W, optionally restricted to the ranks in idx."""
        rows = self.matrix if idx is None else self.matrix[idx]
        a = self.a(d)
        return -(rows * (self.rule.weights / a ** 2)) @ rows.T

    def integrate_against(self, values: np.ndarray) -> np.ndarray:
        """Kernel moments: integral of each kernel times the sampled values."""
        return self.matrix @ (self.rule.weights * values)


@lru_cache(maxsize=32)
def kernel_basis(n: int, order: int, panels: int, graded: bool = False) -> KernelBasis:
    """Cached kernel matrix for (n, rule)."""
    rule = graded_rule(order, panels) if graded else gauss_legendre_rule(order, panels)
    matrix = beta_kernels(n, rule.nodes)
    matrix.setflags(write=False)
    logger.debug("Built kernel basis n=%d with %d nodes", n, rule.size)
    return KernelBasis(n=n, rule=rule, matrix=matrix)


def basis_pair(n: int, q: QuadratureSpec, graded: bool = False):
    """Kernel bases on the base rule and on the doubled rule."""
    panels = q.panels_for(n)
    return kernel_basis(n, q.order, panels, graded), kernel_basis(n, q.order, 2 * panels, graded)


def _require_mass(d: np.ndarray) -> None:
    if not np.any(d > 0):
        raise QuadratureDivergenceError("a(z; d) vanishes identically; log a is not integrable")


def objective_W(
    d: Union[PrizeDifferentials, ArrayLike],
    q: Optional[QuadratureSpec] = None,
    endpoint_singular: bool = False,
) -> float:
    """Robust objective W(d) = integral of log a(z; d) over [0, 1].

    Args:
        d: Prize differentials (budget may be relaxed, entries non-negative).
        q: Quadrature settings.
        endpoint_singular: Allow d_1 = 0 or d_{n-1} = 0 and integrate the
            log singularity with graded end panels.

    Returns:
        W on the doubled rule, after the panel-doubling check.
    """
    q = q or QuadratureSpec()
    d = as_differentials(d)
    _require_mass(d)
    if (d[0] == 0.0 or d[-1] == 0.0) and not endpoint_singular:
        raise EndpointSingularityError("d_1 and d_{n-1} must be positive outside endpoint-singular mode")
    coarse, fine = basis_pair(d.size + 1, q, graded=endpoint_singular)
    check_refinement(coarse.objective(d), fine.objective(d), q, "objective W")
    return fine.objective(d)


def gradient_l(d: Union[PrizeDifferentials, ArrayLike], q: Optional[QuadratureSpec] = None) -> np.ndarray:
    """Gradient l_r(d) = integral of kernel_r / a(z; d), r = 1..n-1."""
    q = q or QuadratureSpec()
    d = as_differentials(d)
    _require_mass(d)
    coarse, fine = basis_pair(d.size + 1, q)
    result = fine.gradient(d)
    try:
        check_refinement(coarse.gradient(d), result, q, "gradient l")
    except QuadratureDivergenceError as exc:
        if d[0] == 0.0 or d[-1] == 0.0:
            raise EndpointSingularityError(
                f"endpoint gradient diverges: {exc}", delta=exc.delta, value=exc.value
            ) from exc
        raise
    return result

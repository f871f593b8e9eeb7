"""
Noise reconstruction from an inverse quantile density.

F solves F'(t) = m(F(t)), so t(u) = eps_lower + integral_0^u dz / m(z).
The support is bounded exactly when 1/m is integrable up to u = 1.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, Iterator, Optional, Tuple, Union

import numpy as np

from ..config import QuadratureSpec
from ..errors import QuadratureDivergenceError, UnboundedSupportError
from ..numerics.kernel import objective_W
from ..numerics.quadrature import integrate
from ..design.closed_form import solve_n3_closed_form, solve_n4_closed_form
from .adversary import EntropyBound, QuantileDensity, as_entropy

logger = logging.getLogger(__name__)

TAIL_START = 0.99
TAIL_POINTS_PER_DECADE = 8
BOUNDED_FLOOR = 1e-9
UNBOUNDED_FLOOR = 1e-6
SUPPORT_CHECK_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class NoiseDistribution:
    """Tabulated noise CDF with density and hazard rate."""
    t: np.ndarray
    F: np.ndarray
    f: np.ndarray
    hazard: np.ndarray
    support_lower: float
    support_length: float
    bounded: bool
    source: str
    constant: float = float("nan")
    entropy: float = float("nan")

    def __post_init__(self):
        for name in ("t", "F", "f", "hazard"):
            array = np.array(getattr(self, name), dtype=float)
            array.setflags(write=False)
            object.__setattr__(self, name, array)

    @property
    def support_upper(self) -> float:
        return self.support_lower + self.support_length

    def cdf(self, t) -> np.ndarray:
        return np.interp(t, self.t, self.F, left=0.0, right=1.0)

    def quantile(self, u) -> np.ndarray:
        return np.interp(u, self.F, self.t)

    def quantile_density(self, u) -> np.ndarray:
        """m(u) = f(F^{-1}(u)) read back from the table."""
        return np.interp(u, self.F, self.f)

    def reference_length(self) -> float:
        """Support length, or the 1%-99% quantile range when unbounded."""
        if self.bounded:
            return self.support_length
        low, high = self.quantile([0.01, 0.99])
        return float(high - low)

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        """Inverse-CDF draws."""
        return self.quantile(rng.random(size))

    def rows(self) -> Iterator[Tuple[float, float, float, float]]:
        return zip(self.t.tolist(), self.F.tolist(), self.f.tolist(), self.hazard.tolist())

    def to_dict(self) -> Dict[str, Any]:
        """Sidecar summary without the grid."""
        return {
            "source": self.source,
            "support_lower": self.support_lower,
            "support_length": self.support_length if self.bounded else None,
            "bounded": self.bounded,
            "lambda": self.constant,
            "entropy": self.entropy,
            "grid_size": int(self.t.size),
        }


def _tail_grid(floor: float) -> np.ndarray:
    decades = math.log10((1.0 - TAIL_START) / floor)
    gaps = np.geomspace(1.0 - TAIL_START, floor, int(round(TAIL_POINTS_PER_DECADE * decades)) + 1)
    return 1.0 - gaps[1:]


def quantile_grid(grid_size: int, floor: Optional[float]) -> np.ndarray:
    """u-uniform grid on [0, 0.99] plus geometric refinement toward 1.

    floor=None ends the grid at u = 1; otherwise at u = 1 - floor.
    """
    main = np.linspace(0.0, TAIL_START, grid_size)
    tail = _tail_grid(floor or BOUNDED_FLOOR)
    end = np.array([1.0 if floor is None else 1.0 - floor])
    grid = np.concatenate([main, tail, end])
    return np.unique(grid)


def _hazard(F: np.ndarray, f: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(F < 1.0, f / (1.0 - F), np.inf)


def _segment_integral(inv_m, lower: float, upper: float, q: QuadratureSpec) -> float:
    """Integral of 1/m over [lower, upper] with graded ends; raises if it diverges."""
    width = upper - lower
    loose = q.model_copy(update={"refine_tol": SUPPORT_CHECK_TOL})
    return integrate(lambda s: width * inv_m(lower + width * s), loose, panels=2, graded=True, what="support")


def _interval_integrals(inv_m, edges: np.ndarray, order: int) -> np.ndarray:
    """Gauss-Legendre integrals of 1/m over consecutive grid intervals."""
    x, w = np.polynomial.legendre.leggauss(order)
    lower, upper = edges[:-1], edges[1:]
    half = 0.5 * (upper - lower)
    nodes = (0.5 * (upper + lower))[:, None] + half[:, None] * x[None, :]
    values = inv_m(nodes.ravel()).reshape(nodes.shape)
    return half * (values @ w)


def reconstruct_distribution(
    m: QuantileDensity,
    eps_lower: float = 0.0,
    grid_size: int = 2001,
    q: Optional[QuadratureSpec] = None,
) -> NoiseDistribution:
    """Tabulate (t, F, f, hazard) from m by cumulative quadrature of 1/m.

    Args:
        m: Inverse quantile density.
        eps_lower: Lower support anchor.
        grid_size: Points on the u-uniform part of the grid.
        q: Quadrature settings.

    Returns:
        NoiseDistribution with support_length = integral of 1/m, or an
        unbounded flag when that integral fails to converge.
    """
    q = q or QuadratureSpec()
    if grid_size < 11:
        raise ValueError("grid_size must be at least 11")
    if not math.isfinite(eps_lower):
        raise ValueError("eps_lower must be finite")

    def inv_m(z):
        with np.errstate(divide="ignore"):
            return 1.0 / m(z)

    grid = quantile_grid(grid_size, None)
    try:
        head = _segment_integral(inv_m, 0.0, grid[1], q)
    except QuadratureDivergenceError as exc:
        raise UnboundedSupportError("1/m is not integrable at u = 0; the support has no finite lower end") from exc

    try:
        tail = _segment_integral(inv_m, grid[-2], 1.0, q)
        bounded = True
    except QuadratureDivergenceError:
        bounded = False
        grid = quantile_grid(grid_size, UNBOUNDED_FLOOR)
        logger.info("1/m is not integrable at u = 1; support flagged unbounded")

    pieces = _interval_integrals(inv_m, grid, q.order)
    pieces[0] = head
    if bounded:
        pieces[-1] = tail
    T = np.concatenate([[0.0], np.cumsum(pieces)])

    f = np.asarray(m(grid), dtype=float)
    return NoiseDistribution(
        t=eps_lower + T,
        F=grid,
        f=f,
        hazard=_hazard(grid, f),
        support_lower=eps_lower,
        support_length=float(T[-1]) if bounded else math.inf,
        bounded=bounded,
        source=m.provenance,
        constant=m.constant,
    )


def exponential_limit(
    H: Union[EntropyBound, float] = 0.0,
    eps_lower: float = 0.0,
    grid_size: int = 2001,
    entropy_matched: bool = False,
) -> NoiseDistribution:
    """Exponential noise F(t) = 1 - exp(-rate (t - eps_lower)).

    The rate is exp(-H). With entropy_matched the rate is exp(1 - H), whose
    entropy equals H; that is the pointwise limit of m*(z; d^inf).
    """
    H = as_entropy(H)
    rate = math.exp((1.0 if entropy_matched else 0.0) - H)
    grid = quantile_grid(grid_size, BOUNDED_FLOOR)
    f = rate * (1.0 - grid)
    return NoiseDistribution(
        t=eps_lower - np.log1p(-grid) / rate,
        F=grid,
        f=f,
        hazard=np.full_like(grid, rate),
        support_lower=eps_lower,
        support_length=math.inf,
        bounded=False,
        source="exponential-limit",
        constant=rate,
        entropy=1.0 - math.log(rate),
    )


def exponential_density(H: Union[EntropyBound, float] = 0.0, entropy_matched: bool = False) -> QuantileDensity:
    """The m(z) of exponential_limit."""
    return QuantileDensity.exponential(math.exp((1.0 if entropy_matched else 0.0) - as_entropy(H)))


class _N3ClosedForm:
    """F(t) for n = 3: t - eps = scale * (A F + B F^2 / 2), a(z) = A + B z."""

    def __init__(self, H: float, eps_lower: float):
        d1, d2 = solve_n3_closed_form().differentials.values
        self.A = 2.0 * d2
        self.B = 2.0 * (d1 - d2)
        total = self.A + self.B
        self.W = (total * math.log(total) - self.A * math.log(self.A)) / self.B - 1.0
        self.scale = math.exp(H - self.W)
        self.eps_lower = eps_lower
        self.length = self.scale * (self.A + 0.5 * self.B)

    def _root(self, t):
        t = np.asarray(t, dtype=float)
        y = (t - self.eps_lower) / self.scale
        if np.any(y < -1e-12) or np.any(t - self.eps_lower > self.length * (1 + 1e-12)):
            raise ValueError("t lies outside the n=3 support")
        return np.sqrt(self.A ** 2 + 2.0 * self.B * np.clip(y, 0.0, None))

    def cdf(self, t):
        return np.clip((self._root(t) - self.A) / self.B, 0.0, 1.0)

    def pdf(self, t):
        return 1.0 / (self.scale * self._root(t))


class _N4ClosedForm:
    """F(t) for n = 4 by Cardano: t - eps = scale * (p3 F^3 + p2 F^2 + p1 F)."""

    def __init__(self, H: Optional[float], eps_lower: float, q: Optional[QuadratureSpec]):
        solution = solve_n4_closed_form(q)
        d1, _, d3 = solution.differentials.values
        self.d1, self.d3 = d1, d3
        self.W = objective_W(solution.differentials, q)
        # H = None keeps the normalization exp(H - W) = 1
        self.scale = 1.0 if H is None else math.exp(H - self.W)
        self.eps_lower = eps_lower
        self.p3, self.p2, self.p1 = d1 + d3, -3.0 * d3, 3.0 * d3
        self.length = self.scale * self.p3

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        y = (t - self.eps_lower) / self.scale
        if np.any(y < -1e-12) or np.any(t - self.eps_lower > self.length * (1 + 1e-12)):
            raise ValueError("t lies outside the n=4 support")
        p3, p2, p1 = self.p3, self.p2, self.p1
        P = (3.0 * p3 * p1 - p2 ** 2) / (3.0 * p3 ** 2)
        Q = (2.0 * p2 ** 3 - 9.0 * p3 * p2 * p1 - 27.0 * p3 ** 2 * y) / (27.0 * p3 ** 3)
        delta = np.sqrt(Q ** 2 / 4.0 + P ** 3 / 27.0)
        x = np.cbrt(-Q / 2.0 + delta) + np.cbrt(-Q / 2.0 - delta)
        return np.clip(x - p2 / (3.0 * p3), 0.0, 1.0)

    def pdf(self, t):
        F = self.cdf(t)
        return 1.0 / (self.scale * 3.0 * (self.d1 * F ** 2 + self.d3 * (1.0 - F) ** 2))


def _tabulate(form, grid_size: int, source: str, entropy: float) -> NoiseDistribution:
    t = form.eps_lower + np.linspace(0.0, form.length, grid_size)
    F = form.cdf(t)
    F[-1] = 1.0
    f = form.pdf(t)
    return NoiseDistribution(
        t=t,
        F=F,
        f=f,
        hazard=_hazard(F, f),
        support_lower=form.eps_lower,
        support_length=form.length,
        bounded=True,
        source=source,
        constant=1.0 / form.scale,
        entropy=entropy,
    )


def closed_form_n3_distribution(
    H: Union[EntropyBound, float] = 0.0, eps_lower: float = 0.0, grid_size: int = 2001
) -> NoiseDistribution:
    """Square-root closed form of the n = 3 adversarial noise (a transformed Beta(1/2, 1))."""
    H = as_entropy(H)
    return _tabulate(_N3ClosedForm(H, eps_lower), grid_size, "closed-form-n3", H)


def closed_form_n4_distribution(
    H: Optional[Union[EntropyBound, float]] = None,
    eps_lower: float = 0.0,
    grid_size: int = 2001,
    q: Optional[QuadratureSpec] = None,
) -> NoiseDistribution:
    """Cubic closed form of the n = 4 adversarial noise.

    H = None applies the normalization exp(H - W(d*)) = 1, which puts the
    support at [eps_lower, eps_lower + d1 + d3].
    """
    form = _N4ClosedForm(None if H is None else as_entropy(H), eps_lower, q)
    entropy = form.W if H is None else as_entropy(H)
    return _tabulate(form, grid_size, "closed-form-n4", entropy)


def n3_closed_form_cdf(t, H: float = 0.0, eps_lower: float = 0.0) -> np.ndarray:
    """F*(t) for n = 3; raises outside the support."""
    return _N3ClosedForm(as_entropy(H), eps_lower).cdf(t)


def n4_closed_form_cdf(t, H: Optional[float] = None, eps_lower: float = 0.0) -> np.ndarray:
    """F*(t) for n = 4; raises outside the support."""
    return _N4ClosedForm(None if H is None else as_entropy(H), eps_lower, None).cdf(t)

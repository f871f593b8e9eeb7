"""
Closed-form robust schedules for three and four agents.

For n = 3 both differentials are positive and d_1 solves a scalar
equation. For n = 4 the middle differential vanishes and the ratio
kappa = d_1/d_3 solves a scalar equation. The exact gradients below
serve as oracles for the quadrature-based ones.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np
from scipy.optimize import brentq

from ..config import QuadratureSpec
from ..numerics.kernel import PrizeDifferentials, PrizeSchedule, gradient_l

logger = logging.getLogger(__name__)

ROOT_XTOL = 1e-12
N3_BRACKET = (1.0 / 3.0 + 1e-6, 1.0 - 1e-9)
N4_BRACKET = (1.0 + 1e-6, 100.0)


@dataclass(frozen=True, eq=False)
class ClosedFormSolution:
    """Robust differentials from a scalar root, with the root's diagnostics."""
    differentials: PrizeDifferentials
    root: float
    residual: float
    diagnostics: Dict[str, float] = field(default_factory=dict)

    @property
    def schedule(self) -> PrizeSchedule:
        return self.differentials.to_schedule()


def n3_optimality_residual(d1: float) -> float:
    """log(2 d1 / (1 - d1)) - 3 (3 d1 - 1) / 2; zero at d1 = 1/3 and at the optimum."""
    return math.log(2.0 * d1 / (1.0 - d1)) - 1.5 * (3.0 * d1 - 1.0)


def n4_optimality_residual(kappa: float) -> float:
    """(k+3)/(k+1) * ((k-1)/sqrt(k) * pi/2 - log k) - 2."""
    return (kappa + 3.0) / (kappa + 1.0) * ((kappa - 1.0) / math.sqrt(kappa) * math.pi / 2.0 - math.log(kappa)) - 2.0


def _bracketed_root(func, lower: float, upper: float, label: str) -> float:
    f_lower, f_upper = func(lower), func(upper)
    if not (f_lower < 0.0 < f_upper):
        raise ArithmeticError(f"{label}: no sign change on [{lower}, {upper}] ({f_lower:.3e}, {f_upper:.3e})")
    return brentq(func, lower, upper, xtol=ROOT_XTOL, maxiter=200)


def solve_n3_closed_form() -> ClosedFormSolution:
    """Robust differentials for n = 3, skipping the irrelevant root d1 = 1/3."""
    d1 = _bracketed_root(n3_optimality_residual, *N3_BRACKET, label="n=3 first-order condition")
    d = PrizeDifferentials(np.array([d1, (1.0 - d1) / 2.0]))
    residual = n3_optimality_residual(d1)
    logger.debug("n=3 root d1=%.12f, residual %.2e", d1, residual)
    return ClosedFormSolution(differentials=d, root=d1, residual=residual, diagnostics={"d1": d1})


def n4_middle_gradient(d1: float, d3: float) -> float:
    """Exact l_2 for n = 4 when d_2 = 0 (partial fractions in kappa = d1/d3)."""
    kappa = d1 / d3
    k1 = kappa + 1.0
    inner = -1.0 + (kappa - 1.0) * math.log(kappa) / (2.0 * k1) + kappa * math.pi / (k1 * math.sqrt(kappa))
    return 2.0 / d3 * inner / k1


def solve_n4_closed_form(q: Optional[QuadratureSpec] = None) -> ClosedFormSolution:
    """Robust differentials for n = 4 with d_2 = 0 and d_1 + 3 d_3 = 1."""
    kappa = _bracketed_root(n4_optimality_residual, *N4_BRACKET, label="n=4 first-order condition")
    d3 = 1.0 / (kappa + 3.0)
    d1 = kappa * d3
    d = PrizeDifferentials(np.array([d1, 0.0, d3]))

    ell2 = float(gradient_l(d, q)[1])
    if not ell2 < 2.0:
        logger.warning("n=4 slack condition fails: l_2 = %.6f", ell2)
    diagnostics = {
        "kappa": kappa,
        "ell2": ell2,
        "ell2_exact": n4_middle_gradient(d1, d3),
        "slack": 2.0 - ell2,
    }
    return ClosedFormSolution(differentials=d, root=kappa, residual=n4_optimality_residual(kappa), diagnostics=diagnostics)


def n3_gradient_exact(d1: float, d2: float) -> np.ndarray:
    """Exact (l_1, l_2) for n = 3."""
    gap = d1 - d2
    if abs(gap) <= 1e-9 * max(d1, d2):
        # a(z) is flat: both kernels integrate to one over 2*d
        return np.array([0.5 / d1, 0.5 / d1])
    l1 = (gap - d2 * math.log(d1 / d2)) / gap ** 2
    l2 = (-gap - d1 * math.log(d2 / d1)) / gap ** 2
    return np.array([l1, l2])

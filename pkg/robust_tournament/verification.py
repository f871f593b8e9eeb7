"""
Verification Agent - runs the invariant battery against a prize vector.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from .config import SolverConfig
from .numerics.kernel import (
    PrizeDifferentials,
    as_differentials,
    basis_pair,
    gradient_l,
    objective_W,
    ranks_for,
    schedule_from_differentials,
)
from .design.solver import kkt_check, solve_robust
from .noise.adversary import QuantileDensity, adversarial_m, entropy_of
from .noise.reconstruction import reconstruct_distribution
from .equilibrium import compute_B, marginal_benefit, monte_carlo_B

ENTROPY_TOL = 1e-8
MINIMAX_TOL = 1e-10
GRADIENT_TOL = 1e-5
EULER_TOL = 1e-10
SUPPORT_TOL = 1e-8
ORACLE_SIGMAS = 3.0


@dataclass
class CheckResult:
    """Result of a single invariant check."""
    check_name: str
    passed: bool
    residual: float
    tolerance: float
    detail: str = ""
    error: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "check": self.check_name,
            "passed": self.passed,
            "residual": self.residual,
            "tolerance": self.tolerance,
            "detail": self.detail,
            "error": self.error,
        }


@dataclass
class VerificationReport:
    """Result of the whole battery."""
    passed: bool
    n: int
    check_results: List[CheckResult] = field(default_factory=list)
    error: Optional[str] = None

    def failed_checks(self) -> List[str]:
        return [check.check_name for check in self.check_results if not check.passed]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "passed": self.passed,
            "n": self.n,
            "failed": self.failed_checks(),
            "checks": [check.to_dict() for check in self.check_results],
            "error": self.error,
        }


def random_interior_d(n: int, rng: np.random.Generator, floor: float = 0.01) -> np.ndarray:
    """Random feasible d with every component at least `floor` when the budget allows it."""
    ranks = ranks_for(n)
    base = floor * ranks.sum()
    if base >= 1.0:
        floor, base = 0.0, 0.0
    w = rng.dirichlet(np.ones(n - 1)) * (1.0 - base)
    d = floor + w / ranks
    return d / (ranks @ d)


def smooth_perturbation(rng: np.random.Generator, terms: int = 4, scale: float = 0.5) -> Callable[[np.ndarray], np.ndarray]:
    """Random cosine series g(z) on [0, 1]."""
    coefficients = rng.normal(0.0, scale, terms) / np.arange(1, terms + 1)
    frequencies = np.pi * np.arange(1, terms + 1)
    return lambda z: np.cos(np.multiply.outer(z, frequencies)) @ coefficients


def feasible_difference(d: np.ndarray, r: int, s: int, cfg: SolverConfig) -> float:
    """Central difference of W along e_r/r - e_s/s (0-based ranks), which keeps the budget."""
    ranks = ranks_for(d.size + 1)
    direction = np.zeros_like(d)
    direction[r] = 1.0 / ranks[r]
    direction[s] = -1.0 / ranks[s]
    h = 1e-5 * min(ranks[r] * d[r], ranks[s] * d[s])
    upper = objective_W(d + h * direction, cfg.quadrature)
    lower = objective_W(d - h * direction, cfg.quadrature)
    return (upper - lower) / (2.0 * h)


class InvariantVerifier:
    """Checks optimality, adversary and equilibrium invariants for one n."""

    def __init__(self, config: Optional[SolverConfig] = None, hbar: float = 0.0, seed: int = 0,
                 samples: int = 200_000, perturbations: int = 100, random_points: int = 5):
        self.config = config or SolverConfig()
        self.hbar = hbar
        self.seed = seed
        self.samples = samples
        self.perturbations = perturbations
        self.random_points = random_points
        self.logger = logging.getLogger(__name__)

    def verify(self, n: Optional[int] = None, d: Optional[np.ndarray] = None) -> VerificationReport:
        """Run every check on d (or on the solved d* for n)."""
        check_results: List[CheckResult] = []
        try:
            if d is None:
                if n is None:
                    raise ValueError("verify needs n or an explicit d")
                d = solve_robust(n, self.config).d_star.values
            d = as_differentials(d)
            n = d.size + 1
            rng = np.random.default_rng(self.seed)

            checks = [
                ("KKT", lambda: self._check_kkt(d)),
                ("Euler Identity", lambda: self._check_euler(d)),
                ("Gradient", lambda: self._check_gradient(n, rng)),
                ("Entropy Binding", lambda: self._check_entropy(n, rng)),
                ("Minimax Perturbations", lambda: self._check_minimax(d, rng)),
                ("Support Length", lambda: self._check_support(d)),
                ("B_r Oracle", lambda: self._check_oracle(d)),
            ]
            for name, run in checks:
                check_results.append(self._guarded(name, run))

            passed = all(check.passed for check in check_results)
            return VerificationReport(passed=passed, n=n, check_results=check_results)

        except Exception as e:
            return VerificationReport(passed=False, n=n or 0, check_results=check_results, error=str(e))

    def _guarded(self, name: str, run: Callable[[], CheckResult]) -> CheckResult:
        try:
            result = run()
        except Exception as e:
            self.logger.debug("Check %s raised", name, exc_info=True)
            result = CheckResult(check_name=name, passed=False, residual=math.nan, tolerance=math.nan, error=str(e))
        status = "passed" if result.passed else "FAILED"
        self.logger.info("%s %s (residual %.3e)", name, status, result.residual)
        return result

    def _check_kkt(self, d: np.ndarray) -> CheckResult:
        residual, mu_hat = kkt_check(d, self.config)
        return CheckResult(
            check_name="KKT",
            passed=residual <= self.config.kkt_tol,
            residual=residual,
            tolerance=self.config.kkt_tol,
            detail=f"mu_hat={mu_hat:.12f}",
        )

    def _check_euler(self, d: np.ndarray) -> CheckResult:
        # sum_r d_r l_r = integral of a/a = 1 for every d
        residual = abs(float(d @ gradient_l(d, self.config.quadrature)) - 1.0)
        return CheckResult("Euler Identity", residual <= EULER_TOL, residual, EULER_TOL)

    def _check_gradient(self, n: int, rng: np.random.Generator) -> CheckResult:
        if n == 2:
            return CheckResult("Gradient", True, 0.0, GRADIENT_TOL, detail="single feasible point")
        worst = 0.0
        ranks = ranks_for(n)
        for _ in range(self.random_points):
            d = random_interior_d(n, rng)
            ell = gradient_l(d, self.config.quadrature) / ranks
            for r in range(n - 1):
                s = (r + 1) % (n - 1)
                expected = ell[r] - ell[s]
                scale = max(abs(ell[r]), abs(ell[s]))
                worst = max(worst, abs(feasible_difference(d, r, s, self.config) - expected) / scale)
        return CheckResult("Gradient", worst <= GRADIENT_TOL, worst, GRADIENT_TOL,
                           detail=f"{self.random_points} random interior points")

    def _check_entropy(self, n: int, rng: np.random.Generator) -> CheckResult:
        q = self.config.quadrature
        worst = 0.0
        for _ in range(self.random_points):
            m = adversarial_m(random_interior_d(n, rng), self.hbar, q)
            worst = max(worst, abs(entropy_of(m, q) - self.hbar))
        return CheckResult("Entropy Binding", worst <= ENTROPY_TOL, worst, ENTROPY_TOL)

    def _check_minimax(self, d: np.ndarray, rng: np.random.Generator) -> CheckResult:
        q = self.config.quadrature
        m_star = adversarial_m(d, self.hbar, q)
        claimed = m_star.constant
        attained = marginal_benefit(d, m_star, q)
        worst = abs(attained - claimed)
        shortfall = 0.0
        _, fine = basis_pair(d.size + 1, q)
        for _ in range(self.perturbations):
            g = smooth_perturbation(rng)
            mean_g = float(fine.rule.integrate(g(fine.rule.nodes)))
            perturbed = QuantileDensity(
                func=lambda z, g=g, mean_g=mean_g: m_star(z) * np.exp(g(z) - mean_g),
                provenance="grid",
                n=m_star.n,
            )
            shortfall = max(shortfall, claimed - marginal_benefit(d, perturbed, q))
        passed = worst <= ENTROPY_TOL * max(1.0, claimed) and shortfall <= MINIMAX_TOL
        return CheckResult("Minimax Perturbations", passed, max(worst, shortfall), MINIMAX_TOL,
                           detail=f"value identity gap {worst:.2e}, worst shortfall {shortfall:.2e}")

    def _check_support(self, d: np.ndarray) -> CheckResult:
        q = self.config.quadrature
        m_star = adversarial_m(d, self.hbar, q)
        dist = reconstruct_distribution(m_star, 0.0, 401, q)
        expected = math.exp(self.hbar - m_star.metadata["W"]) * schedule_from_differentials(d)[0]
        residual = abs(dist.support_length - expected) / expected if dist.bounded else math.inf
        return CheckResult("Support Length", residual <= SUPPORT_TOL, residual, SUPPORT_TOL,
                           detail=f"support length {dist.support_length:.10f}")

    def _check_oracle(self, d: np.ndarray) -> CheckResult:
        q = self.config.quadrature
        m_star = adversarial_m(d, self.hbar, q)
        dist = reconstruct_distribution(m_star, 0.0, 2001, q)
        exact = compute_B(m_star, d.size + 1, q)
        estimate = monte_carlo_B(dist, d.size + 1, samples=self.samples, seed=self.seed)
        sigmas = float(np.max(np.abs(estimate.estimates - exact) / estimate.standard_errors))
        return CheckResult("B_r Oracle", sigmas <= ORACLE_SIGMAS, sigmas, ORACLE_SIGMAS,
                           detail=f"{self.samples} samples, bump {estimate.bump:.3g}")


def verify_differentials(d: PrizeDifferentials, config: Optional[SolverConfig] = None, **kwargs) -> VerificationReport:
    """Run the battery on an explicit prize vector."""
    return InvariantVerifier(config, **kwargs).verify(d=np.asarray(d))

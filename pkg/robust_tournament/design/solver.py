"""
Robust Solver - maximizes W(d) over feasible prize differentials.

Phase 1 runs exponentiated-gradient ascent on w_r = r*d_r, which keeps
every iterate strictly inside the simplex. Phase 2 polishes with
active-set Newton on the KKT system. Ranks leave the active set by a ratio
test and re-enter when their multiplier ratio l_r/r exceeds one. The
endpoint ranks 1 and n-1 are never dropped.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, NamedTuple, Optional, Tuple, Union

import numpy as np
from numpy.typing import ArrayLike

from ..config import SolverConfig
from ..numerics.kernel import (
    KernelBasis,
    PrizeDifferentials,
    PrizeSchedule,
    as_differentials,
    gradient_l,
    kernel_basis,
    kernel_peaks,
    ranks_for,
    check_tournament_size,
)
from ..utils.iteration_budget import IterationBudget

ARMIJO = 1e-4


@dataclass(frozen=True, eq=False)
class SolveReport:
    """Result of a robust solve."""
    n: int
    d_star: PrizeDifferentials
    v_star: PrizeSchedule
    objective: float
    kkt_residual: float
    mu: float
    support: Tuple[bool, ...]
    iterations: int
    converged: bool
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        """JSON-ready view used by the CLI."""
        return {
            "n": self.n,
            "d": self.d_star.tolist(),
            "v": self.v_star.tolist(),
            "objective": self.objective,
            "kkt_residual": self.kkt_residual,
            "mu": self.mu,
            "support": list(self.support),
            "iterations": self.iterations,
            "converged": self.converged,
        }


class KKTCheck(NamedTuple):
    residual: float
    mu_hat: float


def stationarity(ell: np.ndarray, d: np.ndarray, zero_threshold: float) -> Tuple[float, float, np.ndarray]:
    """KKT residual with mu = 1, the largest active ratio and all ratios l_r/r."""
    ratio = ell / ranks_for(d.size + 1)
    active = d > zero_threshold
    active_gap = np.abs(ratio[active] - 1.0)
    inactive_gap = np.clip(ratio[~active] - 1.0, 0.0, None)
    residual = max(
        float(active_gap.max()) if active_gap.size else 0.0,
        float(inactive_gap.max()) if inactive_gap.size else 0.0,
    )
    mu_hat = float(ratio[active].max()) if active.any() else float("nan")
    return residual, mu_hat, ratio


def kkt_check(d: Union[PrizeDifferentials, ArrayLike], cfg: Optional[SolverConfig] = None) -> KKTCheck:
    """KKT residual of d using mu = 1; raises on endpoint divergence."""
    cfg = cfg or SolverConfig()
    d = as_differentials(d)
    ell = gradient_l(d, cfg.quadrature)
    residual, mu_hat, _ = stationarity(ell, d, cfg.zero_threshold)
    return KKTCheck(residual=residual, mu_hat=mu_hat)


class RobustSolver:
    """Two-phase solver for the robust prize program."""

    def __init__(self, config: Optional[SolverConfig] = None):
        self.config = config or SolverConfig()
        self.logger = logging.getLogger(__name__)

    def solve(self, n: int, start: Optional[ArrayLike] = None) -> SolveReport:
        """Solve for tournament size n, optionally from an explicit start d."""
        n = check_tournament_size(n)
        if n == 2:
            return self._trivial_report()

        cfg = self.config
        q = cfg.quadrature
        basis = kernel_basis(n, q.order, 2 * q.panels_for(n))
        ranks = ranks_for(n)
        budget = IterationBudget(cfg.max_iterations)

        w = self._initial_weights(n, start)
        while True:
            w = self._exponentiated_gradient(basis, w, budget)
            polished = self._newton(basis, w / ranks, budget)
            if polished is not None:
                d = polished
                break
            if budget.is_exhausted():
                self.logger.warning("Iteration budget exhausted for n=%d; returning phase 1 iterate", n)
                d = w / ranks
                break
            self.logger.debug("Newton left the feasible cone for n=%d; back to phase 1", n)

        return self._report(basis, d / (ranks @ d), budget)

    def _trivial_report(self) -> SolveReport:
        d = PrizeDifferentials(np.array([1.0]))
        return SolveReport(
            n=2,
            d_star=d,
            v_star=d.to_schedule(),
            objective=0.0,
            kkt_residual=0.0,
            mu=1.0,
            support=(True,),
            iterations=0,
            converged=True,
            diagnostics={"mu_hat": 1.0, "slack": {}, "phases": {}},
        )

    def _initial_weights(self, n: int, start: Optional[ArrayLike]) -> np.ndarray:
        ranks = ranks_for(n)
        if start is not None:
            d0 = as_differentials(start)
            if d0.size != n - 1:
                raise ValueError(f"start vector has {d0.size} entries, expected {n - 1}")
            if d0[0] <= 0 or d0[-1] <= 0:
                raise ValueError("start vector needs d_1 > 0 and d_{n-1} > 0")
            w = ranks * d0
        elif self.config.init == "linear":
            w = ranks.copy()
        else:
            # d = d^inf gives w_r = 1/(n-1), the same point as the uniform start
            w = np.ones(n - 1)
        return w / w.sum()

    def _exponentiated_gradient(self, basis: KernelBasis, w: np.ndarray, budget: IterationBudget) -> np.ndarray:
        """Multiplicative ascent until the active set holds for a full window."""
        cfg = self.config
        rule = cfg.step_rule
        ranks = ranks_for(basis.n)
        d = w / ranks
        objective = basis.objective(d)
        active = w > cfg.zero_threshold
        stable = 0
        iterations = 0
        residual = float("nan")

        while stable < cfg.active_set_window and budget.can_afford(iterations + 1):
            g = basis.gradient(d) / ranks
            residual = float(np.max(np.abs(g - 1.0)))
            eta = rule.step_for(residual)
            while True:
                trial = w * np.exp(eta * (g - 1.0))
                trial /= trial.sum()
                trial_d = trial / ranks
                trial_objective = basis.objective(trial_d)
                if trial_objective >= objective - 1e-14 * max(1.0, abs(objective)):
                    break
                if eta * rule.shrink < rule.min_step:
                    break
                eta *= rule.shrink
            w, d, objective = trial, trial_d, trial_objective
            iterations += 1
            current = w > cfg.zero_threshold
            stable = stable + 1 if np.array_equal(current, active) else 0
            active = current

        budget.spend(iterations, "exponentiated-gradient", residual)
        self.logger.debug("Phase 1: %d iterations, residual %.3e, %d active", iterations, residual, int(active.sum()))
        return w

    def _newton(self, basis: KernelBasis, d0: np.ndarray, budget: IterationBudget) -> Optional[np.ndarray]:
        """Active-set Newton on l_A(d) = nu*r_A, sum r*d = 1; None on failure."""
        cfg = self.config
        n = basis.n
        ranks = ranks_for(n)
        endpoints = (0, n - 2)
        target = 0.01 * cfg.kkt_tol

        active = d0 > cfg.zero_threshold
        active[list(endpoints)] = True
        d = np.where(active, d0, 0.0)
        d /= ranks @ d

        changes = 0
        just_added = None
        limit = max(cfg.newton_max_iterations, 5 * n)
        for iteration in range(1, limit + 1):
            if not budget.can_afford(1):
                budget.spend(iteration - 1, "newton", note="budget")
                return None
            ell = basis.gradient(d)
            ratio = ell / ranks
            idx = np.flatnonzero(active)

            if np.max(np.abs(ratio[idx] - 1.0)) <= target:
                inactive = np.flatnonzero(~active)
                violation = ratio[inactive] - 1.0
                if inactive.size == 0 or violation.max() <= target:
                    budget.spend(iteration, "newton", float(np.max(np.abs(ratio[idx] - 1.0))))
                    return d
                entering = int(inactive[np.argmax(violation)])
                active[entering] = True
                just_added = entering
                changes += 1
                self.logger.debug("Rank %d enters the active set (l/r = %.6f)", entering + 1, ratio[entering])
                continue

            delta = self._newton_direction(basis, d, ell, idx)
            if delta is None:
                budget.spend(iteration, "newton", note="singular")
                return None

            alpha, leaving = self._ratio_test(d[idx], delta, idx, endpoints)
            accepted = self._backtrack(basis, d, ell, idx, delta, alpha, leaving)
            if accepted is None:
                budget.spend(iteration, "newton", note="line search")
                return None
            d, leaving = accepted
            if leaving is not None:
                if leaving == just_added:
                    # Cycling between entering and leaving the same rank
                    budget.spend(iteration, "newton", note="cycling")
                    return None
                active[leaving] = False
                changes += 1
                self.logger.debug("Rank %d leaves the active set", leaving + 1)
            just_added = None
            if changes > 4 * n:
                budget.spend(iteration, "newton", note="active-set churn")
                return None

        budget.spend(limit, "newton", note="iteration limit")
        return None

    @staticmethod
    def _newton_direction(basis: KernelBasis, d: np.ndarray, ell: np.ndarray, idx: np.ndarray) -> Optional[np.ndarray]:
        ranks = ranks_for(basis.n)[idx]
        size = idx.size
        system = np.zeros((size + 1, size + 1))
        system[:size, :size] = basis.hessian(d, idx)
        system[:size, size] = -ranks
        system[size, :size] = ranks
        rhs = np.append(-ell[idx], 1.0 - ranks @ d[idx])
        try:
            solution = np.linalg.solve(system, rhs)
        except np.linalg.LinAlgError:
            return None
        if not np.all(np.isfinite(solution)):
            return None
        return solution[:size]

    @staticmethod
    def _ratio_test(d_active: np.ndarray, delta: np.ndarray, idx: np.ndarray, endpoints) -> Tuple[float, Optional[int]]:
        """Largest step in (0, 1] keeping active entries non-negative."""
        shrinking = delta < 0
        if not shrinking.any():
            return 1.0, None
        ratios = -d_active[shrinking] / delta[shrinking]
        k = int(np.argmin(ratios))
        bound = float(ratios[k])
        if bound >= 1.0:
            return 1.0, None
        blocking = int(idx[shrinking][k])
        if blocking in endpoints:
            return 0.5 * bound, None
        return bound, blocking

    @staticmethod
    def _backtrack(basis, d, ell, idx, delta, alpha, leaving):
        base = basis.objective(d)
        slope = float(ell[idx] @ delta)
        slack = 1e-13 * max(1.0, abs(base))
        while alpha >= 1e-12:
            trial = d.copy()
            trial[idx] += alpha * delta
            if leaving is not None:
                trial[leaving] = 0.0
            trial = np.clip(trial, 0.0, None)
            value = basis.objective(trial)
            if np.isfinite(value) and value >= base + ARMIJO * alpha * max(slope, 0.0) - slack:
                return trial, leaving
            alpha *= 0.5
            leaving = None
        return None

    def _report(self, basis: KernelBasis, d: np.ndarray, budget: IterationBudget) -> SolveReport:
        cfg = self.config
        n = basis.n
        ell = basis.gradient(d)
        residual, mu_hat, ratio = stationarity(ell, d, cfg.zero_threshold)
        converged = residual <= cfg.kkt_tol
        objective = basis.objective(d)

        coarse = kernel_basis(n, cfg.quadrature.order, cfg.quadrature.panels_for(n))
        quadrature_delta = abs(coarse.objective(d) - objective)
        if quadrature_delta > cfg.quadrature.refine_tol * max(1.0, abs(objective)):
            self.logger.warning("Quadrature refinement moved W by %.3e at n=%d", quadrature_delta, n)

        support = d > cfg.zero_threshold
        slack = {int(r + 1): float(1.0 - ratio[r]) for r in np.flatnonzero(~support)}
        diagnostics = {
            "mu_hat": mu_hat,
            "slack": slack,
            "phases": budget.breakdown(),
            "incentivized_quantiles": {int(r + 1): float(z) for r, z in zip(np.flatnonzero(support), kernel_peaks(n)[support])},
            "quadrature_delta": quadrature_delta,
        }
        if converged:
            self.logger.info("Converged n=%d in %s; residual %.2e, slack %s", n, budget, residual, slack)
        else:
            self.logger.warning("No convergence for n=%d: residual %.3e after %s", n, residual, budget)

        differentials = PrizeDifferentials(d)
        return SolveReport(
            n=n,
            d_star=differentials,
            v_star=differentials.to_schedule(),
            objective=objective,
            kkt_residual=residual,
            mu=1.0,
            support=tuple(bool(s) for s in support),
            iterations=budget.used,
            converged=converged,
            diagnostics=diagnostics,
        )


def solve_robust(n: int, cfg: Optional[SolverConfig] = None, start: Optional[ArrayLike] = None) -> SolveReport:
    """Robust prize differentials for n agents."""
    return RobustSolver(cfg).solve(n, start=start)

"""
Main workflow mapping a validated run configuration to library calls.
"""

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from .config import RunConfig
from .errors import SolverConvergenceError, TournamentDesignError, UnboundedSupportError
from .numerics.kernel import ranks_for
from .design.solver import SolveReport, solve_robust
from .design.asymptotics import asymptotic_d, asymptotic_v
from .noise.adversary import adversarial_m, entropy_of
from .noise.reconstruction import (
    NoiseDistribution,
    closed_form_n3_distribution,
    closed_form_n4_distribution,
    exponential_density,
    exponential_limit,
    reconstruct_distribution,
)
from .equilibrium import PowerCost, equilibrium_effort, marginal_benefit
from .metrics import gini, gini_sweep
from .verification import InvariantVerifier

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INVALID = 2
EXIT_NOT_CONVERGED = 3

# Window on which m*(d^inf) is compared with its exponential limit
LIMIT_WINDOW = (0.05, 0.95)


@dataclass
class WorkflowResult:
    success: bool
    payload: Any = None
    exit_code: int = EXIT_OK
    columns: Optional[List[str]] = None
    rows: Optional[List[List[Any]]] = None
    sidecar: Optional[Dict[str, Any]] = None
    error: Optional[str] = None
    messages: List[str] = field(default_factory=list)

    @property
    def tabular(self) -> bool:
        return self.columns is not None


class TournamentWorkflow:
    """Runs one CLI command and collects its output."""

    def __init__(self, config: RunConfig, verbose: bool = False):
        self.config = config
        self.verbose = verbose
        self.logger = logging.getLogger(__name__)
        self._commands: Dict[str, Callable[[], WorkflowResult]] = {
            "solve": self.solve,
            "table": self.table,
            "distribution": self.distribution,
            "asymptotic": self.asymptotic,
            "gini-sweep": self.gini_sweep,
            "effort": self.effort,
            "verify": self.verify,
        }

    def run(self) -> WorkflowResult:
        """Dispatch the configured command, mapping failures to exit codes."""
        try:
            return self._commands[self.config.command]()
        except SolverConvergenceError as e:
            report = e.report.to_dict() if isinstance(e.report, SolveReport) else None
            return WorkflowResult(success=False, payload=report, exit_code=EXIT_NOT_CONVERGED, error=str(e))
        except (ValueError, UnboundedSupportError) as e:
            return WorkflowResult(success=False, exit_code=EXIT_INVALID, error=str(e))
        except TournamentDesignError as e:
            return WorkflowResult(success=False, exit_code=EXIT_CHECK_FAILED, error=str(e))

    def _solve(self, n: int) -> SolveReport:
        return solve_robust(n, self.config.solver)

    def _converged(self, n: int) -> SolveReport:
        report = self._solve(n)
        if not report.converged:
            raise SolverConvergenceError(f"solver did not converge for n={n}", n=n, report=report)
        return report

    def solve(self) -> WorkflowResult:
        report = self._solve(self.config.n)
        payload = report.to_dict()
        rows = [[r, d, v] for r, (d, v) in enumerate(zip(report.d_star.tolist() + [None], report.v_star.tolist()), 1)]
        result = WorkflowResult(
            success=report.converged,
            payload=payload,
            exit_code=EXIT_OK if report.converged else EXIT_NOT_CONVERGED,
            columns=["r", "d", "v"],
            rows=rows,
        )
        if not report.converged:
            result.error = f"solver did not converge for n={report.n} (residual {report.kkt_residual:.3e})"
        result.messages.append(f"n={report.n}: W={report.objective:.10f}, residual {report.kkt_residual:.2e}")
        return result

    def table(self) -> WorkflowResult:
        """Prize schedules for n_min..n_max to 4 decimals; partial rows survive a failure."""
        n_min, n_max = self.config.n_min, self.config.n_max
        columns = ["n"] + [f"v{r}" for r in range(1, n_max + 1)]
        rows: List[List[Any]] = []
        for n in range(n_min, n_max + 1):
            report = self._solve(n)
            if not report.converged:
                return WorkflowResult(
                    success=False,
                    payload={"rows": rows},
                    exit_code=EXIT_NOT_CONVERGED,
                    columns=columns,
                    rows=rows,
                    error=f"solver did not converge for n={n}",
                )
            prizes = [f"{v:.4f}" for v in report.v_star.tolist()]
            rows.append([str(n)] + prizes + [""] * (n_max - n))
        payload = {"rows": [{"n": int(row[0]), "v": [float(x) for x in row[1:] if x]} for row in rows]}
        return WorkflowResult(success=True, payload=payload, columns=columns, rows=rows)

    def distribution(self) -> WorkflowResult:
        cfg = self.config
        source = cfg.source
        q = cfg.solver.quadrature
        sidecar: Dict[str, Any] = {"n": cfg.n, "hbar": cfg.hbar}

        if source == "solved":
            report = self._converged(cfg.n)
            m = adversarial_m(report.d_star, cfg.hbar, q)
            dist = reconstruct_distribution(m, cfg.eps_lower, cfg.grid, q)
            entropy = entropy_of(m, q)
            sidecar["entropy_check"] = {"entropy": entropy, "target": cfg.hbar, "residual": abs(entropy - cfg.hbar)}
            sidecar["W"] = m.metadata["W"]
        elif source == "asymptotic":
            dist = exponential_limit(cfg.hbar, cfg.eps_lower, cfg.grid)
            sidecar["limit_deviation"] = self._limit_deviation(cfg.n, cfg.hbar)
        elif cfg.n == 3:
            dist = closed_form_n3_distribution(cfg.hbar, cfg.eps_lower, cfg.grid)
        else:
            dist = closed_form_n4_distribution(cfg.hbar, cfg.eps_lower, cfg.grid, q)

        sidecar.update(dist.to_dict())
        payload = dict(sidecar, grid=self._grid_dict(dist))
        return WorkflowResult(
            success=True,
            payload=payload,
            columns=["t", "F", "f", "hazard"],
            rows=[list(row) for row in dist.rows()],
            sidecar=sidecar,
        )

    def _limit_deviation(self, n: int, hbar: float) -> Optional[float]:
        """Largest relative gap between m*(d^inf) and the entropy-matched exponential limit."""
        if n < 3:
            return None
        z = np.linspace(*LIMIT_WINDOW, 181)
        m_harmonic = adversarial_m(asymptotic_d(n), hbar, self.config.solver.quadrature)
        limit = exponential_density(hbar, entropy_matched=True)
        return float(np.max(np.abs(m_harmonic(z) / limit(z) - 1.0)))

    @staticmethod
    def _grid_dict(dist: NoiseDistribution) -> Dict[str, List[float]]:
        return {"t": dist.t.tolist(), "F": dist.F.tolist(), "f": dist.f.tolist(), "hazard": dist.hazard.tolist()}

    def asymptotic(self) -> WorkflowResult:
        n = self.config.n
        d_inf = asymptotic_d(n)
        v_inf = asymptotic_v(n)
        payload: Dict[str, Any] = {"n": n, "d": d_inf.tolist(), "v": v_inf.tolist(), "gini": gini(v_inf)}
        ranks = np.arange(1, n + 1)

        if self.config.compare:
            report = self._converged(n)
            payload["v_star"] = report.v_star.tolist()
            payload["gini_star"] = gini(report.v_star)
            columns = ["r", "r_over_n", "v_star", "v_inf"]
            rows = [[int(r), r / n, vs, vi] for r, vs, vi in zip(ranks, report.v_star.tolist(), v_inf.tolist())]
        else:
            columns = ["r", "r_over_n", "d_inf", "v_inf"]
            d_column = d_inf.tolist() + [None]
            rows = [[int(r), r / n, dr, vi] for r, dr, vi in zip(ranks, d_column, v_inf.tolist())]
        return WorkflowResult(success=True, payload=payload, columns=columns, rows=rows)

    def gini_sweep(self) -> WorkflowResult:
        sweep = gini_sweep(self.config.n_min, self.config.n_max, self.config.solver)
        return WorkflowResult(
            success=True,
            payload=[{"n": n, "gini": g} for n, g in sweep],
            columns=["n", "gini"],
            rows=[[n, g] for n, g in sweep],
        )

    def effort(self) -> WorkflowResult:
        cfg = self.config
        q = cfg.solver.quadrature
        report = self._converged(cfg.n)
        m = adversarial_m(report.d_star, cfg.hbar, q)
        cost = PowerCost(p=cfg.p, c0=cfg.c0)
        payload = {
            "n": cfg.n,
            "hbar": cfg.hbar,
            "p": cfg.p,
            "c0": cfg.c0,
            "lambda": m.constant,
            "marginal_benefit": marginal_benefit(report.d_star, m, q),
            "effort": equilibrium_effort(report.d_star, m, cost, q),
        }
        return WorkflowResult(success=True, payload=payload, columns=list(payload), rows=[list(payload.values())])

    def verify(self) -> WorkflowResult:
        cfg = self.config
        d = None
        if cfg.input is not None:
            d = self._load_differentials(Path(cfg.input))
        verifier = InvariantVerifier(cfg.solver, hbar=cfg.hbar, seed=cfg.seed, samples=cfg.samples)
        report = verifier.verify(n=cfg.n, d=d)
        result = WorkflowResult(
            success=report.passed,
            payload=report.to_dict(),
            exit_code=EXIT_OK if report.passed else EXIT_CHECK_FAILED,
            columns=["check", "passed", "residual", "tolerance"],
            rows=[[c.check_name, c.passed, c.residual, c.tolerance] for c in report.check_results],
        )
        if not report.passed:
            result.error = report.error or "failed checks: " + ", ".join(report.failed_checks())
        return result

    def _load_differentials(self, path: Path) -> np.ndarray:
        """d from a solve JSON report; n must agree with --n when both are given."""
        with open(path, "r", encoding="utf-8") as handle:
            data = json.load(handle)
        if "d" not in data:
            raise ValueError(f"{path} has no 'd' field")
        d = np.asarray(data["d"], dtype=float)
        n = d.size + 1
        for claimed in (data.get("n"), self.config.n):
            if claimed is not None and claimed != n:
                raise ValueError(f"{path} holds d for n={n}, but n={claimed} was requested")
        if not np.all(np.isfinite(d)) or np.any(d < 0):
            raise ValueError(f"{path} holds an invalid prize vector")
        ranks = ranks_for(n)
        if not math.isclose(float(ranks @ d), 1.0, abs_tol=1e-12):
            raise ValueError(f"{path} violates the unit budget")
        self.logger.info("Loaded d for n=%d from %s", n, path)
        return d

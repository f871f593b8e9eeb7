"""
Configuration models for quadrature, the robust solver and CLI runs.
"""

import math
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

CSV_COMMANDS = frozenset({"table", "gini-sweep", "distribution"})


class QuadratureSpec(BaseModel):
    """Composite Gauss-Legendre settings shared by every integral."""

    model_config = ConfigDict(frozen=True)

    order: int = Field(default=32, ge=2, description="Nodes per panel")
    panels: int = Field(default=16, ge=1, description="Equal subintervals of [0, 1]")
    refine_tol: float = Field(default=1e-10, gt=0, description="Relative panel-doubling tolerance")

    def panels_for(self, n: int) -> int:
        """Panel count used for tournament size n."""
        # Beta kernels narrow like 1/n near the endpoints
        return max(self.panels, math.ceil(n / 4))


class StepRule(BaseModel):
    """Step size rule for the exponentiated-gradient phase."""

    model_config = ConfigDict(frozen=True)

    scale: float = Field(default=0.5, gt=0)
    min_step: float = Field(default=1e-3, gt=0)
    max_step: float = Field(default=1.0, gt=0)
    shrink: float = Field(default=0.5, gt=0, lt=1)

    @model_validator(mode="after")
    def _check_bounds(self) -> "StepRule":
        if self.min_step > self.max_step:
            raise ValueError("min_step must not exceed max_step")
        return self

    def step_for(self, residual: float) -> float:
        """Initial step for a given max stationarity residual."""
        if residual <= 0:
            return self.max_step
        return min(self.max_step, max(self.min_step, self.scale / residual))


class SolverConfig(BaseModel):
    """Tolerances and limits for solve_robust."""

    model_config = ConfigDict(frozen=True)

    kkt_tol: float = Field(default=1e-8, gt=0)
    zero_threshold: float = Field(default=1e-9, gt=0)
    max_iterations: int = Field(default=10000, ge=1)
    step_rule: StepRule = Field(default_factory=StepRule)
    quadrature: QuadratureSpec = Field(default_factory=QuadratureSpec)
    active_set_window: int = Field(default=50, ge=1)
    newton_max_iterations: int = Field(default=200, ge=1)
    init: Literal["asymptotic", "linear", "uniform"] = "asymptotic"


class RunConfig(BaseModel):
    """Validated parameters of one CLI invocation."""

    model_config = ConfigDict(frozen=True)

    command: Literal["solve", "table", "distribution", "asymptotic", "gini-sweep", "effort", "verify"]
    n: Optional[int] = Field(default=None, ge=2)
    n_min: Optional[int] = Field(default=None, ge=3)
    n_max: Optional[int] = Field(default=None, ge=3)
    hbar: float = 0.0
    eps_lower: float = 0.0
    grid: int = Field(default=2001, ge=11)
    source: Literal["solved", "asymptotic", "closed-form"] = "solved"
    p: float = Field(default=2.0, gt=1)
    c0: float = Field(default=1.0, gt=0)
    seed: int = Field(default=0, ge=0)
    samples: int = Field(default=200_000, ge=10_000)
    compare: bool = False
    output_format: Optional[Literal["json", "csv"]] = None
    output: Optional[str] = None
    input: Optional[str] = None
    solver: SolverConfig = Field(default_factory=SolverConfig)

    @model_validator(mode="after")
    def _check_command(self) -> "RunConfig":
        if not math.isfinite(self.hbar) or not math.isfinite(self.eps_lower):
            raise ValueError("--hbar and --eps-lower must be finite")
        needs_n = {"solve", "distribution", "asymptotic", "effort", "verify"}
        if self.command in needs_n and self.n is None and self.input is None:
            raise ValueError(f"{self.command} requires --n")
        if self.command in {"table", "gini-sweep"}:
            if self.n_min is None or self.n_max is None:
                raise ValueError(f"{self.command} requires --min and --max")
            if self.n_min > self.n_max:
                raise ValueError("--min must not exceed --max")
        if self.command == "distribution" and self.source == "closed-form" and self.n not in (3, 4):
            raise ValueError("closed-form distributions exist only for n = 3 and n = 4")
        if self.input is not None and self.command != "verify":
            raise ValueError("--input is only read by verify")
        return self

    @property
    def resolved_format(self) -> str:
        """Requested format, or the natural one for the command."""
        if self.output_format is not None:
            return self.output_format
        return "csv" if self.command in CSV_COMMANDS else "json"

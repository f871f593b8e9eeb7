"""
Exception hierarchy for the tournament designer.
"""

from typing import Any, Optional


class TournamentDesignError(Exception):
    """Base class for all library errors."""


class QuadratureDivergenceError(TournamentDesignError, ArithmeticError):
    """An integral failed its panel-doubling check or is not finite."""

    def __init__(self, message: str, delta: float = float("nan"), value: float = float("nan")):
        super().__init__(message)
        self.delta = delta
        self.value = value


class EndpointSingularityError(QuadratureDivergenceError):
    """d_1 = 0 or d_{n-1} = 0 makes an endpoint integral diverge."""


class UnboundedSupportError(TournamentDesignError):
    """A noise reconstruction cannot be anchored at a finite point."""


class SolverConvergenceError(TournamentDesignError):
    """The robust solver stopped before meeting its KKT tolerance."""

    def __init__(self, message: str, n: int, report: Optional[Any] = None):
        super().__init__(message)
        self.n = n
        self.report = report

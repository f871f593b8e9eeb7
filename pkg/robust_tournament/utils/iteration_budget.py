"""
Iteration budget tracking for the two-phase solver.
"""

from typing import Any, Dict, List
from dataclasses import dataclass


@dataclass
class PhaseRecord:
    """Iterations spent in one solver phase."""
    phase: str
    iterations: int
    residual: float
    note: str = ""


class IterationBudget:
    """Tracks solver iterations per phase against a hard limit."""

    def __init__(self, limit: int):
        self.limit = limit
        self.records: List[PhaseRecord] = []
        self.used = 0

    def spend(self, iterations: int, phase: str, residual: float = float("nan"), note: str = ""):
        """Record iterations spent in a phase."""
        self.records.append(PhaseRecord(phase=phase, iterations=iterations, residual=residual, note=note))
        self.used += iterations

    def can_afford(self, iterations: int = 1) -> bool:
        """Check whether more iterations fit in the budget."""
        return (self.used + iterations) <= self.limit

    def remaining(self) -> int:
        return max(0, self.limit - self.used)

    def is_exhausted(self) -> bool:
        return self.used >= self.limit

    def breakdown(self) -> Dict[str, int]:
        """Iterations by phase name."""
        totals: Dict[str, int] = {}
        for record in self.records:
            totals[record.phase] = totals.get(record.phase, 0) + record.iterations
        return totals

    def to_dict(self) -> Dict[str, Any]:
        return {
            "limit": self.limit,
            "used": self.used,
            "phases": [
                {
                    "phase": record.phase,
                    "iterations": record.iterations,
                    "residual": record.residual,
                    "note": record.note,
                }
                for record in self.records
            ],
        }

    def __str__(self) -> str:
        return f"Iterations: {self.used}/{self.limit} ({', '.join(f'{k}={v}' for k, v in self.breakdown().items())})"

"""
Simulation models for the linear loop ANT analyzer.
Defines exact execution traces and the horizon check used as evidence for ANT membership.
"""

from enum import Enum
from typing import Optional, Tuple

from pydantic import BaseModel, Field
from sympy import Rational


class Violation(BaseModel):
    """First guard row that is not strictly positive."""

    step: int = Field(..., description="Iteration index k of the violated state x_k")
    row: int = Field(..., description="Index of the violated guard row")


class Trace(BaseModel):
    """Exact states x_0..x_k of a run and the guard values F·x_k - b at each of them."""

    points: Tuple[Tuple[Rational, ...], ...] = Field(..., description="Visited states")
    guard_values: Tuple[Tuple[Rational, ...], ...] = Field(..., description="Guard row values per state")
    first_violation: Optional[Violation] = Field(None, description="Least step with a non-positive guard row")

    class Config:
        """Configure behavior."""

        arbitrary_types_allowed = True
        frozen = True

    @property
    def terminated(self) -> bool:
        return self.first_violation is not None

    @property
    def steps(self) -> int:
        return len(self.points) - 1


class HorizonStatus(str, Enum):
    POSITIVE_TAIL = "PositiveTail"
    TERMINATED = "Terminated"


class HorizonResult(BaseModel):
    """Outcome of iterating the update map up to a horizon K regardless of the guard."""

    status: HorizonStatus = Field(..., description="PositiveTail or Terminated")
    horizon: int = Field(..., description="Horizon K")
    k0: Optional[int] = Field(None, description="Least k0 with every guard row positive on [k0, K]")
    violation: Optional[Violation] = Field(None, description="First violation when the tail is not positive")

    def describe(self) -> str:
        if self.status == HorizonStatus.POSITIVE_TAIL:
            return f"PositiveTail(k0={self.k0})"
        return f"Terminated(k={self.violation.step if self.violation else 0})"

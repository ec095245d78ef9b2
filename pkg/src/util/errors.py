"""
Exception types for the linear loop ANT analyzer.
All domain failures derive from ValueError so callers can keep a single failure type.
"""

from typing import Optional


class LoopSyntaxError(ValueError):
    """Raised when loop source text does not follow the loop grammar."""

    def __init__(self, message: str, line: int = 1, column: int = 1):
        self.line = line
        self.column = column
        super().__init__(f"{message} (line {line}, column {column})")


class NonLinearTermError(ValueError):
    """Raised when a guard or an assignment is not affine in the program variables."""


class UnknownVariableError(ValueError):
    """Raised when a JSON program refers to a variable it does not declare."""


class DimensionMismatchError(ValueError):
    """Raised when vectors, matrices or sets of incompatible dimensions are combined."""


class SingularMatrixError(ValueError):
    """Raised when a change of basis is not invertible."""


class IrrationalSpectrumError(ValueError):
    """Raised when the update matrix has a real eigenvalue that is not rational."""

    def __init__(self, factor: str, context: Optional[str] = None):
        self.factor = factor
        self.context = context
        where = f" in {context}" if context else ""
        super().__init__(f"Irrational real eigenvalue{where}: factor {factor} has a real root that is not rational")


class RegularityError(ValueError):
    """Raised when the reduced pair still has several Jordan blocks for one eigenvalue."""


class CorpusError(ValueError):
    """Raised when a program corpus cannot be read or written."""

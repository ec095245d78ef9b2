"""
Simulation service for the linear loop ANT analyzer.
Executes loops exactly over the rationals; used by the simulate command and as ground truth in property checks.
"""

import logging
from typing import List, Optional, Sequence, Tuple

from sympy import QQ, Matrix, Rational
from sympy.polys.matrices import DomainMatrix

from src.models.loop_models import LoopProgram
from src.models.simulation_models import HorizonResult, HorizonStatus, Trace, Violation
from src.util.errors import DimensionMismatchError
from src.util.exact_arith import to_rational

logger = logging.getLogger(__name__)


def _over_qq(M: Matrix) -> DomainMatrix:
    return DomainMatrix.from_Matrix(Matrix(M)).convert_to(QQ)


class LoopStepper:
    """The update x := A·x + c and the guard F·x - b of one program over the field QQ."""

    def __init__(self, program: LoopProgram):
        self.program = program
        self.A = _over_qq(program.A)
        self.c = _over_qq(program.c)
        self.F = _over_qq(program.F)
        self.b = _over_qq(program.b)

    def start(self, x0: Sequence) -> DomainMatrix:
        values = [to_rational(v) for v in x0]
        if len(values) != self.program.n:
            raise DimensionMismatchError(f"Initial point has {len(values)} entries, the loop has {self.program.n}")
        return _over_qq(Matrix(len(values), 1, values))

    def step(self, x: DomainMatrix) -> DomainMatrix:
        return self.A * x + self.c

    def guard(self, x: DomainMatrix) -> Tuple[Rational, ...]:
        return tuple(Rational(v) for v in (self.F * x - self.b).to_Matrix())

    @staticmethod
    def point(x: DomainMatrix) -> Tuple[Rational, ...]:
        return tuple(Rational(v) for v in x.to_Matrix())


def _first_failing_row(values: Sequence[Rational]) -> Optional[int]:
    return next((i for i, v in enumerate(values) if v <= 0), None)


def run(program: LoopProgram, x0: Sequence, max_steps: int) -> Trace:
    """
    Execute the loop from x0 until a guard row is not positive or max_steps updates were applied.

    Args:
        program: Loop to execute
        x0: Initial point, entries convertible to rationals
        max_steps: Maximum number of loop iterations

    Returns:
        Trace of the visited states; the guard is evaluated at every recorded state

    Raises:
        DimensionMismatchError: If x0 does not match the number of variables
    """
    stepper = LoopStepper(program)
    x = stepper.start(x0)
    points: List[Tuple[Rational, ...]] = []
    guards: List[Tuple[Rational, ...]] = []
    violation: Optional[Violation] = None
    for k in range(max_steps + 1):
        values = stepper.guard(x)
        points.append(stepper.point(x))
        guards.append(values)
        row = _first_failing_row(values)
        if row is not None:
            violation = Violation(step=k, row=row)
            break
        if k < max_steps:
            x = stepper.step(x)
    logger.debug(f"Simulated {len(points) - 1} steps, violation: {violation}")
    return Trace(points=tuple(points), guard_values=tuple(guards), first_violation=violation)


def iterate(program: LoopProgram, x0: Sequence, steps: int) -> Tuple[Rational, ...]:
    """The state after applying the update `steps` times, ignoring the guard."""
    stepper = LoopStepper(program)
    x = stepper.start(x0)
    for _ in range(steps):
        x = stepper.step(x)
    return stepper.point(x)


def check_ant_at_horizon(program: LoopProgram, x0: Sequence, horizon: int) -> HorizonResult:
    """
    Iterate the update up to the horizon K whatever the guard says and look for a positive tail.

    Returns PositiveTail(k0) when every guard row is positive on [k0, K] for the least such k0, and
    Terminated(k) with the first violation otherwise. This is evidence, not proof, of ANT membership.

    Args:
        program: Loop to execute
        x0: Initial point
        horizon: Last iteration index K

    Returns:
        HorizonResult
    """
    stepper = LoopStepper(program)
    x = stepper.start(x0)
    first: Optional[Violation] = None
    last_failure = -1
    for k in range(horizon + 1):
        row = _first_failing_row(stepper.guard(x))
        if row is not None:
            last_failure = k
            if first is None:
                first = Violation(step=k, row=row)
        if k < horizon:
            x = stepper.step(x)
    if last_failure < horizon:
        return HorizonResult(status=HorizonStatus.POSITIVE_TAIL, horizon=horizon, k0=last_failure + 1)
    return HorizonResult(status=HorizonStatus.TERMINATED, horizon=horizon, violation=first)

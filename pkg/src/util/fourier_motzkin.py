"""
Fourier-Motzkin elimination with strictness tracking, and budgeted branch-and-bound on top of it.
Constraints are plain tuples (coeffs, const, strict) meaning coeffs·x + const > 0 (strict) or >= 0.
"""

import logging
from typing import Dict, List, Optional, Sequence, Tuple

from sympy import Rational, igcd, ilcm

logger = logging.getLogger(__name__)

Constraint = Tuple[Tuple[Rational, ...], Rational, bool]


def floor_rational(value: Rational) -> int:
    value = Rational(value)
    return int(value.p) // int(value.q)


def ceil_rational(value: Rational) -> int:
    value = Rational(value)
    return -(-int(value.p) // int(value.q))


def normalize(constraint: Constraint) -> Optional[Constraint]:
    """
    Scale a constraint by a positive factor so its coefficients are coprime integers.

    Returns:
        The scaled constraint, None for a constant constraint that always holds. A constant constraint that never
        holds is returned with zero coefficients so callers can detect infeasibility.
    """
    coeffs, const, strict = constraint
    nonzero = [Rational(c) for c in coeffs if c != 0]
    if not nonzero:
        holds = const > 0 or (const == 0 and not strict)
        return None if holds else (tuple(Rational(0) for _ in coeffs), Rational(-1), True)

    denominator = 1
    for c in nonzero:
        denominator = ilcm(denominator, int(c.q))
    divisor = 0
    for c in nonzero:
        divisor = igcd(divisor, int(c.p) * (denominator // int(c.q)))
    factor = Rational(denominator, divisor)
    return tuple(Rational(c) * factor for c in coeffs), Rational(const) * factor, strict


def is_contradiction(constraint: Constraint) -> bool:
    return all(c == 0 for c in constraint[0])


def prune(constraints: Sequence[Constraint]) -> Optional[List[Constraint]]:
    """
    Normalize, drop tautologies and keep only the tightest constraint per coefficient vector.

    Returns:
        The pruned list, or None when a constant contradiction is present
    """
    tightest: Dict[Tuple[Rational, ...], Tuple[Rational, bool]] = {}
    for constraint in constraints:
        normalized = normalize(constraint)
        if normalized is None:
            continue
        if is_contradiction(normalized):
            return None
        coeffs, const, strict = normalized
        current = tightest.get(coeffs)
        if current is None or const < current[0] or (const == current[0] and strict and not current[1]):
            tightest[coeffs] = (const, strict)
    return [(coeffs, const, strict) for coeffs, (const, strict) in tightest.items()]


def eliminate(constraints: Sequence[Constraint], var: int) -> Optional[List[Constraint]]:
    """
    Project out one variable.

    Every lower bound is combined with every upper bound; the combination is strict when either side is.

    Args:
        constraints: Normalized constraints
        var: Index of the variable to eliminate

    Returns:
        Constraints over the remaining variables, or None if the projection is empty
    """
    lower: List[Constraint] = []
    upper: List[Constraint] = []
    result: List[Constraint] = []
    for constraint in constraints:
        a = constraint[0][var]
        if a > 0:
            lower.append(constraint)
        elif a < 0:
            upper.append(constraint)
        else:
            result.append(constraint)

    for lo_coeffs, lo_const, lo_strict in lower:
        a = lo_coeffs[var]
        for up_coeffs, up_const, up_strict in upper:
            b = -up_coeffs[var]
            coeffs = tuple(b * x + a * y for x, y in zip(lo_coeffs, up_coeffs))
            result.append((coeffs, b * lo_const + a * up_const, lo_strict or up_strict))
    return prune(result)


def _bounds(constraints: Sequence[Constraint], var: int, point: Sequence[Rational]):
    lo: Optional[Rational] = None
    lo_strict = False
    hi: Optional[Rational] = None
    hi_strict = False
    for coeffs, const, strict in constraints:
        a = coeffs[var]
        if a == 0:
            continue
        rest = const + sum((c * x for c, x in zip(coeffs[:var], point[:var]) if c != 0), Rational(0))
        bound = -rest / a
        if a > 0:
            if lo is None or bound > lo or (bound == lo and strict):
                lo, lo_strict = bound, strict
        else:
            if hi is None or bound < hi or (bound == hi and strict):
                hi, hi_strict = bound, strict
    return lo, lo_strict, hi, hi_strict


def _choose(lo: Optional[Rational], lo_strict: bool, hi: Optional[Rational], hi_strict: bool) -> Rational:
    """Pick a value inside the bounds, preferring 0 then the integer nearest to 0."""

    def inside(v: Rational) -> bool:
        if lo is not None and (v < lo or (v == lo and lo_strict)):
            return False
        if hi is not None and (v > hi or (v == hi and hi_strict)):
            return False
        return True

    candidates = [Rational(0)]
    if lo is not None:
        low_int = ceil_rational(lo)
        candidates.append(Rational(low_int + 1 if lo_strict and low_int == lo else low_int))
    if hi is not None:
        high_int = floor_rational(hi)
        candidates.append(Rational(high_int - 1 if hi_strict and high_int == hi else high_int))
    for candidate in candidates:
        if inside(candidate):
            return candidate
    if lo is not None and hi is not None:
        return (lo + hi) / 2 if lo != hi else lo
    raise ArithmeticError("Empty interval during back-substitution")


def feasible_point(constraints: Sequence[Constraint], n: int) -> Optional[List[Rational]]:
    """
    Decide feasibility of a conjunction of constraints over the reals and extract a rational witness.

    Args:
        constraints: Constraints over n variables
        n: Number of variables

    Returns:
        A rational point satisfying every constraint, or None if there is none
    """
    current = prune(constraints)
    if current is None:
        return None
    levels: List[Tuple[int, List[Constraint]]] = []
    for var in reversed(range(n)):
        levels.append((var, current))
        projected = eliminate(current, var)
        if projected is None:
            return None
        current = projected

    point: List[Rational] = [Rational(0)] * n
    for var, level in reversed(levels):
        lo, lo_strict, hi, hi_strict = _bounds(level, var, point)
        point[var] = _choose(lo, lo_strict, hi, hi_strict)
    return point


def satisfies(constraints: Sequence[Constraint], point: Sequence[Rational]) -> bool:
    for coeffs, const, strict in constraints:
        value = const + sum((c * x for c, x in zip(coeffs, point) if c != 0), Rational(0))
        if value < 0 or (strict and value == 0):
            return False
    return True


def integer_point(
    constraints: Sequence[Constraint], n: int, budget: int
) -> Tuple[Optional[List[Rational]], bool, int]:
    """
    Search for an integer point by branch-and-bound over the rational relaxation.

    Args:
        constraints: Non-strict constraints with integer data
        n: Number of variables
        budget: Maximum number of relaxations solved

    Returns:
        Tuple (point, exhausted, nodes): the integer point or None, whether the budget ran out, and the node count
    """
    stack: List[List[Constraint]] = [list(constraints)]
    nodes = 0
    while stack:
        if nodes >= budget:
            logger.debug(f"Branch-and-bound budget of {budget} nodes exhausted")
            return None, True, nodes
        branch = stack.pop()
        nodes += 1
        point = feasible_point(branch, n)
        if point is None:
            continue
        fractional = next((i for i, v in enumerate(point) if Rational(v).q != 1), None)
        if fractional is None:
            return point, False, nodes
        value = point[fractional]
        unit = tuple(Rational(int(i == fractional)) for i in range(n))
        down = (tuple(-u for u in unit), Rational(floor_rational(value)), False)
        up = (unit, Rational(-ceil_rational(value)), False)
        stack.append(branch + [up])
        stack.append(branch + [down])
    return None, False, nodes

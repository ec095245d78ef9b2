"""
Helper functions for the linear loop ANT analyzer.
Provides formatting and parsing utilities used across the application.
"""

import json
import logging
from typing import Any, Dict, List, Optional, Sequence, Tuple

from sympy import Rational

from src.util.exact_arith import to_rational

logger = logging.getLogger(__name__)


def safe_get(obj: Optional[Dict[str, Any]], path: str, default: Any = None) -> Any:
    """
    Safely get a nested value from a dictionary using dot notation.

    Args:
        obj: Dictionary to get value from
        path: Path to value using dot notation (e.g., "expected.verdict")
        default: Default value to return if path not found

    Returns:
        Value at path or default if not found
    """
    if obj is None:
        return default

    current: Any = obj
    for part in path.split("."):
        if not isinstance(current, dict):
            return default
        current = current.get(part)
        if current is None:
            return default
    return current


def to_json(obj: Any) -> str:
    """
    Convert an object to a JSON string with proper formatting.

    Rationals and other non-JSON values are written with str(), so 3/2 becomes "3/2".

    Args:
        obj: Object to convert to JSON

    Returns:
        JSON string
    """
    return json.dumps(obj, default=str, indent=2)


def format_rational(value: Any, exact: bool = True, digits: int = 6) -> str:
    """
    Format a rational number.

    Args:
        value: Rational value
        exact: Print p/q when True, otherwise a decimal approximation marked with "~" for non-integers
        digits: Significant digits of the approximation

    Returns:
        Formatted number
    """
    number = Rational(value)
    if number.q == 1 or exact:
        return str(number)
    return f"~{number.evalf(digits)}"


def format_vector(values: Sequence[Any], exact: bool = True) -> str:
    return "(" + ", ".join(format_rational(v, exact) for v in values) + ")"


def parse_rational_list(text: str) -> Tuple[Rational, ...]:
    """
    Parse a comma separated list of rationals such as "-9, 3, 1/2".

    Raises:
        ValueError: If an entry is not a rational number
    """
    items = [item.strip() for item in text.split(",")]
    if not items or any(not item for item in items):
        raise ValueError(f"Expected a comma separated list of rationals, got {text!r}")
    return tuple(to_rational(item) for item in items)


def parse_range(text: str) -> Tuple[int, int]:
    """
    Parse an inclusive integer range "lo:hi", or a single integer "n" meaning n:n.

    Raises:
        ValueError: If the text is not a range
    """
    parts: List[str] = text.split(":")
    if len(parts) == 1:
        parts = parts * 2
    if len(parts) != 2:
        raise ValueError(f"Expected a range lo:hi, got {text!r}")
    try:
        lo, hi = int(parts[0]), int(parts[1])
    except ValueError as e:
        raise ValueError(f"Expected a range lo:hi, got {text!r}") from e
    return lo, hi

"""
Main module for the linear loop ANT analyzer.
Entry point of the antloop command.
"""

import sys
from typing import Optional, Sequence

from src.api.router import dispatch


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run antloop with the given arguments, or the process arguments when none are given."""
    return int(dispatch(sys.argv[1:] if argv is None else argv))


if __name__ == "__main__":
    sys.exit(main())

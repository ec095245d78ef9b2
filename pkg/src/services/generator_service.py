"""
Generator service for the linear loop ANT analyzer.
Builds seeded random loop programs whose update matrices have rational spectra.
"""

import logging
import random
from typing import Dict, List, Optional, Tuple

from sympy import ImmutableMatrix, Matrix, Rational

from src.config import settings
from src.models.loop_models import LoopClass, LoopProgram
from src.services.frontend_service import build_program
from src.util.exact_arith import block_diagonal, inverse, qmatrix

logger = logging.getLogger(__name__)

# Variable and guard row ranges of the benchmark sizes
PRESETS: Dict[str, Dict[str, Tuple[int, int]]] = {
    "small": {"dimension": (3, 4), "conditions": (2, 4)},
    "medium": {"dimension": (4, 6), "conditions": (2, 4)},
    "large": {"dimension": (7, 15), "conditions": (2, 4)},
}

CLASS_CYCLE = (LoopClass.HOMOGENEOUS, LoopClass.GENERALIZED, LoopClass.AFFINE)

EIGENVALUES = [Rational(v) for v in (-3, -2, -1, 1, 2, 3, 4)] + [Rational(1, 2), Rational(-1, 2), Rational(3, 2)]


class GeneratorService:
    """Seeded generator of random loops x := P·D·P⁻¹·x (+ c) guarded by random rows."""

    def __init__(self, seed: Optional[int] = None):
        """
        Initialize the generator.

        Args:
            seed: Random seed, defaults to settings.DEFAULT_SEED
        """
        self.seed = seed if seed is not None else settings.DEFAULT_SEED
        self.rng = random.Random(self.seed)
        logger.info(f"Generator service initialized with seed {self.seed}")

    def unimodular(self, n: int) -> ImmutableMatrix:
        """Product of a random unit lower and a random unit upper triangular integer matrix, so det = 1."""
        lower = Matrix(n, n, lambda i, j: 1 if i == j else (self.rng.randint(-2, 2) if i > j else 0))
        upper = Matrix(n, n, lambda i, j: 1 if i == j else (self.rng.randint(-1, 1) if i < j else 0))
        return ImmutableMatrix(lower * upper)

    def jordan_matrix(self, n: int) -> ImmutableMatrix:
        """Block diagonal matrix of random rational eigenvalues, with occasional blocks of size 2 or 3."""
        blocks: List[Matrix] = []
        remaining = n
        while remaining > 0:
            value = self.rng.choice(EIGENVALUES)
            size = 1
            if remaining >= 2 and self.rng.random() < 0.25:
                size = min(remaining, self.rng.choice((2, 3)))
            blocks.append(Matrix(size, size, lambda i, j: value if i == j else (1 if j == i + 1 else 0)))
            remaining -= size
        return block_diagonal(blocks)

    def _row(self, n: int, low: int = -3, high: int = 3) -> List[int]:
        while True:
            row = [self.rng.randint(low, high) for _ in range(n)]
            if any(row):
                return row

    def program(self, n: int, m: int, loop_class: LoopClass, name: Optional[str] = None) -> LoopProgram:
        """
        One random program of the requested class.

        Args:
            n: Number of variables
            m: Number of guard rows, forced to 1 for homogeneous loops
            loop_class: Class of the program
            name: Program identifier

        Returns:
            The program
        """
        if loop_class == LoopClass.HOMOGENEOUS:
            m = 1
        elif loop_class == LoopClass.GENERALIZED and m < 2:
            m = 2
        P = self.unimodular(n)
        A = ImmutableMatrix(P * self.jordan_matrix(n) * inverse(P))
        F = qmatrix([self._row(n) for _ in range(m)])
        if loop_class == LoopClass.AFFINE:
            c = qmatrix([[v] for v in self._row(n, -5, 5)])
            b = qmatrix([[v] for v in self._row(m, -5, 5)])
        else:
            c = qmatrix([[0]] * n)
            b = qmatrix([[0]] * m)
        variables = [f"x{i + 1}" for i in range(n)]
        return build_program(variables, A, c, F, b, name)

    def corpus(
        self,
        count: int,
        dimension: Tuple[int, int],
        conditions: Tuple[int, int],
        loop_class: Optional[LoopClass] = None,
    ) -> List[LoopProgram]:
        """
        A list of random programs; without a class the three classes alternate.

        Args:
            count: Number of programs
            dimension: Inclusive range of variable counts
            conditions: Inclusive range of guard row counts
            loop_class: Class of every program, or None to cycle through the classes

        Returns:
            Programs named <class>-<index>
        """
        programs = []
        for index in range(count):
            chosen = loop_class or CLASS_CYCLE[index % len(CLASS_CYCLE)]
            n = self.rng.randint(*dimension)
            m = self.rng.randint(*conditions)
            programs.append(self.program(n, m, chosen, f"{chosen.value}-{index:04d}"))
        logger.info(f"Generated {count} programs with n in {dimension}, m in {conditions}")
        return programs


def resolve_ranges(
    preset: Optional[str], dimension: Optional[Tuple[int, int]], conditions: Optional[Tuple[int, int]]
) -> Tuple[Tuple[int, int], Tuple[int, int]]:
    """Explicit ranges win over the preset; the small preset is the default."""
    base = PRESETS[preset or "small"]
    return dimension or base["dimension"], conditions or base["conditions"]

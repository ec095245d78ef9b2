"""
Pytest configuration for the linear loop ANT analyzer.
Defines loop program fixtures taken from worked examples and helpers for building expected sets.
"""

import os
import sys
from typing import Callable, List, Sequence, Tuple

import pytest
from sympy import ImmutableMatrix, Rational

# Add src directory to Python path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

# Import modules after modifying the Python path
# flake8: noqa: E402

from src.models.loop_models import LoopProgram
from src.models.semilinear_models import Relation, SemiLinearSet
from src.models.spectral_models import SpectralData
from src.services.frontend_service import parse
from src.services.semilinear_service import linear_atom, make_cell, make_set
from src.services.spectral_service import spectral_data_from_jordan
from src.util.exact_arith import block_diagonal, inverse, qmatrix, row_vector

EXAMPLE_ONE_SOURCE = """
while (x - 1/2*y - 2*z > 0) {
  x := -20*x - 9*y + 75*z;
  y := -7/20*x + 97/20*y + 21/4*z;
  z := 35/97*x + 3/97*y - 40/97*z;
}
"""

ROTATION_SOURCE = """
while (x - 1/2*y - 2*z > 0) {
  x := -20*x - 9*y + 75*z;
  y := -7/20*x + 97/20*y + 21/4*z;
  z := 35/97*x + 3/97*y - 40/97*z;
  t := t - s;
  s := t + 2*s;
}
"""

COOK_SOURCE = """
while (-x > -2^(30)) {
  x := 2*x;
  y := y + 1;
}
"""

CASCADE_SOURCE = """
while (x > 0) {
  x := x + y;
  y := y + z;
}
"""

HALF_SOURCE = """
while (x > 0 && 1 > x) {
  x := 2*x - 1/2;
}
"""

# Columns are a change of basis R with R⁻¹·A·R = diag([1], [0], 1·T2, -1·T2, [2], [-2])
REDUCTION_BASIS = [
    [1, 0, 0, 0, 0, 0, 0, 0],
    [2, 1, 0, 0, 0, 0, 0, 0],
    [3, 3, 1, 0, 0, 0, 0, 0],
    [4, 5, 2, 1, 0, 0, 0, 0],
    [6, 5, 3, 2, 1, 0, 0, 0],
    [4, 2, 5, 2, 1, 1, 0, 0],
    [3, 8, 8, 2, 1, 2, 1, 0],
    [2, 0, 0, 1, 1, 1, 1, 1],
]
REDUCTION_GUARD = [-1, -2, 1, 0, 0, 0, 0, 1]

DIAGONAL_MATRIX = [
    [26, 2, -15, -6, 30],
    [24, 3, -12, -6, 48],
    [32, 0, -9, 2, 66],
    [-12, 1, 6, 8, -24],
    [-4, -1, 3, 0, 0],
]
DIAGONAL_GUARD = [-2, 0, -1, 0, Rational(-1, 2)]

AtomSpec = Tuple[Sequence, Relation]  # optionally followed by a constant offset


@pytest.fixture
def example_one() -> LoopProgram:
    """Homogeneous loop with eigenvalues 1, 5 and 8."""
    return parse(EXAMPLE_ONE_SOURCE, name="example_one")


@pytest.fixture
def rotation_loop() -> LoopProgram:
    """The example_one loop with an extra rotation-like block on (t, s) that the guard does not read."""
    return parse(ROTATION_SOURCE, name="rotation")


@pytest.fixture
def cook_loop() -> LoopProgram:
    """Affine loop doubling x until it exceeds 2^30."""
    return parse(COOK_SOURCE, name="cook")


@pytest.fixture
def cascade_loop() -> LoopProgram:
    """Loop whose update is a single unipotent Jordan block of size 3."""
    return parse(CASCADE_SOURCE, name="cascade")


@pytest.fixture
def half_loop() -> LoopProgram:
    """Affine loop whose only ANT point is x = 1/2."""
    return parse(HALF_SOURCE, name="half")


@pytest.fixture
def mirrored_pair() -> SpectralData:
    """Regular pair with blocks 1·T2, -1·T2, [2] and [-2] and an all-ones guard."""
    T = block_diagonal(
        [
            qmatrix([[1, 1], [0, 1]]),
            qmatrix([[-1, -1], [0, -1]]),
            qmatrix([[2]]),
            qmatrix([[-2]]),
        ]
    )
    return spectral_data_from_jordan(T, row_vector([1] * 6))


@pytest.fixture
def reduction_basis() -> ImmutableMatrix:
    return qmatrix(REDUCTION_BASIS)


@pytest.fixture
def reduction_matrix(reduction_basis) -> ImmutableMatrix:
    """8×8 matrix with a guard-invisible direction, a zero eigenvalue and the mirrored pair as regular part."""
    B = block_diagonal(
        [
            qmatrix([[1]]),
            qmatrix([[0]]),
            qmatrix([[1, 1], [0, 1]]),
            qmatrix([[-1, -1], [0, -1]]),
            qmatrix([[2]]),
            qmatrix([[-2]]),
        ]
    )
    return ImmutableMatrix(reduction_basis * B * inverse(reduction_basis))


@pytest.fixture
def reduction_guard() -> ImmutableMatrix:
    return row_vector(REDUCTION_GUARD)


@pytest.fixture
def diagonal_matrix() -> ImmutableMatrix:
    """Diagonalizable 5×5 matrix with spectrum 2, 5, 6, 6, 9."""
    return qmatrix(DIAGONAL_MATRIX)


@pytest.fixture
def diagonal_guard() -> ImmutableMatrix:
    return row_vector(DIAGONAL_GUARD)


@pytest.fixture
def build_set() -> Callable[..., SemiLinearSet]:
    """Factory building a set from cells given as lists of (coefficients, relation[, offset]) tuples."""

    def build(dimension: int, cells: List[List[AtomSpec]]) -> SemiLinearSet:
        built = [make_cell(linear_atom(*spec) for spec in cell) for cell in cells]
        return make_set(built, dimension)

    return build

"""
Semi-linear set service for the linear loop ANT analyzer.
Provides construction, membership, set algebra, coordinate changes and exact emptiness checks.
"""

import logging
from functools import lru_cache
from typing import Iterable, List, Optional, Sequence, Tuple, Union

from sympy import Matrix, Rational, igcd

from src.config import settings
from src.models.semilinear_models import Atom, Cell, IntegerFeasibility, IntegerStatus, Relation, SemiLinearSet
from src.util.errors import DimensionMismatchError
from src.util.exact_arith import common_denominator, hermite_normal_form, inverse
from src.util.fourier_motzkin import Constraint, ceil_rational, feasible_point, integer_point

logger = logging.getLogger(__name__)

AtomOrConstant = Union[Atom, bool]


def default_names(dimension: int, prefix: str = "u") -> Tuple[str, ...]:
    """Coordinate labels u1..un."""
    return tuple(f"{prefix}{i + 1}" for i in range(dimension))


def make_atom(coeffs: Sequence, offset, relation: Relation) -> AtomOrConstant:
    """
    Build a normalized atom.

    Coefficients and offset are scaled to coprime integers. Equalities are additionally made to have a positive first
    nonzero coefficient; inequalities are only ever scaled by positive factors.

    Args:
        coeffs: Coefficients of the affine form
        offset: Constant term
        relation: EQ or GT

    Returns:
        The atom, or True/False when the form is constant
    """
    values = [Rational(c) for c in coeffs]
    constant = Rational(offset)
    if all(v == 0 for v in values):
        return bool(constant == 0) if relation == Relation.EQ else bool(constant > 0)

    data = values + [constant]
    denominator = common_denominator(data)
    integers = [int(v * denominator) for v in data]
    divisor = 0
    for v in integers:
        divisor = igcd(divisor, v)
    if relation == Relation.EQ and next(v for v in integers if v != 0) < 0:
        divisor = -divisor
    scaled = [Rational(v, divisor) for v in integers]
    return Atom(coeffs=tuple(scaled[:-1]), offset=scaled[-1], relation=relation)


def negate_form(atom: Atom) -> Tuple[Tuple[Rational, ...], Rational]:
    return tuple(-c for c in atom.coeffs), -atom.offset


def _atom_key(atom: Atom):
    return (atom.relation.value, atom.coeffs, atom.offset)


def make_cell(atoms: Iterable[AtomOrConstant], label: Optional[str] = None) -> Optional[Cell]:
    """
    Build a cell from atoms and constants.

    Returns:
        The cell, or None when a constant false atom or a directly contradictory pair is present
    """
    unique = {}
    for atom in atoms:
        if atom is True:
            continue
        if atom is False:
            return None
        unique[_atom_key(atom)] = atom
    for atom in unique.values():
        if atom.relation == Relation.GT:
            coeffs, offset = negate_form(atom)
            # l > 0 together with -l > 0, or with l = 0
            if ("gt", coeffs, offset) in unique:
                return None
            eq = make_atom(atom.coeffs, atom.offset, Relation.EQ)
            if isinstance(eq, Atom) and _atom_key(eq) in unique:
                return None
    return Cell(atoms=tuple(unique[k] for k in sorted(unique, key=_sort_key)), label=label)


def _sort_key(key):
    relation, coeffs, offset = key
    return (relation, tuple(-abs(c) for c in coeffs), tuple(coeffs), offset)


def make_set(
    cells: Iterable[Optional[Cell]], dimension: int, variable_names: Optional[Sequence[str]] = None
) -> SemiLinearSet:
    """Build a set from cells, dropping None and duplicated cells."""
    seen = set()
    kept: List[Cell] = []
    for cell in cells:
        if cell is None:
            continue
        if any(atom.dimension != dimension for atom in cell.atoms):
            raise DimensionMismatchError(f"Cell atoms do not live in dimension {dimension}")
        if cell.atoms in seen:
            continue
        seen.add(cell.atoms)
        kept.append(cell)
    names = tuple(variable_names) if variable_names is not None else default_names(dimension)
    return SemiLinearSet(cells=tuple(kept), dimension=dimension, variable_names=names)


def empty_set(dimension: int, variable_names: Optional[Sequence[str]] = None) -> SemiLinearSet:
    return make_set([], dimension, variable_names)


def full_space(dimension: int, variable_names: Optional[Sequence[str]] = None) -> SemiLinearSet:
    return make_set([Cell(atoms=())], dimension, variable_names)


def _check_dimension(expected: int, actual: int) -> None:
    if expected != actual:
        raise DimensionMismatchError(f"Dimension mismatch: expected {expected}, got {actual}")


def membership(s: SemiLinearSet, point: Sequence) -> bool:
    """
    Whether a point belongs to the set.

    Raises:
        DimensionMismatchError: If the point has the wrong dimension
    """
    _check_dimension(s.dimension, len(point))
    values = [Rational(v) for v in point]
    return any(cell.holds(values) for cell in s.cells)


def pullback(s: SemiLinearSet, L: Matrix, variable_names: Optional[Sequence[str]] = None) -> SemiLinearSet:
    """
    Preimage {y : L·y ∈ s} of a set under a linear map.

    Args:
        s: Set in dimension L.rows
        L: Rational matrix with s.dimension rows
        variable_names: Labels of the new coordinates

    Returns:
        Set in dimension L.cols
    """
    _check_dimension(s.dimension, L.rows)
    n = L.cols
    rows = [[Rational(L[i, j]) for j in range(n)] for i in range(L.rows)]

    def pull(atom: Atom) -> AtomOrConstant:
        coeffs = [
            sum((atom.coeffs[i] * rows[i][j] for i in range(L.rows) if atom.coeffs[i] != 0), Rational(0))
            for j in range(n)
        ]
        return make_atom(coeffs, atom.offset, atom.relation)

    cells = [make_cell((pull(atom) for atom in cell.atoms), cell.label) for cell in s.cells]
    return make_set(cells, n, variable_names)


def transform(s: SemiLinearSet, M: Matrix) -> SemiLinearSet:
    """
    Image {M·x : x ∈ s} of a set under an invertible matrix.

    Raises:
        SingularMatrixError: If M is singular
    """
    _check_dimension(s.dimension, M.cols)
    return pullback(s, inverse(M), s.variable_names)


def slice_last_coordinate(s: SemiLinearSet, variable_names: Optional[Sequence[str]] = None) -> SemiLinearSet:
    """Substitute 1 for the last coordinate; the result lives in dimension n-1."""
    if s.dimension < 2:
        raise DimensionMismatchError("Slicing needs an ambient dimension of at least 2")

    def cut(atom: Atom) -> AtomOrConstant:
        return make_atom(atom.coeffs[:-1], atom.offset + atom.coeffs[-1], atom.relation)

    cells = [make_cell((cut(atom) for atom in cell.atoms), cell.label) for cell in s.cells]
    names = variable_names if variable_names is not None else s.variable_names[:-1]
    return make_set(cells, s.dimension - 1, names)


def conjoin(a: Cell, b: Cell) -> Optional[Cell]:
    label = a.label if a.label == b.label else None
    return make_cell(a.atoms + b.atoms, label)


def intersect(a: SemiLinearSet, b: SemiLinearSet) -> SemiLinearSet:
    """Pairwise conjunction of cells; cells empty over the reals are dropped."""
    _check_dimension(a.dimension, b.dimension)
    cells = []
    for left in a.cells:
        for right in b.cells:
            cell = conjoin(left, right)
            if cell is not None and not cell_is_empty(cell, a.dimension):
                cells.append(cell)
    return make_set(cells, a.dimension, a.variable_names)


def union(a: SemiLinearSet, b: SemiLinearSet) -> SemiLinearSet:
    _check_dimension(a.dimension, b.dimension)
    return make_set(a.cells + b.cells, a.dimension, a.variable_names)


def _negated_atoms(atom: Atom) -> List[AtomOrConstant]:
    coeffs, offset = negate_form(atom)
    if atom.relation == Relation.EQ:
        return [make_atom(atom.coeffs, atom.offset, Relation.GT), make_atom(coeffs, offset, Relation.GT)]
    return [make_atom(atom.coeffs, atom.offset, Relation.EQ), make_atom(coeffs, offset, Relation.GT)]


def _cell_negation(cell: Cell) -> List[List[AtomOrConstant]]:
    """Disjoint decomposition of the negation of a cell: not a1, a1 and not a2, a1 and a2 and not a3, ..."""
    pieces: List[List[AtomOrConstant]] = []
    prefix: List[AtomOrConstant] = []
    for atom in cell.atoms:
        for negated in _negated_atoms(atom):
            pieces.append(prefix + [negated])
        prefix = prefix + [atom]
    return pieces


def difference(a: SemiLinearSet, b: SemiLinearSet) -> SemiLinearSet:
    """
    Set difference a minus b, computed cell by cell with pruning of empty pieces.

    Args:
        a: Minuend
        b: Subtrahend in the same dimension

    Returns:
        Set whose cells are pairwise disjoint pieces of a outside b
    """
    _check_dimension(a.dimension, b.dimension)
    result: List[Cell] = []
    for start in a.cells:
        pieces: List[Cell] = [start]
        for removed in b.cells:
            next_pieces: List[Cell] = []
            for piece in pieces:
                for negation in _cell_negation(removed):
                    cell = make_cell(list(piece.atoms) + negation, piece.label)
                    if cell is not None and not cell_is_empty(cell, a.dimension):
                        next_pieces.append(cell)
            pieces = next_pieces
            if not pieces:
                break
        result.extend(pieces)
    return make_set(result, a.dimension, a.variable_names)


def complement(s: SemiLinearSet) -> SemiLinearSet:
    """Complement by De Morgan expansion; empty pieces are pruned."""
    return difference(full_space(s.dimension, s.variable_names), s)


def _equality_parametrization(cell: Cell, dimension: int) -> Optional[Tuple[List[Rational], List[List[Rational]]]]:
    """
    Solve the equalities of a cell over the rationals.

    Returns:
        (x0, N) with every solution x = x0 + N·t, N given as columns; None when the equalities are inconsistent
    """
    equalities = cell.equalities
    identity_columns = [[Rational(int(i == j)) for i in range(dimension)] for j in range(dimension)]
    if not equalities:
        return [Rational(0)] * dimension, identity_columns
    augmented = Matrix([list(atom.coeffs) + [-atom.offset] for atom in equalities])
    reduced, pivots = augmented.rref()
    if dimension in pivots:
        return None
    x0 = [Rational(0)] * dimension
    for row, pivot in enumerate(pivots):
        x0[pivot] = Rational(reduced[row, dimension])
    columns = []
    for free in (j for j in range(dimension) if j not in pivots):
        column = [Rational(0)] * dimension
        column[free] = Rational(1)
        for row, pivot in enumerate(pivots):
            column[pivot] = -Rational(reduced[row, free])
        columns.append(column)
    return x0, columns


def _substitute(atom: Atom, x0: Sequence[Rational], columns: Sequence[Sequence[Rational]]) -> Constraint:
    coeffs = tuple(sum((c * v for c, v in zip(atom.coeffs, column) if c != 0), Rational(0)) for column in columns)
    const = atom.offset + sum((c * v for c, v in zip(atom.coeffs, x0) if c != 0), Rational(0))
    return coeffs, const, True


@lru_cache(maxsize=65536)
def _cell_witness(cell: Cell, dimension: int) -> Optional[Tuple[Rational, ...]]:
    parametrization = _equality_parametrization(cell, dimension)
    if parametrization is None:
        return None
    x0, columns = parametrization
    constraints = [_substitute(atom, x0, columns) for atom in cell.inequalities]
    t = feasible_point(constraints, len(columns))
    if t is None:
        return None
    point = [x0[i] + sum((column[i] * t[j] for j, column in enumerate(columns)), Rational(0)) for i in range(dimension)]
    return tuple(point)


def cell_witness(cell: Cell, dimension: int) -> Optional[Tuple[Rational, ...]]:
    """A rational point of the cell, or None if the cell is empty over the reals."""
    return _cell_witness(cell, dimension)


def cell_is_empty(cell: Cell, dimension: int) -> bool:
    return _cell_witness(cell, dimension) is None


def real_witness(s: SemiLinearSet) -> Optional[Tuple[Rational, ...]]:
    """A rational member of the set from the first non-empty cell, or None if the set is empty."""
    for cell in s.cells:
        point = _cell_witness(cell, s.dimension)
        if point is not None:
            return point
    return None


def is_empty_real(s: SemiLinearSet) -> bool:
    """Exact emptiness over the reals: equalities substituted out, then Fourier-Motzkin with strictness."""
    return real_witness(s) is None


def rational_witness(s: SemiLinearSet) -> Optional[Tuple[Rational, ...]]:
    """
    A rational member of the set.

    Cells are relatively open polyhedra of rational affine subspaces, so they are non-empty over the rationals exactly
    when they are non-empty over the reals, and back-substitution already yields rational points.
    """
    return real_witness(s)


def is_empty_rational(s: SemiLinearSet) -> bool:
    return rational_witness(s) is None


def _integer_parametrization(
    cell: Cell, dimension: int
) -> Optional[Tuple[List[int], List[List[int]]]]:
    """
    Solve the equalities of a cell over the integers through the Hermite normal form of the transposed system.

    Returns:
        (x0, N) with every integer solution x = x0 + N·t for integer t; None when there is no integer solution
    """
    equalities = cell.equalities
    identity_columns = [[int(i == j) for i in range(dimension)] for j in range(dimension)]
    if not equalities:
        return [0] * dimension, identity_columns

    rows = []
    rhs = []
    for atom in equalities:
        scale = common_denominator(list(atom.coeffs) + [atom.offset])
        rows.append([int(c * scale) for c in atom.coeffs])
        rhs.append(int(-atom.offset * scale))

    # H = U·E^T, so E·U^T = H^T and x = U^T·z turns E·x = e into H^T·z = e
    H, U = hermite_normal_form(Matrix(rows).T)
    r = len(rows)
    pivots = []
    for i in range(dimension):
        nonzero = [j for j in range(r) if H[i, j] != 0]
        if not nonzero:
            break
        pivots.append(nonzero[0])

    z = [0] * dimension
    for i, column in enumerate(pivots):
        residual = rhs[column] - sum(int(H[k, column]) * z[k] for k in range(i))
        pivot = int(H[i, column])
        if residual % pivot != 0:
            return None
        z[i] = residual // pivot
    for column in range(r):
        if sum(int(H[k, column]) * z[k] for k in range(len(pivots))) != rhs[column]:
            return None

    transposed = [[int(U[j, i]) for j in range(dimension)] for i in range(dimension)]
    x0 = [sum(transposed[i][k] * z[k] for k in range(len(pivots))) for i in range(dimension)]
    columns = [[transposed[i][k] for i in range(dimension)] for k in range(len(pivots), dimension)]
    return x0, columns


def _integer_constraint(atom: Atom, x0: Sequence[int], columns: Sequence[Sequence[int]]):
    """Turn coeffs·x + offset > 0 over the lattice into a tightened non-strict integer constraint, or a constant."""
    coeffs, const, _ = _substitute(atom, [Rational(v) for v in x0], [[Rational(v) for v in c] for c in columns])
    scale = common_denominator(list(coeffs) + [const])
    integers = [int(c * scale) for c in coeffs]
    constant = int(const * scale)
    divisor = 0
    for c in integers:
        divisor = igcd(divisor, c)
    if divisor == 0:
        return constant > 0
    # sum c·t > -constant  <=>  sum (c/g)·t >= ceil((1 - constant) / g)
    bound = ceil_rational(Rational(1 - constant, divisor))
    return tuple(Rational(c // divisor) for c in integers), Rational(-bound), False


def _cell_integer_point(cell: Cell, dimension: int, budget: int) -> IntegerFeasibility:
    rational = _cell_witness(cell, dimension)
    if rational is None:
        return IntegerFeasibility(status=IntegerStatus.EMPTY)
    if all(atom.offset == 0 for atom in cell.atoms):
        # homogeneous cells are cones, so a positive multiple of a rational member is an integer member
        scale = common_denominator(rational)
        return IntegerFeasibility(status=IntegerStatus.NON_EMPTY, witness=tuple(Rational(v * scale) for v in rational))

    parametrization = _integer_parametrization(cell, dimension)
    if parametrization is None:
        return IntegerFeasibility(status=IntegerStatus.EMPTY)
    x0, columns = parametrization
    constraints = []
    for atom in cell.inequalities:
        constraint = _integer_constraint(atom, x0, columns)
        if constraint is False:
            return IntegerFeasibility(status=IntegerStatus.EMPTY)
        if constraint is not True:
            constraints.append(constraint)
    t, exhausted, nodes = integer_point(constraints, len(columns), budget)
    if t is None:
        status = IntegerStatus.UNKNOWN if exhausted else IntegerStatus.EMPTY
        return IntegerFeasibility(status=status, nodes=nodes)
    point = tuple(
        Rational(x0[i] + sum(column[i] * int(t[j]) for j, column in enumerate(columns))) for i in range(dimension)
    )
    return IntegerFeasibility(status=IntegerStatus.NON_EMPTY, witness=point, nodes=nodes)


def is_empty_integer(s: SemiLinearSet, budget: Optional[int] = None) -> IntegerFeasibility:
    """
    Budgeted emptiness over the integer lattice.

    Args:
        s: Set to check
        budget: Branch-and-bound nodes allowed per cell, defaults to settings.INT_BUDGET

    Returns:
        EMPTY, NON_EMPTY with an integer witness, or UNKNOWN when some cell exhausted its budget and none has a member
    """
    budget = budget if budget is not None else settings.INT_BUDGET
    unknown = False
    nodes = 0
    for cell in s.cells:
        result = _cell_integer_point(cell, s.dimension, budget)
        nodes += result.nodes
        if result.status == IntegerStatus.NON_EMPTY:
            logger.debug(f"Integer member found after {nodes} nodes")
            return IntegerFeasibility(status=IntegerStatus.NON_EMPTY, witness=result.witness, nodes=nodes)
        if result.status == IntegerStatus.UNKNOWN:
            unknown = True
    if unknown:
        logger.warning(f"Integer emptiness undecided within a budget of {budget} nodes per cell")
        return IntegerFeasibility(status=IntegerStatus.UNKNOWN, nodes=nodes)
    return IntegerFeasibility(status=IntegerStatus.EMPTY, nodes=nodes)


def is_subset(a: SemiLinearSet, b: SemiLinearSet) -> bool:
    return is_empty_real(difference(a, b))


def set_equivalent(a: SemiLinearSet, b: SemiLinearSet) -> bool:
    """Whether two sets are equal over the reals, via emptiness of both differences."""
    _check_dimension(a.dimension, b.dimension)
    return is_subset(a, b) and is_subset(b, a)


def linear_atom(coeffs: Sequence, relation: Relation, offset=0) -> AtomOrConstant:
    """Shorthand used by formula builders."""
    return make_atom(coeffs, offset, relation)

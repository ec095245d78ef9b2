"""
Exact rational arithmetic for the linear loop ANT analyzer.
Provides characteristic polynomials, rational roots, kernels, Hermite normal forms and binomial polynomials.
"""

import logging
from typing import Iterable, List, Sequence, Tuple, Union

from sympy import QQ, ImmutableMatrix, Integer, Matrix, Poly, Rational, Symbol
from sympy import binomial as sympy_binomial
from sympy import divisors, eye, factorial, ff, ilcm, sqf_list, sturm

try:
    from sympy.core.intfunc import igcdex
except ImportError:  # sympy < 1.13
    from sympy.core.numbers import igcdex

from src.util.errors import DimensionMismatchError, SingularMatrixError

logger = logging.getLogger(__name__)

# Indeterminate of characteristic polynomials
T = Symbol("T")

# Iteration count used in the symbolic powers of unipotent blocks
K = Symbol("k")

QMatrix = ImmutableMatrix

Scalar = Union[int, str, Rational]


def to_rational(value: Scalar) -> Rational:
    """
    Convert an integer, a sympy number or a string such as "3/4", "-2" or "0.5" to an exact Rational.

    Args:
        value: Value to convert

    Returns:
        Exact rational value

    Raises:
        ValueError: If the value is not an exact rational number
    """
    if isinstance(value, float):
        raise ValueError(f"Floating point value {value!r} is not exact; use a fraction string")
    try:
        result = Rational(value)
    except (TypeError, ValueError) as e:
        raise ValueError(f"Not a rational number: {value!r}") from e
    if not result.is_Rational:
        raise ValueError(f"Not a rational number: {value!r}")
    return result


def qmatrix(rows: Sequence[Sequence[Scalar]], cols: int = 0) -> QMatrix:
    """
    Build an immutable rational matrix from nested rows.

    Args:
        rows: Row-major entries
        cols: Column count, only needed when there are no rows

    Returns:
        Immutable matrix with Rational entries
    """
    if not rows:
        return ImmutableMatrix.zeros(0, cols)
    width = len(rows[0])
    if any(len(row) != width for row in rows):
        raise DimensionMismatchError("All matrix rows must have the same length")
    return ImmutableMatrix([[to_rational(v) for v in row] for row in rows])


def row_vector(values: Iterable[Scalar]) -> QMatrix:
    """Build a 1×n rational row vector."""
    items = [to_rational(v) for v in values]
    return ImmutableMatrix(1, len(items), items)


def column_vector(values: Iterable[Scalar]) -> QMatrix:
    """Build an n×1 rational column vector."""
    items = [to_rational(v) for v in values]
    return ImmutableMatrix(len(items), 1, items)


def entries(vector: Matrix) -> Tuple[Rational, ...]:
    """Return the entries of a row or column vector as a tuple of Rationals."""
    return tuple(Rational(v) for v in vector)


def identity(n: int) -> QMatrix:
    return ImmutableMatrix(eye(n))


def inverse(M: Matrix) -> QMatrix:
    """
    Exact inverse of a square rational matrix.

    Raises:
        SingularMatrixError: If the matrix is singular
    """
    if not M.is_square:
        raise DimensionMismatchError(f"Cannot invert a {M.rows}x{M.cols} matrix")
    if M.rows == 0:
        return ImmutableMatrix.zeros(0, 0)
    if M.det() == 0:
        raise SingularMatrixError("Matrix is singular")
    return ImmutableMatrix(Matrix(M).inv())


def char_poly(A: Matrix) -> Poly:
    """
    Characteristic polynomial det(A - T*I) of a square matrix.

    Args:
        A: Square rational matrix

    Returns:
        Polynomial of degree n in T over QQ

    Raises:
        DimensionMismatchError: If A is not square
    """
    if not A.is_square:
        raise DimensionMismatchError(f"Characteristic polynomial needs a square matrix, got {A.rows}x{A.cols}")
    n = A.rows
    if n == 0:
        return Poly(1, T, domain=QQ)
    # charpoly() is det(T*I - A); the sign flip gives det(A - T*I)
    return Poly((-1) ** n * Matrix(A).charpoly(T).as_expr(), T, domain=QQ)


def _squarefree_rational_roots(factor: Poly) -> List[Rational]:
    """Rational roots of a square-free polynomial by the rational root test."""
    if factor.degree() <= 0:
        return []
    _, integral = factor.clear_denoms(convert=True)
    _, primitive = integral.primitive()
    coeffs = [int(c) for c in primitive.all_coeffs()]

    roots: List[Rational] = []
    if coeffs[-1] == 0:
        roots.append(Rational(0))
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
    if len(coeffs) <= 1:
        return roots

    candidates = set()
    for p in divisors(abs(coeffs[-1])):
        for q in divisors(abs(coeffs[0])):
            candidates.add(Rational(p, q))
            candidates.add(Rational(-p, q))
    for candidate in sorted(candidates):
        if factor.eval(candidate) == 0:
            roots.append(candidate)
    return roots


def rational_roots(p: Poly) -> List[Tuple[Rational, int]]:
    """
    All rational roots of a nonzero polynomial with their exact multiplicities.

    Uses the square-free decomposition, then the rational root test on each integer-scaled factor.

    Args:
        p: Nonzero polynomial over QQ

    Returns:
        List of (root, multiplicity) sorted by root
    """
    if p.is_zero:
        raise ValueError("The zero polynomial has no finite root set")
    found = {}
    _, factors = sqf_list(p)
    for factor, multiplicity in factors:
        for root in _squarefree_rational_roots(Poly(factor, T, domain=QQ)):
            found[root] = found.get(root, 0) + multiplicity
    return sorted(found.items())


def rational_root_cofactor(p: Poly) -> Poly:
    """Divide out every rational root of p, with multiplicity."""
    cofactor = Poly(p, T, domain=QQ)
    for root, multiplicity in rational_roots(p):
        cofactor = cofactor.quo(Poly(T - root, T, domain=QQ) ** multiplicity)
    return cofactor


def count_real_roots(p: Poly) -> int:
    """Number of distinct real roots of p, by sign changes of its Sturm sequence at -oo and +oo."""
    if p.degree() <= 0:
        return 0
    sequence = sturm(p)

    def sign_changes(signs: List[int]) -> int:
        nonzero = [s for s in signs if s != 0]
        return sum(1 for a, b in zip(nonzero, nonzero[1:]) if a != b)

    # Sturm sequence members are nonzero, so the leading coefficient has a strict sign.
    at_plus = [1 if q.LC() > 0 else -1 for q in sequence]
    at_minus = [s * (-1) ** q.degree() for s, q in zip(at_plus, sequence)]
    return sign_changes(at_minus) - sign_changes(at_plus)


def has_irrational_real_root(p: Poly) -> bool:
    """
    True iff p has a real root that is not rational.

    Args:
        p: Nonzero polynomial over QQ

    Returns:
        Whether the cofactor left after removing the rational roots still has a real root
    """
    if p.is_zero:
        raise ValueError("The zero polynomial has no finite root set")
    return count_real_roots(rational_root_cofactor(p)) > 0


def poly_at_matrix(p: Poly, A: Matrix) -> QMatrix:
    """Evaluate a polynomial at a square matrix by Horner's rule."""
    n = A.rows
    result = Matrix.zeros(n, n)
    for coeff in Poly(p, T, domain=QQ).all_coeffs():
        result = result * A + Rational(coeff) * eye(n)
    return ImmutableMatrix(result)


def kernel_basis(M: Matrix) -> List[QMatrix]:
    """
    Exact basis of the null space of M.

    The basis is canonical: the vectors are the rows of the reduced echelon form of any spanning family,
    so each vector has a leading 1 where all the others vanish.

    Args:
        M: Rational matrix

    Returns:
        List of column vectors, empty for a trivial kernel
    """
    if M.rows == 0:
        return [ImmutableMatrix(eye(M.cols)[:, i]) for i in range(M.cols)]
    vectors = Matrix(M).nullspace()
    if not vectors:
        return []
    return canonical_basis(vectors)


def canonical_basis(vectors: Sequence[Matrix]) -> List[QMatrix]:
    """Reduced echelon basis of the span of column vectors; drops dependent vectors."""
    if not vectors:
        return []
    echelon, pivots = Matrix.hstack(*vectors).T.rref()
    return [ImmutableMatrix(echelon.row(i).T) for i in range(len(pivots))]


def rank(M: Matrix) -> int:
    if M.rows == 0 or M.cols == 0:
        return 0
    return Matrix(M).rank()


def complete_basis(vectors: Sequence[Matrix], n: int) -> List[QMatrix]:
    """
    Complete independent columns to a basis of Q^n with standard vectors, lowest index first.

    Args:
        vectors: Linearly independent column vectors
        n: Ambient dimension

    Returns:
        The added standard vectors
    """
    current = [Matrix(v) for v in vectors]
    added: List[QMatrix] = []
    for i in range(n):
        if len(current) == n:
            break
        candidate = eye(n)[:, i]
        if rank(Matrix.hstack(*current, candidate)) > len(current):
            current.append(candidate)
            added.append(ImmutableMatrix(candidate))
    return added


def _as_int(value) -> int:
    number = Rational(value)
    if number.q != 1:
        raise ValueError(f"Hermite normal form needs integer entries, got {number}")
    return int(number.p)


def hermite_normal_form(M: Matrix) -> Tuple[QMatrix, QMatrix]:
    """
    Row-style Hermite normal form of an integer matrix.

    Args:
        M: Matrix with integer entries

    Returns:
        Tuple (H, U) with H = U*M in row echelon form, positive pivots, entries above each pivot
        reduced into [0, pivot), and U unimodular
    """
    rows, cols = M.shape
    H = [[_as_int(M[i, j]) for j in range(cols)] for i in range(rows)]
    U = [[int(i == j) for j in range(rows)] for i in range(rows)]

    def combine(i: int, k: int, a: int, b: int, c: int, d: int) -> None:
        # rows (i, k) <- [[a, b], [c, d]] * rows (i, k)
        for table in (H, U):
            row_i, row_k = table[i], table[k]
            table[i] = [a * x + b * y for x, y in zip(row_i, row_k)]
            table[k] = [c * x + d * y for x, y in zip(row_i, row_k)]

    pivot_row = 0
    for col in range(cols):
        if pivot_row >= rows:
            break
        for i in range(pivot_row + 1, rows):
            b = H[i][col]
            if b == 0:
                continue
            a = H[pivot_row][col]
            x, y, g = igcdex(a, b)
            combine(pivot_row, i, int(x), int(y), -b // int(g), a // int(g))
        pivot = H[pivot_row][col]
        if pivot == 0:
            continue
        if pivot < 0:
            H[pivot_row] = [-v for v in H[pivot_row]]
            U[pivot_row] = [-v for v in U[pivot_row]]
            pivot = -pivot
        for r in range(pivot_row):
            q = H[r][col] // pivot
            if q:
                H[r] = [v - q * w for v, w in zip(H[r], H[pivot_row])]
                U[r] = [v - q * w for v, w in zip(U[r], U[pivot_row])]
        pivot_row += 1

    return ImmutableMatrix(rows, cols, [Integer(v) for row in H for v in row]), ImmutableMatrix(
        rows, rows, [Integer(v) for row in U for v in row]
    )


def common_denominator(values: Iterable[Rational]) -> int:
    """Least common multiple of the denominators of the given rationals."""
    result = 1
    for value in values:
        result = ilcm(result, int(Rational(value).q))
    return result


def binomial(k: Union[int, Symbol], j: int) -> Union[Rational, Poly]:
    """
    Binomial coefficient C(k, j) as a number for integer k, or as a polynomial of degree j in a symbolic k.

    Args:
        k: Integer or symbol
        j: Lower index, j >= 0

    Returns:
        Rational for integer k, Poly over QQ otherwise
    """
    if j < 0:
        raise ValueError(f"Binomial lower index must be non-negative, got {j}")
    if isinstance(k, (int, Integer)):
        return Rational(sympy_binomial(k, j))
    return Poly(ff(k, j) / factorial(j), k, domain=QQ)


def unipotent_power(size: int, k: int) -> QMatrix:
    """
    k-th power of the size×size unit upper bidiagonal matrix: entry (i, j) is C(k, j - i).

    Args:
        size: Block size
        k: Exponent, k >= 0

    Returns:
        The power as an exact matrix
    """
    return ImmutableMatrix(size, size, lambda i, j: binomial(k, j - i) if j >= i else 0)


def unipotent_block(size: int) -> QMatrix:
    """The size×size unit upper bidiagonal matrix."""
    return ImmutableMatrix(size, size, lambda i, j: 1 if j in (i, i + 1) else 0)


def block_diagonal(blocks: Sequence[Matrix]) -> QMatrix:
    """Block diagonal matrix assembled from square blocks."""
    n = sum(b.rows for b in blocks)
    result = Matrix.zeros(n, n)
    offset = 0
    for block in blocks:
        result[offset : offset + block.rows, offset : offset + block.cols] = block
        offset += block.rows
    return ImmutableMatrix(result)

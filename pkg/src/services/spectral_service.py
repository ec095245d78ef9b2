"""
Spectral service for the linear loop ANT analyzer.
Restricts update maps to their real-spectrum subspace, removes the part invisible to a guard row and builds
modified Jordan bases together with the φ-forms consumed by the ANT formulas.
"""

import logging
from typing import Dict, List, Optional, Sequence, Tuple

from sympy import QQ, ImmutableMatrix, Matrix, Poly, Rational, eye

from src.models.spectral_models import (
    JordanBlock,
    PhiForms,
    RealRestriction,
    ReductionTrace,
    RegularPair,
    SpectralData,
)
from src.util.errors import DimensionMismatchError, IrrationalSpectrumError, RegularityError
from src.util.exact_arith import (
    K,
    T,
    binomial,
    block_diagonal,
    char_poly,
    complete_basis,
    count_real_roots,
    entries,
    identity,
    inverse,
    kernel_basis,
    poly_at_matrix,
    rank,
    rational_root_cofactor,
    rational_roots,
    unipotent_block,
)

logger = logging.getLogger(__name__)


def _columns(vectors: Sequence[Matrix], n: int) -> ImmutableMatrix:
    if not vectors:
        return ImmutableMatrix.zeros(n, 0)
    return ImmutableMatrix(Matrix.hstack(*vectors))


def _irrational_factor(cofactor: Poly) -> str:
    """The first irreducible factor of a polynomial that has a real root."""
    _, factors = cofactor.factor_list()
    for factor, _ in factors:
        if count_real_roots(Poly(factor, T, domain=QQ)) > 0:
            return str(factor.as_expr())
    return str(cofactor.as_expr())


def real_spectrum_restriction(A: Matrix, F: Matrix) -> RealRestriction:
    """
    Restrict an update matrix and its guard rows to E^r, the sum of the generalized eigenspaces of real eigenvalues.

    When the whole spectrum is rational the restriction is the identity embedding.

    Args:
        A: n×n update matrix
        F: m×n guard matrix

    Returns:
        RealRestriction with A_r, F_r, the embedding of E^r and the coordinates along E^nr

    Raises:
        IrrationalSpectrumError: If the characteristic polynomial has an irrational real root
    """
    if F.cols != A.rows:
        raise DimensionMismatchError(f"Guard rows have {F.cols} columns, update matrix is {A.rows}x{A.cols}")
    n = A.rows
    chi = char_poly(A)
    roots = rational_roots(chi)
    cofactor = rational_root_cofactor(chi)
    if count_real_roots(cofactor) > 0:
        factor = _irrational_factor(cofactor)
        logger.error(f"Irrational real eigenvalue, irreducible factor {factor}")
        raise IrrationalSpectrumError(factor)

    eigenvalues = tuple((Rational(value), multiplicity) for value, multiplicity in roots)
    if cofactor.degree() <= 0:
        logger.debug(f"Spectrum {eigenvalues} is rational, E^r is the whole space of dimension {n}")
        return RealRestriction(
            A_r=ImmutableMatrix(A),
            F_r=ImmutableMatrix(F),
            embed=identity(n),
            coords=identity(n),
            dim_Enr=0,
            eigenvalues=eigenvalues,
        )

    q = Poly(1, T, domain=QQ)
    for value, multiplicity in roots:
        q = q * Poly(T - value, T, domain=QQ) ** multiplicity
    real_basis = kernel_basis(poly_at_matrix(q, A))
    complex_basis = kernel_basis(poly_at_matrix(cofactor, A))
    n_r = len(real_basis)

    embed = _columns(real_basis, n)
    coords = inverse(_columns(real_basis + complex_basis, n))[:n_r, :]
    A_r = ImmutableMatrix(coords * A * embed)
    F_r = ImmutableMatrix(F * embed)
    logger.debug(f"Restricted to E^r of dimension {n_r}, E^nr has dimension {len(complex_basis)}")
    return RealRestriction(
        A_r=A_r,
        F_r=F_r,
        embed=embed,
        coords=ImmutableMatrix(coords),
        dim_Enr=len(complex_basis),
        eigenvalues=eigenvalues,
    )


def k_subspace(A: Matrix, f: Matrix) -> List[ImmutableMatrix]:
    """
    Basis of K(A, f), the vectors x with f·A^i·x = 0 for i < n.

    Args:
        A: n×n matrix
        f: 1×n row

    Returns:
        Canonical basis as column vectors
    """
    n = A.rows
    if f.shape != (1, n):
        raise DimensionMismatchError(f"Guard row must be 1x{n}, got {f.rows}x{f.cols}")
    if n == 0:
        return []
    rows = [Matrix(f)]
    for _ in range(n - 1):
        rows.append(rows[-1] * A)
    return kernel_basis(Matrix.vstack(*rows))


def _jordan_chains(A: Matrix, eigenvalue: Rational) -> List[List[ImmutableMatrix]]:
    """
    Classical Jordan chains c_1..c_s of an eigenvalue, with (A - λ)c_1 = 0 and (A - λ)c_i = c_{i-1}.

    Chain tops are picked from the canonical kernel bases of the powers of A - λ, lowest index first.
    Chains are returned by ascending length.
    """
    n = A.rows
    N = Matrix(A) - eigenvalue * eye(n)
    powers = [eye(n)]
    dims = [0]
    while True:
        power = powers[-1] * N
        dim = n - rank(power)
        if dim == dims[-1]:
            break
        powers.append(power)
        dims.append(dim)

    tops: List[Tuple[Matrix, int]] = []
    for s in range(len(dims) - 1, 0, -1):
        needed = (dims[s] - dims[s - 1]) - len(tops)
        if needed <= 0:
            continue
        base = [Matrix(v) for v in kernel_basis(powers[s - 1])] if s > 1 else []
        base += [powers[length - s] * top for top, length in tops]
        current = rank(Matrix.hstack(*base)) if base else 0
        for candidate in kernel_basis(powers[s]):
            if needed == 0:
                break
            trial = base + [Matrix(candidate)]
            if rank(Matrix.hstack(*trial)) > current:
                base = trial
                current += 1
                tops.append((Matrix(candidate), s))
                needed -= 1

    chains = [[ImmutableMatrix(powers[length - i] * top) for i in range(1, length + 1)] for top, length in tops]
    return sorted(chains, key=len)


def modified_jordan_basis(A: Matrix, eigenvalue: Rational) -> Tuple[List[ImmutableMatrix], List[int]]:
    """
    Modified Jordan basis of the generalized eigenspace of a nonzero eigenvalue.

    Each chain vector c_i is scaled to λ^(i-1)·c_i, so A acts on a block as λ times the unit upper bidiagonal
    matrix. Blocks are ordered by ascending size.

    Args:
        A: Square matrix
        eigenvalue: Nonzero rational eigenvalue of A

    Returns:
        Tuple (columns, block sizes)

    Raises:
        ValueError: If the eigenvalue is zero or not an eigenvalue of A
    """
    value = Rational(eigenvalue)
    if value == 0:
        raise ValueError("The zero eigenvalue has no modified Jordan basis; it is removed by the degenerate reduction")
    chains = _jordan_chains(A, value)
    if not chains:
        raise ValueError(f"{value} is not an eigenvalue")
    columns = [ImmutableMatrix(value**i * c) for chain in chains for i, c in enumerate(chain)]
    return columns, [len(chain) for chain in chains]


def jordan_block(eigenvalue: Rational, size: int) -> ImmutableMatrix:
    """λ·T for nonzero λ, the nilpotent Jordan block for λ = 0."""
    if eigenvalue == 0:
        return ImmutableMatrix(unipotent_block(size) - eye(size))
    return ImmutableMatrix(Rational(eigenvalue) * unipotent_block(size))


def decompose(A: Matrix, f: Optional[Matrix] = None) -> SpectralData:
    """
    Modified Jordan decomposition of a matrix with rational spectrum.

    The generalized eigenspace of 0 comes first with classical chains, then the nonzero eigenvalues in ascending
    order.

    Args:
        A: Square matrix whose characteristic polynomial splits over the rationals
        f: Optional guard row; its coordinates in the basis become f_coeffs

    Returns:
        SpectralData with P⁻¹·A·P block diagonal

    Raises:
        IrrationalSpectrumError: If the spectrum is not rational
    """
    n = A.rows
    chi = char_poly(A)
    roots = rational_roots(chi)
    if sum(multiplicity for _, multiplicity in roots) != n:
        cofactor = rational_root_cofactor(chi)
        raise IrrationalSpectrumError(str(cofactor.as_expr()), context="decomposition needs a rational spectrum")

    ordered = sorted(roots, key=lambda item: (item[0] != 0, item[0]))
    columns: List[Matrix] = []
    blocks: List[JordanBlock] = []
    for value, _ in ordered:
        for chain in _jordan_chains(A, value):
            blocks.append(JordanBlock(eigenvalue=Rational(value), size=len(chain), start=len(columns)))
            columns.extend(chain if value == 0 else [value**i * c for i, c in enumerate(chain)])

    P = _columns(columns, n)
    P_inverse = inverse(P)
    f_coeffs = f_coefficients(f, P) if f is not None else tuple(Rational(0) for _ in range(n))
    return SpectralData(
        eigenvalues=tuple((Rational(value), multiplicity) for value, multiplicity in roots),
        P=P,
        P_inverse=P_inverse,
        blocks=tuple(blocks),
        f_coeffs=f_coeffs,
    )


def f_coefficients(f: Matrix, P: Matrix) -> Tuple[Rational, ...]:
    """Coordinates a_{λ,j} of a guard row in the basis given by the columns of P."""
    if f.shape != (1, P.rows):
        raise DimensionMismatchError(f"Guard row must be 1x{P.rows}, got {f.rows}x{f.cols}")
    return entries(f * P)


def spectral_data_from_jordan(T_matrix: Matrix, w: Matrix) -> SpectralData:
    """
    Read the block layout off a matrix that is already in modified Jordan form.

    Args:
        T_matrix: Block diagonal matrix of blocks λ·T (nilpotent blocks for λ = 0)
        w: Guard row in the same coordinates

    Returns:
        SpectralData with P the identity

    Raises:
        ValueError: If the matrix is not in modified Jordan form
    """
    n = T_matrix.rows
    blocks: List[JordanBlock] = []
    i = 0
    while i < n:
        value = Rational(T_matrix[i, i])
        link = value if value != 0 else 1
        size = 1
        while i + size < n and T_matrix[i + size, i + size] == value and T_matrix[i + size - 1, i + size] == link:
            size += 1
        blocks.append(JordanBlock(eigenvalue=value, size=size, start=i))
        i += size

    if ImmutableMatrix(T_matrix) != block_diagonal([jordan_block(b.eigenvalue, b.size) for b in blocks]):
        raise ValueError("Matrix is not in modified Jordan form")

    multiplicities: Dict[Rational, int] = {}
    for block in blocks:
        multiplicities[block.eigenvalue] = multiplicities.get(block.eigenvalue, 0) + block.size
    return SpectralData(
        eigenvalues=tuple(sorted(multiplicities.items())),
        P=identity(n),
        P_inverse=identity(n),
        blocks=tuple(blocks),
        f_coeffs=f_coefficients(w, identity(n)),
    )


def _verify_regular(pair_spec: SpectralData, T_a: Matrix, w_a: Matrix) -> None:
    layout = pair_spec.block_layout
    if 0 in layout:
        raise RegularityError("Zero eigenvalue left in the regular part")
    repeated = {value: sizes for value, sizes in layout.items() if len(sizes) > 1}
    if repeated:
        raise RegularityError(f"Several Jordan blocks survive for eigenvalues {sorted(repeated)}")
    if T_a.rows and k_subspace(T_a, w_a):
        raise RegularityError("The guard row does not see every Jordan coordinate of the regular part")


def degenerate_reduction(A: Matrix, f: Matrix, dim_Enr: int = 0) -> RegularPair:
    """
    Reduce (A, f) to a regular pair by removing K(A, f) and the generalized eigenspace of 0.

    With P0 = [basis of K | completion], the quotient matrix A1 is the lower right block of P0⁻¹·A·P0. A1 gets a
    modified Jordan basis P1 with the zero eigenvalue first, and R = P0·diag(I, P1). The last n_a coordinates of
    R⁻¹·x are the coordinates of the regular part.

    Args:
        A: Square matrix with rational spectrum
        f: Guard row
        dim_Enr: Dimension already removed by the real-spectrum restriction, recorded in the trace

    Returns:
        RegularPair (T^a, w^a) with its reduction trace and the lift R⁻¹ restricted to the regular rows

    Raises:
        IrrationalSpectrumError: If the spectrum of A is not rational
        RegularityError: If the re-verification of the regular pair fails
    """
    n = A.rows
    f = ImmutableMatrix(f)
    kernel = k_subspace(A, f)
    dim_K = len(kernel)
    P0 = _columns(list(kernel) + complete_basis(kernel, n), n)
    conjugated = inverse(P0) * A * P0
    A1 = ImmutableMatrix(conjugated[dim_K:, dim_K:])
    f1 = ImmutableMatrix((f * P0)[:, dim_K:])

    quotient = decompose(A1, f1)
    dim_E0 = quotient.multiplicity(0)
    n_a = n - dim_K - dim_E0
    R = ImmutableMatrix(P0 * block_diagonal([identity(dim_K), quotient.P]))
    R_inverse = inverse(R)
    B = R_inverse * A * R
    T_a = ImmutableMatrix(B[n - n_a :, n - n_a :])
    w_a = ImmutableMatrix((f * R)[:, n - n_a :])

    pair_spec = spectral_data_from_jordan(T_a, w_a)
    try:
        _verify_regular(pair_spec, T_a, w_a)
    except RegularityError as e:
        logger.error(f"Regular pair re-verification failed: {e}")
        raise

    trace = ReductionTrace(
        R=R,
        n=n,
        dim_K=dim_K,
        dim_E0=dim_E0,
        n_a=n_a,
        dim_Enr=dim_Enr,
        eigenvalues=pair_spec.eigenvalues,
        normal=is_normal_spectrum(pair_spec.spectrum),
    )
    logger.debug(f"Degenerate reduction: n={n}, dim K={dim_K}, dim E0={dim_E0}, n_a={n_a}")
    return RegularPair(
        T=T_a,
        w=w_a,
        spectral=pair_spec,
        trace=trace,
        lift=ImmutableMatrix(R_inverse[n - n_a :, :]),
    )


def is_normal_spectrum(eigenvalues: Sequence[Rational]) -> bool:
    """No eigenvalue λ with -λ also an eigenvalue; 0 is ignored."""
    values = {Rational(v) for v in eigenvalues if v != 0}
    return not any(-v in values for v in values)


def phi_forms(spec: SpectralData) -> PhiForms:
    """
    The k^j coefficients of P_λ(x, k) as linear forms over the Jordan coordinates.

    For a block of size d with guard coefficients a_1..a_d, the coordinate x_j contributes
    Σ_{i≤j} a_i·C(k, j-i) to P_λ(x, k). Blocks of the same eigenvalue add up.

    Args:
        spec: Spectral data of a matrix in modified Jordan coordinates

    Returns:
        PhiForms with φ_{λ,j} for 0 <= j < d_λ
    """
    n = spec.dimension
    phi: Dict[Tuple[Rational, int], List[Rational]] = {}
    sizes: Dict[Rational, int] = {}
    for block in spec.blocks:
        if block.eigenvalue == 0:
            continue
        value = block.eigenvalue
        sizes[value] = max(sizes.get(value, 0), block.size)
        for j in range(block.size):
            phi.setdefault((value, j), [Rational(0)] * n)
        a = [spec.f_coeffs[p] for p in block.positions]
        for j, position in enumerate(block.positions, start=1):
            polynomial = Poly(0, K, domain=QQ)
            for i in range(1, j + 1):
                if a[i - 1] != 0:
                    polynomial = polynomial + binomial(K, j - i).mul_ground(a[i - 1])
            for degree, coeff in enumerate(reversed(polynomial.all_coeffs())):
                if coeff != 0:
                    phi[(value, degree)][position] += Rational(coeff)
    return PhiForms(dimension=n, phi={key: tuple(form) for key, form in phi.items()}, sizes=sizes)


def jordan_variable_names(spec: SpectralData) -> Tuple[str, ...]:
    """Labels x[λ,j] for the Jordan coordinates; a block index is added when an eigenvalue has several blocks."""
    names: List[str] = []
    counts: Dict[Rational, int] = {}
    for block in spec.blocks:
        counts[block.eigenvalue] = counts.get(block.eigenvalue, 0) + 1
        several = len(spec.blocks_of(block.eigenvalue)) > 1
        for j in range(1, block.size + 1):
            index = f"{counts[block.eigenvalue]},{j}" if several else f"{j}"
            names.append(f"x[{block.eigenvalue},{index}]")
    return tuple(names)

"""
Spectral models for the linear loop ANT analyzer.
Defines Jordan block layouts, spectral decompositions and the bookkeeping of subspace reductions.
"""

from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, Field
from sympy import ImmutableMatrix, Rational


class JordanBlock(BaseModel):
    """One block λ·T of a modified Jordan basis, occupying columns start..start+size-1."""

    eigenvalue: Rational = Field(..., description="Eigenvalue of the block")
    size: int = Field(..., description="Block size")
    start: int = Field(..., description="Index of the first basis vector of the block")

    class Config:
        """Configure behavior."""

        arbitrary_types_allowed = True
        frozen = True

    @property
    def positions(self) -> List[int]:
        return list(range(self.start, self.start + self.size))


class SpectralData(BaseModel):
    """Modified Jordan decomposition of a matrix together with the coordinates of a guard row in that basis."""

    eigenvalues: Tuple[Tuple[Rational, int], ...] = Field(..., description="(eigenvalue, multiplicity), ascending")
    P: ImmutableMatrix = Field(..., description="Basis matrix; columns are the modified Jordan basis")
    P_inverse: ImmutableMatrix = Field(..., description="Inverse of the basis matrix")
    blocks: Tuple[JordanBlock, ...] = Field(..., description="Blocks in column order")
    f_coeffs: Tuple[Rational, ...] = Field(..., description="Guard row times P")

    class Config:
        """Configure behavior."""

        arbitrary_types_allowed = True
        frozen = True

    @property
    def dimension(self) -> int:
        return self.P.cols

    @property
    def block_layout(self) -> Dict[Rational, List[int]]:
        layout: Dict[Rational, List[int]] = {}
        for block in self.blocks:
            layout.setdefault(block.eigenvalue, []).append(block.size)
        return layout

    @property
    def spectrum(self) -> List[Rational]:
        return [value for value, _ in self.eigenvalues]

    def multiplicity(self, eigenvalue: Rational) -> int:
        return dict(self.eigenvalues).get(Rational(eigenvalue), 0)

    def blocks_of(self, eigenvalue: Rational) -> List[JordanBlock]:
        return [block for block in self.blocks if block.eigenvalue == eigenvalue]

    def single_block(self, eigenvalue: Rational) -> Optional[JordanBlock]:
        """The unique block of an eigenvalue in a regular pair, None if the eigenvalue is absent."""
        blocks = self.blocks_of(Rational(eigenvalue))
        return blocks[0] if blocks else None

    def coefficients(self, eigenvalue: Rational) -> List[List[Rational]]:
        """The coefficients a_{λ,1..} of the guard row, one list per block of the eigenvalue."""
        return [[self.f_coeffs[p] for p in block.positions] for block in self.blocks_of(Rational(eigenvalue))]


class RealRestriction(BaseModel):
    """Restriction of an update matrix and its guard rows to the real-spectrum subspace E^r."""

    A_r: ImmutableMatrix = Field(..., description="Update matrix in a basis of E^r")
    F_r: ImmutableMatrix = Field(..., description="Guard rows restricted to E^r")
    embed: ImmutableMatrix = Field(..., description="Columns express the basis of E^r in source coordinates")
    coords: ImmutableMatrix = Field(..., description="Projection onto E^r along E^nr, in E^r coordinates")
    dim_Enr: int = Field(0, description="Dimension of the subspace without real eigenvalues")
    eigenvalues: Tuple[Tuple[Rational, int], ...] = Field((), description="Rational eigenvalues with multiplicity")

    class Config:
        """Configure behavior."""

        arbitrary_types_allowed = True
        frozen = True

    @property
    def dim_Er(self) -> int:
        return self.embed.cols


class ReductionTrace(BaseModel):
    """Dimensions of the subspaces removed while reducing one guard row to a regular pair."""

    R: ImmutableMatrix = Field(..., description="Change of basis exposing K, E_0 and the regular part")
    n: int = Field(..., description="Dimension of the source space")
    dim_K: int = Field(..., description="Dimension of the subspace invisible to the guard")
    dim_E0: int = Field(..., description="Dimension of the generalized eigenspace of 0 in the quotient")
    n_a: int = Field(..., description="Dimension of the regular part")
    dim_Enr: int = Field(0, description="Dimension removed by the real-spectrum restriction")
    eigenvalues: Tuple[Tuple[Rational, int], ...] = Field((), description="Spectrum of the regular part")
    normal: Optional[bool] = Field(None, description="Whether the regular part has a normal spectrum")

    class Config:
        """Configure behavior."""

        arbitrary_types_allowed = True
        frozen = True


class RegularPair(BaseModel):
    """A matrix in modified Jordan form with one block per nonzero eigenvalue and a guard row seeing every block."""

    T: ImmutableMatrix = Field(..., description="Block diagonal matrix of blocks λ·T_λ")
    w: ImmutableMatrix = Field(..., description="Guard row in the Jordan coordinates")
    spectral: SpectralData = Field(..., description="Block layout and coefficients of the pair")
    trace: ReductionTrace = Field(..., description="How the pair was obtained")
    lift: ImmutableMatrix = Field(..., description="Maps coordinates of the reduced space to Jordan coordinates")

    class Config:
        """Configure behavior."""

        arbitrary_types_allowed = True
        frozen = True


class PhiForms(BaseModel):
    """Linear forms over the Jordan coordinates giving the k^j coefficients of each polynomial P_λ(x, k)."""

    dimension: int = Field(..., description="Number of Jordan coordinates")
    phi: Dict[Tuple[Rational, int], Tuple[Rational, ...]] = Field(..., description="φ_{λ,j} for present eigenvalues")
    sizes: Dict[Rational, int] = Field(..., description="Block size d_λ of every eigenvalue")

    class Config:
        """Configure behavior."""

        arbitrary_types_allowed = True
        frozen = True

    def zero(self) -> Tuple[Rational, ...]:
        return tuple(Rational(0) for _ in range(self.dimension))

    def form(self, eigenvalue: Rational, j: int) -> Tuple[Rational, ...]:
        """φ_{λ,j}; zero when λ is absent or j >= d_λ."""
        return self.phi.get((Rational(eigenvalue), j), self.zero())

    def plus(self, magnitude: Rational, j: int) -> Tuple[Rational, ...]:
        """φ⁺_{±λ,j} = φ_{λ,j} + φ_{-λ,j}."""
        return tuple(a + b for a, b in zip(self.form(magnitude, j), self.form(-magnitude, j)))

    def minus(self, magnitude: Rational, j: int) -> Tuple[Rational, ...]:
        """φ⁻_{±λ,j} = φ_{λ,j} - φ_{-λ,j}."""
        return tuple(a - b for a, b in zip(self.form(magnitude, j), self.form(-magnitude, j)))

    def size(self, eigenvalue: Rational) -> int:
        return self.sizes.get(Rational(eigenvalue), 0)

    def paired_size(self, magnitude: Rational) -> int:
        """e_λ = max(d_λ, d_-λ)."""
        return max(self.size(magnitude), self.size(-magnitude))

    @property
    def magnitudes(self) -> List[Rational]:
        """Distinct absolute values of the spectrum, descending."""
        return sorted({abs(value) for value in self.sizes}, reverse=True)

"""
Semi-linear set models for the linear loop ANT analyzer.
Defines atoms, cells and finite unions of cells over exact rational coordinates.
"""

from enum import Enum
from typing import List, Optional, Sequence, Tuple

from pydantic import BaseModel, Field
from sympy import Rational


class Relation(str, Enum):
    """Relation of an affine form to zero."""

    EQ = "eq"
    GT = "gt"


class Atom(BaseModel):
    """
    A single constraint coeffs·x + offset = 0 or coeffs·x + offset > 0.

    Atoms are built through semilinear_service.make_atom, which normalizes them to coprime integer data.
    """

    coeffs: Tuple[Rational, ...] = Field(..., description="Coefficients of the affine form")
    offset: Rational = Field(..., description="Constant term of the affine form")
    relation: Relation = Field(..., description="Relation of the form to zero")

    class Config:
        """Configure behavior."""

        arbitrary_types_allowed = True
        frozen = True

    @property
    def dimension(self) -> int:
        return len(self.coeffs)

    def value(self, point: Sequence[Rational]) -> Rational:
        """Evaluate the affine form at a point."""
        return sum((c * x for c, x in zip(self.coeffs, point) if c != 0), self.offset)

    def holds(self, point: Sequence[Rational]) -> bool:
        """Whether the atom holds at a point."""
        value = self.value(point)
        return value == 0 if self.relation == Relation.EQ else value > 0


class Cell(BaseModel):
    """A conjunction of atoms. The empty conjunction is the whole space."""

    atoms: Tuple[Atom, ...] = Field(default_factory=tuple, description="Atoms, sorted and without duplicates")
    label: Optional[str] = Field(None, description="Name of the formula family the cell came from")

    class Config:
        """Configure behavior."""

        arbitrary_types_allowed = True
        frozen = True

    @property
    def equalities(self) -> List[Atom]:
        return [a for a in self.atoms if a.relation == Relation.EQ]

    @property
    def inequalities(self) -> List[Atom]:
        return [a for a in self.atoms if a.relation == Relation.GT]

    def holds(self, point: Sequence[Rational]) -> bool:
        return all(atom.holds(point) for atom in self.atoms)


class SemiLinearSet(BaseModel):
    """A finite union of cells in a fixed ambient dimension. No cells means the empty set."""

    cells: Tuple[Cell, ...] = Field(default_factory=tuple, description="Disjuncts of the set")
    dimension: int = Field(..., description="Ambient dimension")
    variable_names: Tuple[str, ...] = Field(..., description="Coordinate labels used for rendering")

    class Config:
        """Configure behavior."""

        arbitrary_types_allowed = True
        frozen = True

    @property
    def is_trivially_empty(self) -> bool:
        return not self.cells

    @property
    def is_full_space(self) -> bool:
        return any(not cell.atoms for cell in self.cells)


class IntegerStatus(str, Enum):
    """Outcome of an integer emptiness check."""

    EMPTY = "empty"
    NON_EMPTY = "non_empty"
    UNKNOWN = "unknown"


class IntegerFeasibility(BaseModel):
    """Result of a budgeted integer emptiness check."""

    status: IntegerStatus = Field(..., description="Empty, non-empty with witness, or budget exhausted")
    witness: Optional[Tuple[Rational, ...]] = Field(None, description="Integer member when non-empty")
    nodes: int = Field(0, description="Branch-and-bound nodes explored")

    class Config:
        """Configure behavior."""

        arbitrary_types_allowed = True
        frozen = True

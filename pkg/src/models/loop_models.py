"""
Loop program models for the linear loop ANT analyzer.
Defines the matrix form of `while (F x > b) { x := A x + c }` loops.
"""

from enum import Enum
from typing import Optional, Tuple

from pydantic import BaseModel, Field, model_validator
from sympy import ImmutableMatrix


class LoopClass(str, Enum):
    """Loop classes: one guard and x := Ax, several guards and x := Ax, or affine guards and updates."""

    HOMOGENEOUS = "homogeneous"
    GENERALIZED = "generalized"
    AFFINE = "affine"


def classify(c: ImmutableMatrix, b: ImmutableMatrix, m: int) -> LoopClass:
    """Class of a loop from its constant vectors and its number of guard rows."""
    if any(v != 0 for v in c) or any(v != 0 for v in b):
        return LoopClass.AFFINE
    return LoopClass.HOMOGENEOUS if m == 1 else LoopClass.GENERALIZED


class LoopProgram(BaseModel):
    """A loop `while (F x > b) { x := A x + c }` over exact rationals."""

    var_names: Tuple[str, ...] = Field(..., description="Program variables in coordinate order")
    A: ImmutableMatrix = Field(..., description="n×n update matrix")
    c: ImmutableMatrix = Field(..., description="n×1 update constant")
    F: ImmutableMatrix = Field(..., description="m×n guard matrix")
    b: ImmutableMatrix = Field(..., description="m×1 guard bound")
    class_tag: LoopClass = Field(..., description="Loop class")
    name: Optional[str] = Field(None, description="Program identifier, e.g. a corpus id or file stem")

    class Config:
        """Configure behavior."""

        arbitrary_types_allowed = True
        frozen = True

    @model_validator(mode="after")
    def check_dimensions(self) -> "LoopProgram":
        n = len(self.var_names)
        if self.A.shape != (n, n):
            raise ValueError(f"A must be {n}x{n}, got {self.A.rows}x{self.A.cols}")
        if self.c.shape != (n, 1):
            raise ValueError(f"c must be {n}x1, got {self.c.rows}x{self.c.cols}")
        if self.F.cols != n or self.F.rows < 1:
            raise ValueError(f"F must have {n} columns and at least one row, got {self.F.rows}x{self.F.cols}")
        if self.b.shape != (self.F.rows, 1):
            raise ValueError(f"b must be {self.F.rows}x1, got {self.b.rows}x{self.b.cols}")
        if self.class_tag != classify(self.c, self.b, self.F.rows):
            raise ValueError(f"Class tag {self.class_tag.value} does not match the program data")
        return self

    @property
    def n(self) -> int:
        return len(self.var_names)

    @property
    def m(self) -> int:
        return self.F.rows


class Embedding(BaseModel):
    """How an analyzed program relates to the source program."""

    homogenized: bool = Field(False, description="Whether a constant coordinate 1 was appended")
    original_dimension: int = Field(..., description="Number of source variables")
    constant_name: Optional[str] = Field(None, description="Name of the appended constant coordinate")

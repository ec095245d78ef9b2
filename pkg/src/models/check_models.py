"""
Property check models for the linear loop ANT analyzer.
Defines per-program property results and the per-class corpus summary.
"""

from typing import List, Optional

from pydantic import BaseModel, Field


class PropertyResult(BaseModel):
    """Outcome of one property on one program."""

    name: str = Field(..., description="Property name")
    passed: bool = Field(..., description="Whether the property held")
    checked: int = Field(0, description="Number of sampled points or instances checked")
    detail: Optional[str] = Field(None, description="Counterexample or diff when the property failed")


class ProgramCheck(BaseModel):
    """All property results of one program."""

    name: str = Field(..., description="Program id")
    class_tag: str = Field(..., description="Loop class")
    n: int = Field(..., description="Number of variables")
    m: int = Field(..., description="Number of guard rows")
    verdict: Optional[str] = Field(None, description="Real verdict")
    integer_verdict: Optional[str] = Field(None, description="Integer verdict")
    seconds: float = Field(0.0, description="Wall time of analysis and checks")
    properties: List[PropertyResult] = Field(default_factory=list, description="Property results")
    error: Optional[str] = Field(None, description="Analysis error, if any")

    @property
    def passed(self) -> bool:
        return self.error is None and all(p.passed for p in self.properties)


class SummaryRow(BaseModel):
    """One line of the per-class corpus table."""

    loops: int = Field(..., description="#Loops")
    class_tag: str = Field(..., description="Class")
    conditions: str = Field(..., description="#Cond range")
    variables: str = Field(..., description="#Var range")
    terminating: int = Field(..., description="#T")
    non_terminating: int = Field(..., description="#NT")
    unknown: int = Field(0, description="#Unknown or failed analyses")
    seconds: float = Field(0.0, description="Total seconds")

"""
Report models for the linear loop ANT analyzer.
Defines verdicts, per-condition analysis details, analysis reports and the validated command-line configuration.
"""

from enum import Enum, IntEnum
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, Field, model_validator
from sympy import ImmutableMatrix, Rational

from src.models.loop_models import Embedding, LoopClass
from src.models.semilinear_models import SemiLinearSet
from src.models.spectral_models import ReductionTrace, SpectralData
from src.util.errors import CorpusError, IrrationalSpectrumError, RegularityError


class Domain(str, Enum):
    """Domain the program variables range over."""

    REAL = "real"
    RATIONAL = "rational"
    INTEGER = "integer"


class Verdict(str, Enum):
    """Termination verdict for one domain."""

    TERMINATING = "Terminating"
    NON_TERMINATING = "NonTerminating"
    UNKNOWN = "Unknown"


class ExitCode(IntEnum):
    """Process exit codes of the command-line tool."""

    TERMINATING = 0
    NON_TERMINATING = 1
    UNKNOWN = 2
    USAGE = 64
    IRRATIONAL_SPECTRUM = 65
    CORPUS_IO = 66
    INTERNAL = 70

    @classmethod
    def for_verdict(cls, verdict: Verdict) -> "ExitCode":
        return {
            Verdict.TERMINATING: cls.TERMINATING,
            Verdict.NON_TERMINATING: cls.NON_TERMINATING,
            Verdict.UNKNOWN: cls.UNKNOWN,
        }[verdict]

    @classmethod
    def for_error(cls, error: Exception) -> "ExitCode":
        """Exit code of a command that failed with the given exception."""
        if isinstance(error, IrrationalSpectrumError):
            return cls.IRRATIONAL_SPECTRUM
        if isinstance(error, CorpusError):
            return cls.CORPUS_IO
        if isinstance(error, RegularityError) or not isinstance(error, ValueError):
            return cls.INTERNAL
        return cls.USAGE


class OutputFormat(str, Enum):
    TEXT = "text"
    JSON = "json"
    SMT2 = "smt2"


class DomainVerdict(BaseModel):
    """Verdict for one domain, with a witness of non-termination or an explanation of Unknown."""

    domain: Domain = Field(..., description="Domain of the verdict")
    verdict: Verdict = Field(..., description="Termination verdict")
    witness: Optional[Tuple[Rational, ...]] = Field(None, description="Point of the ANT locus, source coordinates")
    note: Optional[str] = Field(None, description="Explanation attached to the verdict")
    nodes: int = Field(0, description="Branch-and-bound nodes used for integer verdicts")

    class Config:
        """Configure behavior."""

        arbitrary_types_allowed = True
        frozen = True


class ConditionDetail(BaseModel):
    """What happened to one guard row during the analysis."""

    row: int = Field(..., description="Index of the guard row in the analyzed program")
    method: str = Field(..., description="normal, regular or zero-row")
    trace: Optional[ReductionTrace] = Field(None, description="Reduction of the row to a regular pair")
    spectral: Optional[SpectralData] = Field(None, description="Spectral data of the regular pair")
    jordan_set: Optional[SemiLinearSet] = Field(None, description="ANT set of the regular pair, Jordan coordinates")
    row_set: SemiLinearSet = Field(..., description="ANT locus of the row in analyzed coordinates")
    lift: Optional[ImmutableMatrix] = Field(None, description="Map from analyzed coordinates to Jordan coordinates")
    cell_counts: Dict[str, int] = Field(default_factory=dict, description="Cells per formula family")

    class Config:
        """Configure behavior."""

        arbitrary_types_allowed = True
        frozen = True


class AnalysisReport(BaseModel):
    """Result of analyzing one loop program."""

    program_name: Optional[str] = Field(None, description="Program identifier")
    var_names: Tuple[str, ...] = Field(..., description="Source variables in coordinate order")
    class_tag: LoopClass = Field(..., description="Loop class")
    embedding: Embedding = Field(..., description="Relation between analyzed and source coordinates")
    ant_set: SemiLinearSet = Field(..., description="ANT locus over the source variables, projection convention")
    terminating_set: SemiLinearSet = Field(..., description="Complement of the ANT locus")
    verdicts: Tuple[DomainVerdict, ...] = Field(..., description="One verdict per domain")
    conditions: Tuple[ConditionDetail, ...] = Field(default_factory=tuple, description="Per guard row details")
    dim_Er: int = Field(..., description="Dimension of the real-spectrum subspace")
    dim_Enr: int = Field(0, description="Dimension of the subspace without real eigenvalues")
    eigenvalues: Tuple[Tuple[Rational, int], ...] = Field((), description="Rational spectrum of the analyzed matrix")

    class Config:
        """Configure behavior."""

        arbitrary_types_allowed = True
        frozen = True

    @property
    def parameters(self) -> List[Tuple[str, str]]:
        """Pairs (u_i, source variable) used when rendering loci."""
        return [(f"u{i + 1}", name) for i, name in enumerate(self.var_names)]

    def verdict(self, domain: Domain) -> DomainVerdict:
        for item in self.verdicts:
            if item.domain == domain:
                return item
        raise KeyError(domain)

    @property
    def witness(self) -> Optional[Tuple[Rational, ...]]:
        return self.verdict(Domain.REAL).witness


class CliConfig(BaseModel):
    """Validated per-invocation configuration of the command-line tool."""

    command: str = Field(..., description="analyze, simulate, generate or check")
    input: Optional[str] = Field(None, description="Program file, corpus directory or '-' for stdin")
    domain: Domain = Field(Domain.REAL, description="Domain whose verdict sets the exit code")
    output_format: OutputFormat = Field(OutputFormat.TEXT, description="Output format")
    horizon: Optional[int] = Field(None, description="Simulation horizon")
    int_budget: int = Field(..., description="Branch-and-bound node budget per cell")
    seed: int = Field(..., description="Random seed")
    trace: bool = Field(False, description="Print reduction traces or simulated states")
    exact: bool = Field(False, description="Print exact fractions in simulations")
    initial: Optional[Tuple[Rational, ...]] = Field(None, description="Initial point for simulate")
    count: int = Field(0, description="Number of generated programs")
    dimension: Optional[Tuple[int, int]] = Field(None, description="Variable count range for generate")
    conditions: Optional[Tuple[int, int]] = Field(None, description="Guard row count range for generate")
    loop_class: Optional[LoopClass] = Field(None, description="Class of generated programs")
    preset: Optional[str] = Field(None, description="small, medium or large")
    output: Optional[str] = Field(None, description="Output directory for generate")
    json_input: bool = Field(False, description="Read the program as JSON matrices")

    class Config:
        """Configure behavior."""

        arbitrary_types_allowed = True
        frozen = True

    @model_validator(mode="after")
    def check_flags(self) -> "CliConfig":
        if self.horizon is not None and self.command not in ("simulate", "check"):
            raise ValueError(f"--horizon is not accepted by {self.command}")
        if self.horizon is not None and self.horizon < 1:
            raise ValueError("--horizon must be positive")
        if self.int_budget < 1:
            raise ValueError("--int-budget must be positive")
        if self.exact and self.command != "simulate":
            raise ValueError(f"--exact is not accepted by {self.command}")
        if self.command == "simulate" and self.initial is None:
            raise ValueError("simulate needs an initial point")
        if self.count < 0:
            raise ValueError("--count must not be negative")
        for name, bounds in (("--dim", self.dimension), ("--cond", self.conditions)):
            if bounds is not None and not 1 <= bounds[0] <= bounds[1]:
                raise ValueError(f"{name} needs 1 <= lo <= hi, got {bounds[0]}..{bounds[1]}")
        return self

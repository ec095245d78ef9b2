"""
Analysis service for the linear loop ANT analyzer.
Builds the ANT set of a loop from its spectral data, maps it back to source coordinates and issues verdicts.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from sympy import ImmutableMatrix, Matrix, Rational

from src.config import settings
from src.models.loop_models import Embedding, LoopProgram
from src.models.report_models import AnalysisReport, ConditionDetail, Domain, DomainVerdict, Verdict
from src.models.semilinear_models import Cell, IntegerStatus, Relation, SemiLinearSet
from src.models.spectral_models import PhiForms, RealRestriction, SpectralData
from src.services.frontend_service import homogenize
from src.services.semilinear_service import (
    AtomOrConstant,
    cell_is_empty,
    complement,
    empty_set,
    full_space,
    intersect,
    is_empty_integer,
    linear_atom,
    make_cell,
    make_set,
    pullback,
    real_witness,
    slice_last_coordinate,
    union,
)
from src.services.spectral_service import (
    degenerate_reduction,
    is_normal_spectrum,
    jordan_variable_names,
    phi_forms,
    real_spectrum_restriction,
)
from src.util.exact_arith import char_poly, rational_roots
from src.util.logging import log_stage

logger = logging.getLogger(__name__)

Form = Tuple[Rational, ...]


def is_normal(A: Matrix) -> bool:
    """Whether no rational eigenvalue λ of A has -λ as an eigenvalue too."""
    return is_normal_spectrum([value for value, _ in rational_roots(char_poly(A))])


def _check_regular(spec: SpectralData) -> None:
    layout = spec.block_layout
    if 0 in layout or any(len(sizes) > 1 for sizes in layout.values()):
        raise ValueError(f"Expected a regular pair with one block per nonzero eigenvalue, got layout {layout}")


def _zero(form: Form) -> AtomOrConstant:
    return linear_atom(form, Relation.EQ)


def _positive(form: Form) -> AtomOrConstant:
    return linear_atom(form, Relation.GT)


def ant_normal(spec: SpectralData) -> SemiLinearSet:
    """
    ANT set of a regular pair with a normal spectrum.

    For every positive eigenvalue λ and block position k, the cell S[λ,k] says that every coordinate of a larger
    magnitude vanishes, that the λ-coordinates above k vanish and that a_{λ,1}·x_{λ,k} > 0.

    Args:
        spec: Spectral data of a regular pair

    Returns:
        Union of the S cells over the Jordan coordinates

    Raises:
        ValueError: If the spectrum is not normal or the pair is not regular
    """
    _check_regular(spec)
    if not is_normal_spectrum(spec.spectrum):
        raise ValueError(f"Spectrum {spec.spectrum} is not normal")
    n = spec.dimension
    names = jordan_variable_names(spec)

    def unit(position: int) -> Form:
        return tuple(Rational(int(i == position)) for i in range(n))

    cells: List[Optional[Cell]] = []
    for block in sorted(spec.blocks, key=lambda b: -abs(b.eigenvalue)):
        if block.eigenvalue <= 0:
            continue
        dominant = [
            _zero(unit(p)) for other in spec.blocks if abs(other.eigenvalue) > block.eigenvalue for p in other.positions
        ]
        leading = spec.f_coeffs[block.start]
        for k, position in enumerate(block.positions, start=1):
            higher = [_zero(unit(p)) for p in block.positions[k:]]
            scaled = tuple(leading * v for v in unit(position))
            cells.append(make_cell(dominant + higher + [_positive(scaled)], f"S[{block.eigenvalue},{k}]"))
    result = make_set(cells, n, names)
    logger.debug(f"Normal formula produced {len(result.cells)} cells")
    return result


def _vanishing(forms: Sequence[Form]) -> List[AtomOrConstant]:
    return [_zero(form) for form in forms]


def _all_forms(phi: PhiForms, magnitudes: Sequence[Rational]) -> List[Form]:
    forms: List[Form] = []
    for magnitude in magnitudes:
        for value in (magnitude, -magnitude):
            forms.extend(phi.form(value, j) for j in range(phi.size(value)))
    return forms


def _pruned(cells: Sequence[Optional[Cell]], dimension: int) -> List[Cell]:
    return [cell for cell in cells if cell is not None and not cell_is_empty(cell, dimension)]


def ant_regular_families(spec: SpectralData) -> Dict[str, SemiLinearSet]:
    """
    The three disjoint families S, U and V whose union is the ANT set of a regular pair.

    With Q⁺ and Q⁻ the even and odd parts of the dominant magnitude λ:
    S collects the points where both have a positive leading coefficient, U those where Q⁻ vanishes and the odd
    iterates are ruled by a smaller magnitude λ', V those where Q⁺ vanishes and the even iterates are ruled by λ'.
    Degree indices run from 0 to e_λ - 1 with e_λ = max(d_λ, d_-λ).

    Args:
        spec: Spectral data of a regular pair

    Returns:
        Mapping "S", "U", "V" to sets over the Jordan coordinates, empty cells dropped
    """
    _check_regular(spec)
    n = spec.dimension
    names = jordan_variable_names(spec)
    phi = phi_forms(spec)
    magnitudes = phi.magnitudes
    families: Dict[str, List[Optional[Cell]]] = {"S": [], "U": [], "V": []}

    for index, magnitude in enumerate(magnitudes):
        dominant = _vanishing(_all_forms(phi, magnitudes[:index]))
        e = phi.paired_size(magnitude)
        smaller = magnitudes[index + 1 :]

        for k in range(e):
            for k_odd in range(e):
                atoms = (
                    dominant
                    + _vanishing([phi.plus(magnitude, j) for j in range(k + 1, e)])
                    + _vanishing([phi.minus(magnitude, j) for j in range(k_odd + 1, e)])
                    + [_positive(phi.plus(magnitude, k)), _positive(phi.minus(magnitude, k_odd))]
                )
                families["S"].append(make_cell(atoms, f"S[{magnitude}]({k},{k_odd})"))

        for family, ruling, other in (("U", phi.plus, phi.minus), ("V", phi.minus, phi.plus)):
            silent = _vanishing([other(magnitude, j) for j in range(e)])
            for k in range(e):
                head = (
                    dominant
                    + silent
                    + _vanishing([ruling(magnitude, j) for j in range(k + 1, e)])
                    + [_positive(ruling(magnitude, k))]
                )
                for position, lower in enumerate(smaller):
                    between = [other(mid, j) for mid in smaller[:position] for j in range(phi.paired_size(mid))]
                    e_lower = phi.paired_size(lower)
                    for k_lower in range(e_lower):
                        atoms = (
                            head
                            + _vanishing(between)
                            + _vanishing([other(lower, j) for j in range(k_lower + 1, e_lower)])
                            + [_positive(other(lower, k_lower))]
                        )
                        families[family].append(make_cell(atoms, f"{family}[{magnitude},{lower}]({k},{k_lower})"))

    result = {key: make_set(_pruned(cells, n), n, names) for key, cells in families.items()}
    counts = ", ".join(f"{key}={len(value.cells)}" for key, value in result.items())
    logger.debug(f"Regular formula cells: {counts}")
    return result


def ant_regular(spec: SpectralData) -> SemiLinearSet:
    """ANT set of a regular pair with any rational spectrum, as the union S ∪ U ∪ V."""
    families = ant_regular_families(spec)
    return union(union(families["S"], families["U"]), families["V"])


def _dot(form: Form, x: Sequence[Rational]) -> Rational:
    return sum((a * b for a, b in zip(form, x) if a != 0), Rational(0))


def _leading_sign(coefficients: Sequence[Rational]) -> int:
    for value in reversed(coefficients):
        if value != 0:
            return 1 if value > 0 else -1
    return 0


def point_ant(spec: SpectralData, x: Sequence) -> bool:
    """
    Decide whether one point in Jordan coordinates is ANT, without building any set.

    f(A^k x) equals Σ_λ λ^k P_λ(x, k). On even k the magnitudes contribute Q⁺ = P_λ + P_-λ, on odd k
    Q⁻ = P_λ - P_-λ. The point is ANT iff on both parities the largest magnitude with a nonzero polynomial has a
    positive leading coefficient.

    Args:
        spec: Spectral data in modified Jordan coordinates
        x: Point in those coordinates

    Returns:
        Whether f(A^k x) > 0 for all large k
    """
    values = [Rational(v) for v in x]
    phi = phi_forms(spec)

    def parity_sign(part: Callable[[Rational, int], Form]) -> int:
        for magnitude in phi.magnitudes:
            coefficients = [_dot(part(magnitude, j), values) for j in range(phi.paired_size(magnitude))]
            sign = _leading_sign(coefficients)
            if sign != 0:
                return sign
        return 0

    return parity_sign(phi.plus) > 0 and parity_sign(phi.minus) > 0


class AnalysisService:
    """Service computing ANT sets and termination verdicts of loop programs."""

    def __init__(self, int_budget: Optional[int] = None, max_workers: Optional[int] = None):
        """
        Initialize the analysis service.

        Args:
            int_budget: Branch-and-bound node budget per cell, defaults to settings.INT_BUDGET
            max_workers: Threads for per-condition analysis, defaults to settings.MAX_WORKERS
        """
        self.int_budget = int_budget if int_budget is not None else settings.INT_BUDGET
        self.max_workers = max_workers if max_workers is not None else settings.MAX_WORKERS
        logger.info(f"Analysis service initialized (int_budget={self.int_budget}, max_workers={self.max_workers})")

    def analyze(self, program: LoopProgram) -> AnalysisReport:
        """
        Compute the ANT locus, its complement and the verdicts of a loop.

        Affine loops are homogenized, the update matrix is restricted to E^r once, every guard row is reduced to a
        regular pair whose ANT set is pulled back to the analyzed coordinates, the row sets are intersected and the
        constant coordinate is sliced at 1.

        Args:
            program: Loop to analyze

        Returns:
            AnalysisReport over the source variables

        Raises:
            IrrationalSpectrumError: If the update matrix has an irrational real eigenvalue
            RegularityError: If a reduced pair fails re-verification
        """
        logger.info(f"Analyzing {program.class_tag.value} loop {program.name or ''} with n={program.n}, m={program.m}")
        working, embedding = homogenize(program)
        try:
            with log_stage(logger, "real-spectrum restriction"):
                restriction = real_spectrum_restriction(working.A, working.F)
        except ValueError as e:
            logger.error(f"Spectral restriction failed for {program.name or 'program'}: {e}")
            raise

        names = working.var_names
        rows = list(range(working.m))
        with log_stage(logger, f"analysis of {len(rows)} guard rows"):
            if self.max_workers > 1 and len(rows) > 1:
                with ThreadPoolExecutor(max_workers=self.max_workers) as executor:
                    details = list(executor.map(lambda i: self._analyze_row(i, restriction, names), rows))
            else:
                details = [self._analyze_row(i, restriction, names) for i in rows]

        ant = full_space(working.n, names)
        for detail in details:
            ant = intersect(ant, detail.row_set)
            if not ant.cells:
                break
        if embedding.homogenized:
            ant = slice_last_coordinate(ant, program.var_names)
        terminating = complement(ant)
        logger.debug(f"ANT locus has {len(ant.cells)} cells, terminating set {len(terminating.cells)}")

        with log_stage(logger, "verdicts"):
            verdicts = self._verdicts(program, working, embedding, restriction, ant)
        return AnalysisReport(
            program_name=program.name,
            var_names=program.var_names,
            class_tag=program.class_tag,
            embedding=embedding,
            ant_set=ant,
            terminating_set=terminating,
            verdicts=verdicts,
            conditions=tuple(details),
            dim_Er=restriction.dim_Er,
            dim_Enr=restriction.dim_Enr,
            eigenvalues=restriction.eigenvalues,
        )

    def _analyze_row(self, index: int, restriction: RealRestriction, names: Sequence[str]) -> ConditionDetail:
        N = len(names)
        f_r = ImmutableMatrix(restriction.F_r.row(index))
        if all(v == 0 for v in f_r):
            logger.debug(f"Guard row {index} vanishes on E^r, its ANT set is empty")
            return ConditionDetail(row=index, method="zero-row", row_set=empty_set(N, names))

        pair = degenerate_reduction(restriction.A_r, f_r, restriction.dim_Enr)
        spec = pair.spectral
        lift = ImmutableMatrix(pair.lift * restriction.coords)
        if pair.trace.n_a == 0:
            return ConditionDetail(
                row=index, method="zero-row", trace=pair.trace, spectral=spec, row_set=empty_set(N, names)
            )

        if pair.trace.normal:
            jordan_set = ant_normal(spec)
            counts = {"S": len(jordan_set.cells)}
            method = "normal"
        else:
            families = ant_regular_families(spec)
            counts = {key: len(value.cells) for key, value in families.items()}
            jordan_set = union(union(families["S"], families["U"]), families["V"])
            method = "regular"

        row_set = pullback(jordan_set, lift, names)
        logger.debug(f"Guard row {index}: {method} formula, {len(row_set.cells)} cells")
        return ConditionDetail(
            row=index,
            method=method,
            trace=pair.trace,
            spectral=spec,
            jordan_set=jordan_set,
            row_set=row_set,
            lift=lift,
            cell_counts=counts,
        )

    def _verdicts(
        self,
        program: LoopProgram,
        working: LoopProgram,
        embedding: Embedding,
        restriction: RealRestriction,
        ant: SemiLinearSet,
    ) -> Tuple[DomainVerdict, ...]:
        witness = real_witness(ant)
        if witness is not None:
            witness = _project_witness(witness, working, embedding, restriction)
        outcome = Verdict.TERMINATING if witness is None else Verdict.NON_TERMINATING
        verdicts = [
            DomainVerdict(domain=Domain.REAL, verdict=outcome, witness=witness),
            DomainVerdict(domain=Domain.RATIONAL, verdict=outcome, witness=witness),
            self._integer_verdict(program, restriction, ant, witness is None),
        ]
        return tuple(verdicts)

    def _integer_verdict(
        self, program: LoopProgram, restriction: RealRestriction, ant: SemiLinearSet, real_empty: bool
    ) -> DomainVerdict:
        if real_empty:
            return DomainVerdict(domain=Domain.INTEGER, verdict=Verdict.TERMINATING)
        feasibility = is_empty_integer(ant, self.int_budget)
        if feasibility.status == IntegerStatus.EMPTY:
            return DomainVerdict(domain=Domain.INTEGER, verdict=Verdict.TERMINATING, nodes=feasibility.nodes)
        if feasibility.status == IntegerStatus.UNKNOWN:
            note = f"integer emptiness undecided within {self.int_budget} branch-and-bound nodes per cell"
            return DomainVerdict(domain=Domain.INTEGER, verdict=Verdict.UNKNOWN, note=note, nodes=feasibility.nodes)
        if restriction.dim_Enr > 0:
            note = "the update matrix has non-real eigenvalues; integer ANT points do not certify non-termination"
            return DomainVerdict(
                domain=Domain.INTEGER,
                verdict=Verdict.UNKNOWN,
                witness=feasibility.witness,
                note=note,
                nodes=feasibility.nodes,
            )
        if not _integral(program):
            note = "A or c has non-integer entries, so the integer lattice is not stable under the update"
            return DomainVerdict(
                domain=Domain.INTEGER,
                verdict=Verdict.UNKNOWN,
                witness=feasibility.witness,
                note=note,
                nodes=feasibility.nodes,
            )
        return DomainVerdict(
            domain=Domain.INTEGER,
            verdict=Verdict.NON_TERMINATING,
            witness=feasibility.witness,
            nodes=feasibility.nodes,
        )

    def decide_termination(self, program: LoopProgram, domain: Domain) -> DomainVerdict:
        """Verdict of one domain, with its witness or explanation."""
        return self.analyze(program).verdict(domain)


def _integral(program: LoopProgram) -> bool:
    return all(Rational(v).q == 1 for v in list(program.A) + list(program.c))


def _project_witness(
    witness: Sequence[Rational], working: LoopProgram, embedding: Embedding, restriction: RealRestriction
) -> Tuple[Rational, ...]:
    """Drop the E^nr component of a witness; the locus only constrains E^r coordinates, the loop needs the rest."""
    if restriction.dim_Enr == 0:
        return tuple(Rational(v) for v in witness)
    point = list(witness) + ([Rational(1)] if embedding.homogenized else [])
    projected = restriction.embed * (restriction.coords * Matrix(point))
    values = [Rational(v) for v in projected]
    return tuple(values[: embedding.original_dimension])

"""
Check service for the linear loop ANT analyzer.
Runs the property suite over program corpora: oracle equivalence, termination of the complement at a horizon,
closure and cone properties, agreement of the two formula paths, the affine embedding identity and expected fixtures.
"""

import asyncio
import logging
import random
import time
from typing import Any, Dict, List, Optional, Sequence, Tuple

from sympy import Matrix, Rational

from src.clients.corpus_client import CorpusEntry
from src.config import settings
from src.models.check_models import ProgramCheck, PropertyResult, SummaryRow
from src.models.loop_models import LoopClass, LoopProgram
from src.models.report_models import AnalysisReport, Domain
from src.models.semilinear_models import SemiLinearSet
from src.services.analysis_service import AnalysisService, ant_normal, ant_regular, point_ant
from src.services.frontend_service import homogenize
from src.services.render_service import format_set, set_from_json
from src.services.semilinear_service import cell_witness, complement, membership, set_equivalent
from src.services.simulation_service import check_ant_at_horizon, run
from src.util.helpers import format_vector, safe_get

logger = logging.getLogger(__name__)

Point = Tuple[Rational, ...]


def _cell_points(s: SemiLinearSet) -> List[Point]:
    points = []
    for cell in s.cells:
        point = cell_witness(cell, s.dimension)
        if point is not None:
            points.append(point)
    return points


def _scaled(points: Sequence[Point], factors: Sequence[Rational]) -> List[Point]:
    return [tuple(Rational(f) * v for v in point) for point in points for f in factors]


class CheckService:
    """Service running the property suite on analyzed programs."""

    def __init__(
        self,
        horizon: Optional[int] = None,
        int_budget: Optional[int] = None,
        seed: Optional[int] = None,
        samples: int = 50,
        max_workers: Optional[int] = None,
    ):
        """
        Initialize the check service.

        Args:
            horizon: Simulation horizon K, defaults to settings.DEFAULT_HORIZON
            int_budget: Branch-and-bound budget, defaults to settings.INT_BUDGET
            seed: Seed of the point sampler, defaults to settings.DEFAULT_SEED
            samples: Minimum number of points per oracle comparison
            max_workers: Programs checked concurrently, defaults to settings.MAX_WORKERS
        """
        self.horizon = horizon if horizon is not None else settings.DEFAULT_HORIZON
        self.seed = seed if seed is not None else settings.DEFAULT_SEED
        self.samples = samples
        self.max_workers = max_workers if max_workers is not None else settings.MAX_WORKERS
        self.analysis = AnalysisService(int_budget=int_budget, max_workers=1)
        logger.info(f"Check service initialized (horizon={self.horizon}, samples={self.samples})")

    def _random_points(self, rng: random.Random, dimension: int, count: int) -> List[Point]:
        return [
            tuple(Rational(rng.randint(-6, 6), rng.choice((1, 1, 2, 3))) for _ in range(dimension))
            for _ in range(count)
        ]

    def oracle_equivalence(self, report: AnalysisReport, rng: random.Random) -> PropertyResult:
        """Membership in the Jordan-coordinate set agrees with the per-point oracle on sampled points."""
        checked = 0
        for detail in report.conditions:
            if detail.spectral is None or detail.jordan_set is None:
                continue
            jordan = detail.jordan_set
            points = _cell_points(jordan)
            points += _scaled(points, (2, Rational(1, 3)))
            if jordan.dimension <= 4:
                points += _cell_points(complement(jordan))
            points += self._random_points(rng, jordan.dimension, max(0, self.samples - len(points)))
            for point in points:
                checked += 1
                if membership(jordan, point) != point_ant(detail.spectral, point):
                    return PropertyResult(
                        name="oracle-equivalence",
                        passed=False,
                        checked=checked,
                        detail=f"row {detail.row + 1}: point {format_vector(point)} in {format_set(jordan)}",
                    )
        return PropertyResult(name="oracle-equivalence", passed=True, checked=checked)

    def complement_terminates(self, program: LoopProgram, report: AnalysisReport) -> PropertyResult:
        """Every sampled point of the terminating set leaves the loop within the horizon."""
        points = _cell_points(report.terminating_set)
        if program.class_tag != LoopClass.AFFINE:
            points += _scaled(points, (3,))
        for point in points:
            trace = run(program, point, self.horizon)
            if not trace.terminated:
                return PropertyResult(
                    name="complement-terminates",
                    passed=False,
                    checked=len(points),
                    detail=f"{format_vector(point)} survives {self.horizon} steps",
                )
        return PropertyResult(name="complement-terminates", passed=True, checked=len(points))

    def witness_tail(self, program: LoopProgram, report: AnalysisReport) -> PropertyResult:
        """A non-termination witness shows a positive guard tail at the horizon."""
        witness = report.witness
        if witness is None:
            return PropertyResult(name="witness-tail", passed=True, checked=0)
        result = check_ant_at_horizon(program, witness, self.horizon)
        passed = result.k0 is not None
        detail = None if passed else f"{format_vector(witness)}: {result.describe()}"
        return PropertyResult(name="witness-tail", passed=passed, checked=1, detail=detail)

    def closure_and_cone(self, program: LoopProgram, report: AnalysisReport) -> List[PropertyResult]:
        """For linear loops, members stay members under the update and under positive scaling."""
        if program.class_tag == LoopClass.AFFINE:
            return []
        members = _cell_points(report.ant_set)
        closure_failure = None
        cone_failure = None
        for point in members:
            image = tuple(Rational(v) for v in program.A * Matrix(point))
            if closure_failure is None and not membership(report.ant_set, image):
                closure_failure = f"{format_vector(point)} maps to {format_vector(image)}"
            for factor in (Rational(5), Rational(1, 7)):
                scaled = tuple(factor * v for v in point)
                if cone_failure is None and not membership(report.ant_set, scaled):
                    cone_failure = f"{factor}*{format_vector(point)}"
        return [
            PropertyResult(
                name="forward-closure", passed=closure_failure is None, checked=len(members), detail=closure_failure
            ),
            PropertyResult(name="cone", passed=cone_failure is None, checked=len(members), detail=cone_failure),
        ]

    def path_agreement(self, report: AnalysisReport) -> PropertyResult:
        """On normal regular pairs the fast formula and the general formula describe the same set."""
        checked = 0
        for detail in report.conditions:
            if detail.spectral is None or detail.trace is None or not detail.trace.normal or detail.trace.n_a == 0:
                continue
            checked += 1
            fast, general = ant_normal(detail.spectral), ant_regular(detail.spectral)
            if not set_equivalent(fast, general):
                return PropertyResult(
                    name="path-agreement",
                    passed=False,
                    checked=checked,
                    detail=f"row {detail.row + 1}: {format_set(fast)} vs {format_set(general)}",
                )
        return PropertyResult(name="path-agreement", passed=True, checked=checked)

    def embedding_identity(
        self, program: LoopProgram, report: AnalysisReport, rng: random.Random
    ) -> Optional[PropertyResult]:
        """For affine loops, x is in the locus iff (x, 1) is in the locus of the homogenized loop."""
        if program.class_tag != LoopClass.AFFINE:
            return None
        homogeneous, _ = homogenize(program)
        lifted = self.analysis.analyze(homogeneous).ant_set
        points = _cell_points(report.ant_set) + _cell_points(report.terminating_set)
        points += self._random_points(rng, program.n, 10)
        for point in points:
            if membership(report.ant_set, point) != membership(lifted, tuple(point) + (Rational(1),)):
                return PropertyResult(
                    name="embedding-identity", passed=False, checked=len(points), detail=format_vector(point)
                )
        return PropertyResult(name="embedding-identity", passed=True, checked=len(points))

    def expected(self, report: AnalysisReport, data: Dict[str, Any]) -> List[PropertyResult]:
        """Compare with the expected locus and verdicts stored in a corpus entry."""
        results = []
        expected_set = safe_get(data, "expected.ant")
        if expected_set is not None:
            target = set_from_json(expected_set)
            same = target.dimension == report.ant_set.dimension and set_equivalent(report.ant_set, target)
            diff = None if same else f"got {format_set(report.ant_set)}, expected {format_set(target)}"
            results.append(PropertyResult(name="expected-locus", passed=same, checked=1, detail=diff))
        for domain in Domain:
            wanted = safe_get(data, f"expected.verdicts.{domain.value}")
            if wanted is None:
                continue
            got = report.verdict(domain).verdict.value
            detail = None if got == wanted else f"{domain.value}: got {got}, expected {wanted}"
            results.append(
                PropertyResult(name=f"expected-{domain.value}", passed=got == wanted, checked=1, detail=detail)
            )
        return results

    def _run_properties(
        self,
        check: ProgramCheck,
        program: LoopProgram,
        report: AnalysisReport,
        data: Dict[str, Any],
        rng: random.Random,
    ) -> None:
        check.properties.append(self.oracle_equivalence(report, rng))
        check.properties.append(self.complement_terminates(program, report))
        check.properties.append(self.witness_tail(program, report))
        check.properties.extend(self.closure_and_cone(program, report))
        check.properties.append(self.path_agreement(report))
        embedding = self.embedding_identity(program, report, rng)
        if embedding is not None:
            check.properties.append(embedding)
        check.properties.extend(self.expected(report, data))

    def check_program(self, entry: CorpusEntry, index: int = 0) -> ProgramCheck:
        """
        Analyze one corpus program and run every applicable property on it.

        Args:
            entry: Corpus entry with program and raw data
            index: Position in the corpus, mixed into the sampler seed

        Returns:
            ProgramCheck; analysis errors are recorded, and pass only when the entry expects that error
        """
        program = entry.program
        started = time.perf_counter()
        check = ProgramCheck(name=entry.name, class_tag=program.class_tag.value, n=program.n, m=program.m)
        rng = random.Random(self.seed * 1000003 + index)
        try:
            report = self.analysis.analyze(program)
        except ValueError as e:
            expected_error = safe_get(entry.data, "expected.error")
            check.seconds = time.perf_counter() - started
            if expected_error is not None and expected_error == type(e).__name__:
                check.properties.append(PropertyResult(name="expected-error", passed=True, checked=1))
                return check
            logger.error(f"Analysis of {entry.name} failed: {e}")
            check.error = f"{type(e).__name__}: {e}"
            return check
        except Exception as e:
            logger.exception(f"Internal error analyzing {entry.name}: {e}")
            check.seconds = time.perf_counter() - started
            check.error = f"{type(e).__name__}: {e}"
            return check

        check.verdict = report.verdict(Domain.REAL).verdict.value
        check.integer_verdict = report.verdict(Domain.INTEGER).verdict.value
        try:
            self._run_properties(check, program, report, entry.data, rng)
        except Exception as e:
            logger.exception(f"Internal error checking {entry.name}: {e}")
            check.error = f"{type(e).__name__}: {e}"
        check.seconds = time.perf_counter() - started
        failed = [p.name for p in check.properties if not p.passed]
        if failed:
            logger.warning(f"{entry.name}: failed {', '.join(failed)}")
        return check

    async def check_corpus(self, entries: Sequence[CorpusEntry]) -> List[ProgramCheck]:
        """
        Check every entry; with several workers the programs run in threads, results keep the corpus order.

        Args:
            entries: Corpus entries sorted by id

        Returns:
            One ProgramCheck per entry, in the same order
        """
        if self.max_workers <= 1:
            return [self.check_program(entry, index) for index, entry in enumerate(entries)]
        semaphore = asyncio.Semaphore(self.max_workers)

        async def bounded(index: int, entry: CorpusEntry) -> ProgramCheck:
            async with semaphore:
                return await asyncio.to_thread(self.check_program, entry, index)

        return list(await asyncio.gather(*(bounded(i, entry) for i, entry in enumerate(entries))))


def _range_text(values: Sequence[int]) -> str:
    lo, hi = min(values), max(values)
    return str(lo) if lo == hi else f"[{lo},{hi}]"


def summarize(results: Sequence[ProgramCheck]) -> List[SummaryRow]:
    """Per-class table rows in homogeneous, generalized, affine order."""
    rows = []
    for loop_class in LoopClass:
        group = [r for r in results if r.class_tag == loop_class.value]
        if not group:
            continue
        rows.append(
            SummaryRow(
                loops=len(group),
                class_tag=loop_class.value,
                conditions=_range_text([r.m for r in group]),
                variables=_range_text([r.n for r in group]),
                terminating=sum(1 for r in group if r.verdict == "Terminating"),
                non_terminating=sum(1 for r in group if r.verdict == "NonTerminating"),
                unknown=sum(1 for r in group if r.verdict is None),
                seconds=round(sum(r.seconds for r in group), 3),
            )
        )
    return rows


def summary_to_text(rows: Sequence[SummaryRow]) -> str:
    header = f"{'#Loops':>7} {'Class':<12} {'#Cond':>7} {'#Var':>7} {'#T':>5} {'#NT':>5} {'#Unknown':>8} {'seconds':>9}"
    lines = [header]
    for row in rows:
        lines.append(
            f"{row.loops:>7} {row.class_tag:<12} {row.conditions:>7} {row.variables:>7} {row.terminating:>5} "
            f"{row.non_terminating:>5} {row.unknown:>8} {row.seconds:>9.3f}"
        )
    return "\n".join(lines) + "\n"


def results_to_text(results: Sequence[ProgramCheck]) -> str:
    """Per-program pass/fail lines with the failing property details."""
    lines = []
    for result in results:
        status = "PASS" if result.passed else "FAIL"
        lines.append(
            f"{status} {result.name} ({result.class_tag}, n={result.n}, m={result.m}) verdict={result.verdict}"
        )
        if result.error:
            lines.append(f"  error: {result.error}")
        for prop in result.properties:
            if not prop.passed:
                lines.append(f"  {prop.name}: {prop.detail}")
    return "\n".join(lines) + "\n"

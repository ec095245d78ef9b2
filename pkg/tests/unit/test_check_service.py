"""
Unit tests for the property suite.
"""

from pathlib import Path

import pytest

from src.clients.corpus_client import CorpusEntry
from src.models.check_models import ProgramCheck
from src.models.semilinear_models import Relation
from src.services.check_service import CheckService, results_to_text, summarize, summary_to_text
from src.services.frontend_service import parse
from src.services.render_service import set_to_json

EQ = Relation.EQ
GT = Relation.GT

IRRATIONAL_SOURCE = """
while (x > 0) {
  (x, y) := (2*y, x);
}
"""


@pytest.fixture
def service():
    return CheckService(horizon=40, int_budget=300, seed=42, samples=20, max_workers=1)


def entry(program, data=None):
    return CorpusEntry(program, dict(data or {}, name=program.name), Path(f"{program.name}.json"))


class TestCheckProgram:
    """Test the property suite on single programs."""

    def test_all_properties_pass(self, service, example_one):
        """Test that a correctly analyzed loop passes every property."""
        # Act
        check = service.check_program(entry(example_one))

        # Assert
        assert check.passed
        assert check.verdict == "NonTerminating"
        names = [p.name for p in check.properties]
        assert "oracle-equivalence" in names
        assert "forward-closure" in names
        assert "embedding-identity" not in names

    def test_affine_loop_checks_embedding(self, service, half_loop):
        """Test that affine loops get the embedding identity and no cone property."""
        # Act
        check = service.check_program(entry(half_loop))

        # Assert
        names = [p.name for p in check.properties]
        assert "embedding-identity" in names
        assert "cone" not in names
        assert check.passed

    def test_expected_locus_and_verdicts(self, service, cascade_loop, build_set):
        """Test comparison with the stored locus and verdicts."""
        # Arrange
        ant = build_set(
            3,
            [
                [([0, 0, 1], GT)],
                [([0, 0, 1], EQ), ([0, 1, 0], GT)],
                [([0, 0, 1], EQ), ([0, 1, 0], EQ), ([1, 0, 0], GT)],
            ],
        )
        verdicts = {"real": "NonTerminating", "integer": "NonTerminating"}
        data = {"expected": {"ant": set_to_json(ant), "verdicts": verdicts}}

        # Act
        check = service.check_program(entry(cascade_loop, data))

        # Assert
        results = {p.name: p.passed for p in check.properties}
        assert results["expected-locus"]
        assert results["expected-real"]
        assert results["expected-integer"]
        assert check.passed

    def test_wrong_expectation_fails(self, service, half_loop, build_set):
        """Test that a wrong stored locus is reported with a diff."""
        # Arrange
        wrong = set_to_json(build_set(1, [[([1], GT)]]))
        data = {"expected": {"ant": wrong, "verdicts": {"integer": "NonTerminating"}}}

        # Act
        check = service.check_program(entry(half_loop, data))

        # Assert
        assert not check.passed
        failed = {p.name: p.detail for p in check.properties if not p.passed}
        assert "got" in failed["expected-locus"]
        assert failed["expected-integer"] == "integer: got Terminating, expected NonTerminating"

    def test_expected_error(self, service):
        """Test that an expected analysis error counts as a pass."""
        # Arrange
        program = parse(IRRATIONAL_SOURCE, name="irrational")

        # Act
        check = service.check_program(entry(program, {"expected": {"error": "IrrationalSpectrumError"}}))

        # Assert
        assert check.passed
        assert check.error is None
        assert check.properties[0].name == "expected-error"

    def test_unexpected_error(self, service):
        """Test that an analysis error without expectation fails the program."""
        # Arrange
        program = parse(IRRATIONAL_SOURCE, name="irrational")

        # Act
        check = service.check_program(entry(program))

        # Assert
        assert not check.passed
        assert check.error.startswith("IrrationalSpectrumError")
        assert check.verdict is None

    def test_internal_error_is_recorded(self, service, example_one, monkeypatch):
        """Test that an unexpected exception during analysis fails the program instead of raising."""
        # Arrange
        def broken(program):
            raise TypeError("unsupported operand")

        monkeypatch.setattr(service.analysis, "analyze", broken)

        # Act
        check = service.check_program(entry(example_one, {"expected": {"error": "TypeError"}}))

        # Assert
        assert not check.passed
        assert check.error == "TypeError: unsupported operand"
        assert check.properties == []

    def test_internal_error_in_properties_is_recorded(self, service, example_one, monkeypatch):
        """Test that an exception raised by a property keeps the verdict and records the error."""
        # Arrange
        def broken(report, rng):
            raise ZeroDivisionError("division by zero")

        monkeypatch.setattr(service, "oracle_equivalence", broken)

        # Act
        check = service.check_program(entry(example_one))

        # Assert
        assert not check.passed
        assert check.verdict == "NonTerminating"
        assert check.error == "ZeroDivisionError: division by zero"


class TestCheckCorpus:
    """Test corpus-level checking and the summary."""

    @pytest.mark.asyncio
    async def test_parallel_order(self, example_one, cascade_loop, cook_loop):
        """Test that threaded checking keeps the corpus order."""
        # Arrange
        entries = [entry(example_one), entry(cascade_loop), entry(cook_loop)]
        service = CheckService(horizon=60, int_budget=300, seed=1, samples=10, max_workers=3)

        # Act
        results = await service.check_corpus(entries)

        # Assert
        assert [r.name for r in results] == ["example_one", "cascade", "cook"]
        assert all(r.passed for r in results)

    @pytest.mark.asyncio
    async def test_corpus_survives_internal_error(self, example_one, cascade_loop, monkeypatch):
        """Test that one failing program does not abort the rest of the corpus."""
        # Arrange
        service = CheckService(horizon=60, int_budget=300, seed=1, samples=10, max_workers=1)
        analyze = service.analysis.analyze

        def flaky(program):
            if program.name == "cascade":
                raise TypeError("unsupported operand")
            return analyze(program)

        monkeypatch.setattr(service.analysis, "analyze", flaky)

        # Act
        results = await service.check_corpus([entry(cascade_loop), entry(example_one)])

        # Assert
        assert [r.name for r in results] == ["cascade", "example_one"]
        assert results[0].error == "TypeError: unsupported operand"
        assert results[1].passed

    def test_summary_rows(self):
        """Test grouping and ranges of the per-class table."""
        # Arrange
        results = [
            ProgramCheck(name="a", class_tag="homogeneous", n=3, m=1, verdict="NonTerminating", seconds=0.5),
            ProgramCheck(name="b", class_tag="homogeneous", n=4, m=1, verdict="Terminating", seconds=0.25),
            ProgramCheck(name="c", class_tag="affine", n=3, m=2, verdict=None, error="RegularityError: x"),
        ]

        # Act
        rows = summarize(results)
        text = summary_to_text(rows)

        # Assert
        assert [row.class_tag for row in rows] == ["homogeneous", "affine"]
        assert rows[0].variables == "[3,4]"
        assert rows[0].conditions == "1"
        assert (rows[0].terminating, rows[0].non_terminating, rows[0].unknown) == (1, 1, 0)
        assert rows[1].unknown == 1
        assert text.splitlines()[0].split() == ["#Loops", "Class", "#Cond", "#Var", "#T", "#NT", "#Unknown", "seconds"]
        assert "0.750" in text

    def test_results_text(self):
        """Test the PASS and FAIL lines."""
        # Arrange
        results = [
            ProgramCheck(name="a", class_tag="homogeneous", n=3, m=1, verdict="NonTerminating"),
            ProgramCheck(name="c", class_tag="affine", n=3, m=2, error="RegularityError: two blocks"),
        ]

        # Act
        text = results_to_text(results)

        # Assert
        assert text.startswith("PASS a (homogeneous, n=3, m=1) verdict=NonTerminating")
        assert "FAIL c (affine, n=3, m=2) verdict=None\n  error: RegularityError: two blocks" in text

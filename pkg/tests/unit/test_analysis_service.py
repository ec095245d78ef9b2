"""
Unit tests for the analysis service: ANT formulas, the full pipeline and the verdicts.
"""

import random

import pytest
from sympy import Matrix, Rational

from src.models.report_models import Domain, Verdict
from src.models.semilinear_models import Relation
from src.services.analysis_service import (
    AnalysisService,
    ant_normal,
    ant_regular,
    ant_regular_families,
    is_normal,
    point_ant,
)
from src.services.frontend_service import build_program
from src.services.semilinear_service import intersect, is_empty_real, make_set, membership, pullback, set_equivalent
from src.services.spectral_service import decompose, jordan_block, spectral_data_from_jordan
from src.util.errors import IrrationalSpectrumError
from src.util.exact_arith import block_diagonal, inverse, qmatrix, row_vector

EQ = Relation.EQ
GT = Relation.GT
R = Rational


@pytest.fixture
def service():
    return AnalysisService(int_budget=500, max_workers=1)


def homogeneous(A, f, names):
    n = len(names)
    return build_program(names, A, qmatrix([[0]] * n), f, qmatrix([[0]]), name="fixture")


class TestFormulas:
    """Test the normal and regular formulas on Jordan coordinates."""

    def test_mirrored_pair_families(self, mirrored_pair, build_set):
        """Test the S, U and V families of blocks 1·T2, -1·T2, [2], [-2] with an all-ones guard."""
        # Coordinates: x[1,1], x[1,2], x[-1,1], x[-1,2], x[2,1], x[-2,1]
        # Act
        families = ant_regular_families(mirrored_pair)

        # Assert
        assert len(families["S"].cells) == 5
        expected_u = build_set(
            6,
            [
                [
                    ([0, 0, 0, 0, 1, -1], EQ),
                    ([0, 1, 0, -1, 0, 0], EQ),
                    ([0, 0, 0, 0, 1, 0], GT),
                    ([1, 1, -1, -1, 0, 0], GT),
                ],
                [([0, 0, 0, 0, 1, -1], EQ), ([0, 0, 0, 0, 1, 0], GT), ([0, 1, 0, -1, 0, 0], GT)],
            ],
        )
        expected_v = build_set(
            6,
            [
                [
                    ([0, 0, 0, 0, 1, 1], EQ),
                    ([0, 1, 0, 1, 0, 0], EQ),
                    ([0, 0, 0, 0, 1, 0], GT),
                    ([1, 1, 1, 1, 0, 0], GT),
                ],
                [([0, 0, 0, 0, 1, 1], EQ), ([0, 0, 0, 0, 1, 0], GT), ([0, 1, 0, 1, 0, 0], GT)],
            ],
        )
        assert set_equivalent(families["U"], expected_u)
        assert set_equivalent(families["V"], expected_v)

    def test_dominant_cell_of_mirrored_pair(self, mirrored_pair, build_set):
        """Test that the magnitude-2 cell of S is x[2]+x[-2] > 0 and x[2]-x[-2] > 0."""
        # Arrange
        expected = build_set(6, [[([0, 0, 0, 0, 1, 1], GT), ([0, 0, 0, 0, 1, -1], GT)]])

        # Act
        families = ant_regular_families(mirrored_pair)
        dominant = [cell for cell in families["S"].cells if cell.label and cell.label.startswith("S[2]")]

        # Assert
        assert len(dominant) == 1
        assert set_equivalent(expected, make_set(dominant, 6))

    def test_families_are_pairwise_disjoint(self, mirrored_pair):
        """Test that S, U and V never share a point on two spectra with opposite eigenvalue pairs."""
        # Arrange
        T = block_diagonal(
            [jordan_block(R(3), 1), jordan_block(R(-3), 1), jordan_block(R(2), 2), jordan_block(R(-2), 2)]
        )
        paired = spectral_data_from_jordan(T, row_vector([1, 2, -1, 1, 1, -2]))

        for spec in (mirrored_pair, paired):
            # Act
            families = ant_regular_families(spec)

            # Assert
            for first, second in (("S", "U"), ("S", "V"), ("U", "V")):
                assert is_empty_real(intersect(families[first], families[second])), (first, second)

    def test_regular_formula_matches_pointwise_decision(self, mirrored_pair):
        """Test that membership in S ∪ U ∪ V equals the pointwise sign analysis on a grid."""
        # Arrange
        ant = ant_regular(mirrored_pair)
        rng = random.Random(7)
        points = [[rng.randint(-2, 2) for _ in range(6)] for _ in range(150)]
        points += [[0, 0, a, b, c, c] for a in (-1, 0, 1) for b in (-1, 0, 1) for c in (-1, 0, 1)]
        points += [[a, b, c, -b, 0, 0] for a in (-1, 0, 1) for b in (-1, 0, 1) for c in (-1, 0, 1)]

        for point in points:
            # Act & Assert
            assert membership(ant, point) == point_ant(mirrored_pair, point), point

    def test_normal_rejects_opposite_eigenvalues(self, mirrored_pair):
        """Test that the normal formula refuses a spectrum with λ and -λ."""
        # Act & Assert
        with pytest.raises(ValueError, match="not normal"):
            ant_normal(mirrored_pair)

    def test_normal_and_regular_paths_agree(self):
        """Test that both formulas give the same set on a normal spectrum with a nontrivial block."""
        # Arrange
        T = block_diagonal([jordan_block(R(2), 3), jordan_block(R(1), 1), jordan_block(R(-3), 2)])
        spec = spectral_data_from_jordan(T, row_vector([1, -1, 2, 1, -2, 1]))

        # Act
        normal = ant_normal(spec)
        regular = ant_regular(spec)

        # Assert
        assert set_equivalent(normal, regular)

    def test_point_ant(self, mirrored_pair):
        """Test the pointwise decision on points where one parity vanishes."""
        # Act & Assert
        assert point_ant(mirrored_pair, [0, 0, 0, 0, 1, 0])
        assert not point_ant(mirrored_pair, [0, 0, 0, 0, 1, 1])
        assert point_ant(mirrored_pair, [0, 1, 0, -1, 1, 1])
        assert not point_ant(mirrored_pair, [0, 0, 0, 0, 0, 0])

    def test_is_normal(self, example_one):
        """Test normality of update matrices."""
        # Act & Assert
        assert is_normal(example_one.A)
        assert not is_normal(qmatrix([[1, 0], [0, -1]]))


class TestAnalyze:
    """Test the full analysis of loop programs."""

    def test_example_one_locus(self, service, example_one, build_set):
        """Test the three-cell ANT locus of the loop with eigenvalues 1, 5 and 8."""
        # Arrange
        expected = build_set(
            3,
            [
                [([-1, -1, 3], GT)],
                [([1, 1, -3], EQ), ([0, 1, 1], GT)],
                [([1, 0, -4], EQ), ([0, 1, 1], EQ), ([0, 0, 1], GT)],
            ],
        )

        # Act
        report = service.analyze(example_one)

        # Assert
        assert set_equivalent(report.ant_set, expected)
        assert report.conditions[0].method == "normal"
        assert report.eigenvalues == ((1, 1), (5, 1), (8, 1))
        assert membership(report.ant_set, [-9, 3, -2])
        assert not membership(report.ant_set, [1, 0, 0])

    def test_example_one_verdicts(self, service, example_one):
        """Test verdicts and witnesses of a non-terminating integer loop."""
        # Act
        report = service.analyze(example_one)

        # Assert
        real = report.verdict(Domain.REAL)
        integer = report.verdict(Domain.INTEGER)
        assert real.verdict == Verdict.NON_TERMINATING
        assert membership(report.ant_set, real.witness)
        assert integer.verdict == Verdict.NON_TERMINATING
        assert all(Rational(v).q == 1 for v in integer.witness)
        assert membership(report.ant_set, integer.witness)

    def test_complex_block_is_projected(self, service, rotation_loop, build_set):
        """Test that a rotation block outside the guard leaves the locus unconstrained in its coordinates."""
        # Arrange
        expected = build_set(
            5,
            [
                [([-1, -1, 3, 0, 0], GT)],
                [([1, 1, -3, 0, 0], EQ), ([0, 1, 1, 0, 0], GT)],
                [([1, 0, -4, 0, 0], EQ), ([0, 1, 1, 0, 0], EQ), ([0, 0, 1, 0, 0], GT)],
            ],
        )

        # Act
        report = service.analyze(rotation_loop)

        # Assert
        assert rotation_loop.var_names == ("x", "y", "z", "t", "s")
        assert report.dim_Enr == 2
        assert report.dim_Er == 3
        assert set_equivalent(report.ant_set, expected)
        real = report.verdict(Domain.REAL)
        assert real.verdict == Verdict.NON_TERMINATING
        assert real.witness[3:] == (0, 0)
        integer = report.verdict(Domain.INTEGER)
        assert integer.verdict == Verdict.UNKNOWN
        assert "non-real" in integer.note

    def test_affine_doubling_loop(self, service, cook_loop, build_set):
        """Test that x := 2x, y := y + 1 under -x > -2^30 is ANT exactly on x <= 0."""
        # Arrange
        expected = build_set(2, [[([-1, 0], GT)], [([1, 0], EQ)]])
        terminating = build_set(2, [[([1, 0], GT)]])

        # Act
        report = service.analyze(cook_loop)

        # Assert
        assert report.embedding.homogenized
        assert report.ant_set.dimension == 2
        assert set_equivalent(report.ant_set, expected)
        assert set_equivalent(report.terminating_set, terminating)
        assert report.verdict(Domain.REAL).verdict == Verdict.NON_TERMINATING

    def test_unipotent_cascade(self, service, cascade_loop, build_set):
        """Test the locus of a single Jordan block of eigenvalue 1."""
        # Arrange
        expected = build_set(
            3,
            [
                [([0, 0, 1], GT)],
                [([0, 0, 1], EQ), ([0, 1, 0], GT)],
                [([0, 0, 1], EQ), ([0, 1, 0], EQ), ([1, 0, 0], GT)],
            ],
        )

        # Act
        report = service.analyze(cascade_loop)

        # Assert
        assert set_equivalent(report.ant_set, expected)

    def test_rational_but_not_integer(self, service, half_loop, build_set):
        """Test a loop that runs forever only from x = 1/2."""
        # Arrange
        expected = build_set(1, [[([2], EQ, -1)]])

        # Act
        report = service.analyze(half_loop)

        # Assert
        assert report.ant_set.dimension == 1
        assert all(membership(report.ant_set, [x]) == (x == R(1, 2)) for x in (R(1, 2), 0, 1, R(1, 3)))
        assert report.verdict(Domain.REAL).witness == (R(1, 2),)
        assert report.verdict(Domain.RATIONAL).verdict == Verdict.NON_TERMINATING
        assert report.verdict(Domain.INTEGER).verdict == Verdict.TERMINATING
        assert set_equivalent(report.ant_set, expected)

    def test_terminating_loop(self, service):
        """Test that x := x - 1 under x > 0 terminates everywhere."""
        # Arrange
        program = build_program(
            ["x"], qmatrix([[1]]), qmatrix([[-1]]), qmatrix([[1]]), qmatrix([[0]]), name="countdown"
        )

        # Act
        report = service.analyze(program)

        # Assert
        assert report.ant_set.cells == ()
        for domain in Domain:
            assert report.verdict(domain).verdict == Verdict.TERMINATING
            assert report.verdict(domain).witness is None

    def test_pure_rotation_has_empty_locus(self, service):
        """Test that a rotation without real eigenvalues leaves nothing to analyze and terminates."""
        # Arrange
        program = homogeneous(qmatrix([[0, -1], [1, 0]]), qmatrix([[1, 0]]), ["x", "y"])

        # Act
        report = service.analyze(program)

        # Assert
        assert report.dim_Er == 0
        assert report.dim_Enr == 2
        assert report.ant_set.cells == ()
        assert report.verdict(Domain.REAL).verdict == Verdict.TERMINATING

    def test_irrational_spectrum_is_refused(self, service):
        """Test that x := 2y, y := x, with eigenvalues ±√2, is refused with the offending factor."""
        # Arrange
        program = homogeneous(qmatrix([[0, 2], [1, 0]]), qmatrix([[1, 0]]), ["x", "y"])

        # Act & Assert
        with pytest.raises(IrrationalSpectrumError, match="T\\*\\*2 - 2"):
            service.analyze(program)

    def test_diagonalizable_locus(self, service, diagonal_matrix, diagonal_guard, build_set):
        """Test the locus of a 5×5 diagonalizable loop whose repeated eigenvalue collapses in the K quotient."""
        # Arrange
        spec = decompose(diagonal_matrix, diagonal_guard)
        # Jordan coordinates: x2, x5, x6a, x6b, x9
        six = [0, 0, R(-5, 2), R(-3, 4), 0]
        in_jordan = build_set(
            5,
            [
                [([0, 0, 0, 0, -1], GT)],
                [([0, 0, 0, 0, 1], EQ), (six, GT)],
                [([0, 0, 0, 0, 1], EQ), (six, EQ), ([0, -1, 0, 0, 0], GT)],
                [([0, 0, 0, 0, 1], EQ), (six, EQ), ([0, 1, 0, 0, 0], EQ), ([-1, 0, 0, 0, 0], GT)],
            ],
        )
        expected = pullback(in_jordan, spec.P_inverse)
        program = homogeneous(diagonal_matrix, diagonal_guard, ["u1", "u2", "u3", "u4", "u5"])

        # Act
        report = service.analyze(program)

        # Assert
        assert report.conditions[0].trace.dim_K == 1
        assert report.conditions[0].method == "normal"
        assert set_equivalent(report.ant_set, expected)

    def test_degenerate_eight_by_eight(
        self, service, reduction_matrix, reduction_guard, reduction_basis, mirrored_pair
    ):
        """Test that the 8×8 locus is the mirrored-pair locus read in the last six coordinates of R⁻¹·y."""
        # Arrange
        program = homogeneous(reduction_matrix, reduction_guard, [f"u{i}" for i in range(1, 9)])
        R_inverse = inverse(reduction_basis)
        rng = random.Random(11)
        points = [Matrix([rng.randint(-3, 3) for _ in range(8)]) for _ in range(40)]
        points += [reduction_basis * Matrix([rng.randint(-2, 2) for _ in range(6)] + [0, 0]) for _ in range(30)]
        points += [reduction_basis * Matrix([1, 1, 0, 1, 0, -1, 1, -1])]

        # Act
        report = service.analyze(program)

        # Assert
        assert report.conditions[0].method == "regular"
        assert report.conditions[0].trace.n_a == 6
        for y in points:
            regular = list(R_inverse * y)[2:]
            assert membership(report.ant_set, list(y)) == point_ant(mirrored_pair, regular)

    def test_parallel_rows_match_sequential(self, half_loop):
        """Test that threaded per-row analysis gives the same locus."""
        # Arrange
        sequential = AnalysisService(int_budget=100, max_workers=1)
        threaded = AnalysisService(int_budget=100, max_workers=2)

        # Act
        a = sequential.analyze(half_loop)
        b = threaded.analyze(half_loop)

        # Assert
        assert set_equivalent(a.ant_set, b.ant_set)

    def test_decide_termination(self, service, half_loop):
        """Test the single-domain entry point."""
        # Act
        verdict = service.decide_termination(half_loop, Domain.INTEGER)

        # Assert
        assert verdict.domain == Domain.INTEGER
        assert verdict.verdict == Verdict.TERMINATING

"""
Unit tests for the random loop generator.
"""

from src.models.loop_models import LoopClass
from src.services.frontend_service import program_to_json
from src.services.generator_service import PRESETS, GeneratorService, resolve_ranges
from src.util.exact_arith import char_poly, rational_roots


class TestGeneratorService:
    """Test seeded program generation."""

    def test_same_seed_same_corpus(self):
        """Test that two generators with one seed produce identical programs."""
        # Act
        first = GeneratorService(seed=11).corpus(4, (3, 4), (2, 3))
        second = GeneratorService(seed=11).corpus(4, (3, 4), (2, 3))

        # Assert
        assert [program_to_json(p) for p in first] == [program_to_json(p) for p in second]

    def test_classes_cycle(self):
        """Test the naming and the homogeneous, generalized, affine rotation."""
        # Act
        programs = GeneratorService(seed=3).corpus(4, (3, 3), (2, 4))

        # Assert
        assert [p.name for p in programs] == [
            "homogeneous-0000",
            "generalized-0001",
            "affine-0002",
            "homogeneous-0003",
        ]
        assert [p.class_tag for p in programs] == [
            LoopClass.HOMOGENEOUS,
            LoopClass.GENERALIZED,
            LoopClass.AFFINE,
            LoopClass.HOMOGENEOUS,
        ]

    def test_guard_row_counts(self):
        """Test that homogeneous loops get one guard row and generalized loops at least two."""
        # Arrange
        generator = GeneratorService(seed=5)

        # Act
        homogeneous = generator.program(3, 4, LoopClass.HOMOGENEOUS)
        generalized = generator.program(3, 1, LoopClass.GENERALIZED)

        # Assert
        assert homogeneous.m == 1
        assert generalized.m == 2

    def test_rational_spectrum(self):
        """Test that every eigenvalue of a generated update matrix is rational."""
        # Arrange
        generator = GeneratorService(seed=7)

        for n in (3, 5):
            # Act
            program = generator.program(n, 2, LoopClass.GENERALIZED)

            # Assert
            assert sum(multiplicity for _, multiplicity in rational_roots(char_poly(program.A))) == n
            assert program.var_names == tuple(f"x{i + 1}" for i in range(n))

    def test_unimodular(self):
        """Test that the change of basis has determinant one and integer entries."""
        # Act
        P = GeneratorService(seed=2).unimodular(4)

        # Assert
        assert P.det() == 1
        assert all(v.is_integer for v in P)

    def test_resolve_ranges(self):
        """Test that explicit ranges override the preset and small is the default."""
        # Act & Assert
        assert resolve_ranges(None, None, None) == (PRESETS["small"]["dimension"], PRESETS["small"]["conditions"])
        assert resolve_ranges("large", None, (1, 1)) == ((7, 15), (1, 1))
        assert resolve_ranges("medium", (2, 2), None) == ((2, 2), (2, 4))

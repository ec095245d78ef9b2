"""
Unit tests for the command router.
"""

from src.api.router import build_parser, join_option_values, to_config


class TestJoinOptionValues:
    """Test attaching option values that start with a minus sign."""

    def test_negative_point_is_attached(self):
        """Test that a point with a leading minus becomes part of the --init flag."""
        # Act
        arguments = join_option_values(["simulate", "loop.txt", "--init", "-9,3,-2", "--horizon", "30"])

        # Assert
        assert arguments == ["simulate", "loop.txt", "--init=-9,3,-2", "--horizon", "30"]

    def test_other_arguments_are_kept(self):
        """Test that arguments already joined or unrelated pass through unchanged."""
        # Arrange
        arguments = ["simulate", "-", "--init=-1/2", "--exact"]

        # Act & Assert
        assert join_option_values(arguments) == arguments

    def test_trailing_flag_is_kept(self):
        """Test that a missing value is left for the parser to report."""
        # Act & Assert
        assert join_option_values(["simulate", "--init"]) == ["simulate", "--init"]


class TestToConfig:
    """Test flag validation into the command configuration."""

    def test_negative_initial_point(self):
        """Test that a negative-leading initial point parses to exact rationals."""
        # Arrange
        parser = build_parser()
        args = parser.parse_args(join_option_values(["simulate", "loop.txt", "--init", "-9,3/2,-2"]))

        # Act
        config = to_config(args)

        # Assert
        assert [str(v) for v in config.initial] == ["-9", "3/2", "-2"]

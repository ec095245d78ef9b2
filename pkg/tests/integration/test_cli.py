"""
Integration tests for the antloop command.
Runs the commands end to end on program files and corpora and checks output and exit codes.
"""

import json

import pytest

from src.main import main
from tests.conftest import EXAMPLE_ONE_SOURCE, HALF_SOURCE

pytestmark = pytest.mark.integration


@pytest.fixture
def example_file(tmp_path):
    path = tmp_path / "example_one.loop"
    path.write_text(EXAMPLE_ONE_SOURCE, encoding="utf-8")
    return str(path)


@pytest.fixture
def half_file(tmp_path):
    path = tmp_path / "half.loop"
    path.write_text(HALF_SOURCE, encoding="utf-8")
    return str(path)


def test_analyze_non_terminating(example_file, capsys):
    """Test the text report and exit code 1 of a non-terminating loop."""
    # Act
    code = main(["analyze", example_file])

    # Assert
    out = capsys.readouterr().out
    assert code == 1
    assert "Locus of ANT:" in out
    assert "Verdict (real): NonTerminating" in out


def test_analyze_integer_domain(half_file, capsys):
    """Test that the integer domain sets the exit code."""
    # Act
    real = main(["analyze", half_file])
    integer = main(["analyze", half_file, "--domain", "integer"])

    # Assert
    assert real == 1
    assert integer == 0


def test_analyze_json_format(example_file, capsys):
    """Test that the JSON report is valid JSON with the verdicts."""
    # Act
    code = main(["analyze", example_file, "--format", "json", "--trace"])

    # Assert
    data = json.loads(capsys.readouterr().out)
    assert code == 1
    assert data["variables"] == ["x", "y", "z"]
    assert data["conditions"][0]["method"] == "normal"


def test_analyze_smt2_format(example_file, capsys):
    """Test the SMT-LIB export."""
    # Act
    main(["analyze", example_file, "--format", "smt2"])

    # Assert
    assert "(set-logic QF_LRA)" in capsys.readouterr().out


def test_analyze_irrational_spectrum(tmp_path, capsys):
    """Test exit code 65 for an irrational real eigenvalue."""
    # Arrange
    path = tmp_path / "irrational.json"
    path.write_text(json.dumps({"vars": ["x", "y"], "A": [[0, 2], [1, 0]], "F": [[1, 0]]}), encoding="utf-8")

    # Act
    code = main(["analyze", str(path), "--json"])

    # Assert
    assert code == 65
    assert capsys.readouterr().out == ""


def test_analyze_syntax_error(tmp_path):
    """Test that malformed source is a usage error."""
    # Arrange
    path = tmp_path / "broken.loop"
    path.write_text("while (x > 0 { x := x; }", encoding="utf-8")

    # Act & Assert
    assert main(["analyze", str(path)]) == 64


def test_missing_program_file(tmp_path):
    """Test that an unreadable program file is an I/O error."""
    # Act & Assert
    assert main(["analyze", str(tmp_path / "absent.loop")]) == 66


def test_usage_errors(example_file):
    """Test invalid flags and flag combinations."""
    # Act & Assert
    assert main([]) == 64
    assert main(["analyze", example_file, "--domain", "complex"]) == 64
    assert main(["analyze", example_file, "--horizon", "10"]) == 64
    assert main(["simulate", example_file]) == 64
    assert main(["simulate", example_file, "--init", "1,x,2"]) == 64
    assert main(["generate", "--count", "-1"]) == 64
    assert main(["analyze", example_file, "--log-level", "LOUD"]) == 64


def test_simulate_violation(example_file, capsys):
    """Test that a point leaving the guard exits with 0 and reports the violation step."""
    # Act
    code = main(["simulate", example_file, "--init", "1,0,0", "--horizon", "20", "--exact"])

    # Assert
    out = capsys.readouterr().out
    assert code == 0
    assert "violated at k=" in out


def test_simulate_positive_tail(example_file, capsys):
    """Test that an ANT point outside the guard exits with 0 and still shows a positive tail."""
    # Act
    code = main(["simulate", example_file, "--init", "-9,3,-2", "--horizon", "30"])

    # Assert
    out = capsys.readouterr().out
    assert code == 0
    assert out.rstrip().endswith("Horizon check (K=30): PositiveTail(k0=2)")


def test_simulate_attached_initial_point(example_file, capsys):
    """Test that the --init=VALUE form gives the same result as a separate value."""
    # Act
    attached = main(["simulate", example_file, "--init=-9,3,-2", "--horizon", "30"])
    attached_out = capsys.readouterr().out
    separate = main(["simulate", example_file, "--init", "-9,3,-2", "--horizon", "30"])
    separate_out = capsys.readouterr().out

    # Assert
    assert attached == separate == 0
    assert attached_out == separate_out


def test_analyze_complex_block(tmp_path, capsys):
    """Test that a loop with a rotation block outside the guard is analyzed on its real part."""
    # Arrange
    program = {
        "vars": ["p", "q", "x", "y", "z"],
        "A": [[1, -1, 0, 0, 0], [1, 1, 0, 0, 0], [0, 0, -20, -9, 75], [0, 0, 7, 8, -21], [0, 0, -7, -3, 26]],
        "F": [[0, 0, 1, "-1/2", -2]],
    }
    path = tmp_path / "complex.json"
    path.write_text(json.dumps(program), encoding="utf-8")

    # Act
    code = main(["analyze", str(path), "--json", "--format", "json"])

    # Assert
    data = json.loads(capsys.readouterr().out)
    assert code == 1
    assert data["dim_Er"] == 3
    assert data["dim_Enr"] == 2


def test_simulate_survives_horizon(half_file, capsys):
    """Test that the fixed point survives the horizon with exit code 2."""
    # Act
    code = main(["simulate", half_file, "--init", "1/2", "--horizon", "25", "--trace"])

    # Assert
    out = capsys.readouterr().out
    assert code == 2
    assert "PositiveTail(k0=0)" in out


def test_simulate_dimension_mismatch(example_file):
    """Test that a wrongly sized initial point is a usage error."""
    # Act & Assert
    assert main(["simulate", example_file, "--init", "1,2"]) == 64


def test_generate_then_check(tmp_path, capsys):
    """Test that a generated corpus is reproducible and passes the property suite."""
    # Arrange
    first = tmp_path / "first"
    second = tmp_path / "second"
    flags = ["--count", "3", "--dim", "2:3", "--cond", "2", "--seed", "9"]

    # Act
    generated = main(["generate", *flags, "--output", str(first)])
    main(["generate", *flags, "--output", str(second)])
    checked = main(["check", str(first), "--horizon", "200", "--int-budget", "300"])

    # Assert
    out = capsys.readouterr().out
    assert generated == 0
    for name in ("homogeneous-0000", "generalized-0001", "affine-0002"):
        assert (first / f"{name}.json").read_text() == (second / f"{name}.json").read_text()
    assert json.loads((first / "manifest.json").read_text())["seed"] == 9
    assert checked == 0
    assert "#Loops" in out


def test_check_missing_corpus(tmp_path):
    """Test exit code 66 for a missing corpus directory."""
    # Act & Assert
    assert main(["check", str(tmp_path / "absent")]) == 66

"""
Unit tests for the corpus client.
"""

import json

import pytest

from src.clients.corpus_client import MANIFEST, CorpusClient, read_source
from src.services.frontend_service import program_to_json
from src.util.errors import CorpusError


class TestCorpusClient:
    """Test writing and reading corpus directories."""

    def test_write_then_read(self, tmp_path, example_one, half_loop):
        """Test that written programs read back sorted by id with their data."""
        # Arrange
        client = CorpusClient(str(tmp_path / "corpus"))

        # Act
        paths = client.write([half_loop, example_one], {"seed": 42})
        entries = client.read()

        # Assert
        assert [path.name for path in paths] == ["half.json", "example_one.json"]
        assert [entry.name for entry in entries] == ["example_one", "half"]
        assert program_to_json(entries[1].program) == program_to_json(half_loop)
        assert entries[0].data["name"] == "example_one"

    def test_manifest(self, tmp_path, cook_loop):
        """Test that the manifest records the parameters and the program ids."""
        # Arrange
        client = CorpusClient(str(tmp_path))

        # Act
        client.write([cook_loop], {"seed": 1, "preset": "small"})

        # Assert
        assert client.manifest() == {"seed": 1, "preset": "small", "programs": ["cook"]}

    def test_missing_manifest(self, tmp_path):
        """Test that a hand-made corpus without a manifest is accepted."""
        # Act & Assert
        assert CorpusClient(str(tmp_path)).manifest() == {}

    def test_missing_directory(self, tmp_path):
        """Test that reading a missing directory fails."""
        # Act & Assert
        with pytest.raises(CorpusError):
            CorpusClient(str(tmp_path / "absent")).read()

    def test_unreadable_program(self, tmp_path):
        """Test that a malformed program file fails the whole read."""
        # Arrange
        (tmp_path / "broken.json").write_text(json.dumps({"vars": ["x"], "A": [[1]]}), encoding="utf-8")

        # Act & Assert
        with pytest.raises(CorpusError):
            CorpusClient(str(tmp_path)).read()

    def test_read_source(self, tmp_path):
        """Test reading program text with the file stem as name."""
        # Arrange
        path = tmp_path / "countdown.loop"
        path.write_text("while (x > 0) { x := x - 1; }\n", encoding="utf-8")

        # Act
        text, name = read_source(str(path))

        # Assert
        assert name == "countdown"
        assert text.startswith("while")
        with pytest.raises(CorpusError):
            read_source(str(tmp_path / "absent.loop"))

    def test_manifest_file_name(self, tmp_path, cook_loop):
        """Test that the manifest is not read as a program."""
        # Arrange
        client = CorpusClient(str(tmp_path))
        client.write([cook_loop], {})

        # Act
        entries = client.read()

        # Assert
        assert (tmp_path / MANIFEST).exists()
        assert [entry.name for entry in entries] == ["cook"]

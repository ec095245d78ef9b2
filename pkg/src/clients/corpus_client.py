"""
Client for reading and writing loop program corpora.
A corpus is a directory of JSON programs plus a manifest.json recording how it was produced.
"""

import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from src.config import settings
from src.models.loop_models import LoopProgram
from src.services.frontend_service import load_program, program_to_json
from src.util.errors import CorpusError
from src.util.helpers import to_json

logger = logging.getLogger(__name__)

MANIFEST = "manifest.json"


class CorpusEntry:
    """A program read from a corpus together with its raw JSON data."""

    def __init__(self, program: LoopProgram, data: Dict[str, Any], path: Path):
        self.program = program
        self.data = data
        self.path = path

    @property
    def name(self) -> str:
        return self.program.name or self.path.stem


class CorpusClient:
    """Client for corpus directories."""

    def __init__(self, directory: Optional[str] = None):
        """
        Initialize the corpus client.

        Args:
            directory: Corpus directory. If not provided, uses CORPUS_DIR from settings.
        """
        self.directory = Path(directory or settings.CORPUS_DIR)
        logger.debug(f"Corpus client initialized for {self.directory}")

    def write(self, programs: Sequence[LoopProgram], manifest: Dict[str, Any]) -> List[Path]:
        """
        Write one JSON file per program and the manifest.

        Args:
            programs: Programs to write, each with a name
            manifest: Generation parameters; the program ids are added

        Returns:
            Paths of the written program files

        Raises:
            CorpusError: If the directory cannot be written
        """
        try:
            self.directory.mkdir(parents=True, exist_ok=True)
            paths = []
            for program in programs:
                path = self.directory / f"{program.name}.json"
                path.write_text(to_json(program_to_json(program)) + "\n", encoding="utf-8")
                paths.append(path)
            content = dict(manifest, programs=[program.name for program in programs])
            (self.directory / MANIFEST).write_text(to_json(content) + "\n", encoding="utf-8")
        except OSError as e:
            logger.error(f"Failed to write corpus to {self.directory}: {e}")
            raise CorpusError(f"Cannot write corpus to {self.directory}: {e}") from e
        logger.info(f"Wrote {len(paths)} programs to {self.directory}")
        return paths

    def manifest(self) -> Dict[str, Any]:
        """The manifest, or an empty dict for hand-made corpora without one."""
        path = self.directory / MANIFEST
        if not path.exists():
            return {}
        try:
            return json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            logger.error(f"Failed to read manifest {path}: {e}")
            raise CorpusError(f"Cannot read manifest {path}: {e}") from e

    def read(self) -> List[CorpusEntry]:
        """
        Read every program of the corpus, sorted by program id.

        Raises:
            CorpusError: If the directory is missing or a file cannot be parsed
        """
        if not self.directory.is_dir():
            raise CorpusError(f"Corpus directory {self.directory} does not exist")
        entries = []
        for path in sorted(self.directory.glob("*.json")):
            if path.name == MANIFEST:
                continue
            try:
                text = path.read_text(encoding="utf-8")
                data = json.loads(text)
                if not isinstance(data, dict):
                    raise ValueError("a corpus program must be a JSON object")
                program = load_program(text, data.get("name") or path.stem)
            except (OSError, ValueError) as e:
                logger.error(f"Failed to read corpus program {path}: {e}")
                raise CorpusError(f"Cannot read {path}: {e}") from e
            entries.append(CorpusEntry(program, data, path))
        entries.sort(key=lambda entry: entry.name)
        logger.info(f"Read {len(entries)} programs from {self.directory}")
        return entries


def read_source(source: Optional[str]) -> Tuple[str, Optional[str]]:
    """
    Read program text from a file path, or from stdin for "-" or None.

    Returns:
        Tuple (text, name) where name is the file stem

    Raises:
        CorpusError: If the file cannot be read
    """
    if source is None or source == "-":
        return sys.stdin.read(), None
    path = Path(source)
    try:
        return path.read_text(encoding="utf-8"), path.stem
    except OSError as e:
        logger.error(f"Failed to read program {path}: {e}")
        raise CorpusError(f"Cannot read {path}: {e}") from e

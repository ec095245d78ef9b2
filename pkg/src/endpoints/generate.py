"""
Generate command for the linear loop ANT analyzer.
Writes a seeded random corpus of loop programs and its manifest.
"""

import logging
import sys

from src.clients.corpus_client import CorpusClient
from src.models.report_models import CliConfig, ExitCode
from src.services.generator_service import GeneratorService, resolve_ranges

logger = logging.getLogger(__name__)


def cmd_generate(cfg: CliConfig) -> ExitCode:
    """
    Generate cfg.count programs into cfg.output.

    Returns:
        0 on success, 66 when the corpus cannot be written
    """
    dimension, conditions = resolve_ranges(cfg.preset, cfg.dimension, cfg.conditions)
    generator = GeneratorService(seed=cfg.seed)
    programs = generator.corpus(cfg.count, dimension, conditions, cfg.loop_class)
    manifest = {
        "seed": cfg.seed,
        "count": cfg.count,
        "preset": cfg.preset,
        "dimension": list(dimension),
        "conditions": list(conditions),
        "class": cfg.loop_class.value if cfg.loop_class else None,
    }
    client = CorpusClient(cfg.output)
    try:
        paths = client.write(programs, manifest)
    except ValueError as e:
        logger.error(f"Corpus generation failed: {e}")
        return ExitCode.for_error(e)
    sys.stdout.write(f"Wrote {len(paths)} programs to {client.directory}\n")
    return ExitCode.TERMINATING

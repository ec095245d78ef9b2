"""
Check command for the linear loop ANT analyzer.
Runs the property suite over a corpus and prints per-program results and the per-class summary.
"""

import asyncio
import logging
import sys

from src.clients.corpus_client import CorpusClient
from src.models.report_models import CliConfig, ExitCode, OutputFormat
from src.services.check_service import CheckService, results_to_text, summarize, summary_to_text
from src.util.helpers import to_json

logger = logging.getLogger(__name__)


def cmd_check(cfg: CliConfig) -> ExitCode:
    """
    Check every program of the corpus.

    Returns:
        0 when every property holds, 1 on any failure, 66 when the corpus cannot be read
    """
    try:
        entries = CorpusClient(cfg.input).read()
    except ValueError as e:
        logger.error(f"Cannot check corpus: {e}")
        return ExitCode.for_error(e)

    service = CheckService(horizon=cfg.horizon, int_budget=cfg.int_budget, seed=cfg.seed)
    results = asyncio.run(service.check_corpus(entries))
    rows = summarize(results)
    if cfg.output_format == OutputFormat.JSON:
        data = {
            "programs": [result.model_dump() for result in results],
            "summary": [row.model_dump() for row in rows],
        }
        sys.stdout.write(to_json(data) + "\n")
    else:
        sys.stdout.write(results_to_text(results))
        sys.stdout.write(summary_to_text(rows))

    failures = [result.name for result in results if not result.passed]
    if failures:
        logger.warning(f"{len(failures)} of {len(results)} programs failed: {', '.join(failures)}")
        return ExitCode.NON_TERMINATING
    logger.info(f"All {len(results)} programs passed")
    return ExitCode.TERMINATING

"""
Analyze command for the linear loop ANT analyzer.
Reads one program, computes its ANT locus and prints the report in the requested format.
"""

import logging
import sys

from src.clients.corpus_client import read_source
from src.models.loop_models import LoopProgram
from src.models.report_models import AnalysisReport, CliConfig, ExitCode, OutputFormat
from src.services.analysis_service import AnalysisService
from src.services.frontend_service import load_program, parse_json
from src.services.render_service import report_to_json, report_to_smt2, report_to_text
from src.util.helpers import to_json

logger = logging.getLogger(__name__)


def read_program(cfg: CliConfig) -> LoopProgram:
    """Program named by the configuration, from a file or stdin."""
    text, name = read_source(cfg.input)
    if cfg.json_input:
        return parse_json(text, name)
    return load_program(text, name)


def render_report(report: AnalysisReport, cfg: CliConfig) -> str:
    if cfg.output_format == OutputFormat.JSON:
        return to_json(report_to_json(report, cfg.trace)) + "\n"
    if cfg.output_format == OutputFormat.SMT2:
        return report_to_smt2(report)
    return report_to_text(report, cfg.trace)


def cmd_analyze(cfg: CliConfig) -> ExitCode:
    """
    Analyze a program and print its report.

    Args:
        cfg: Validated configuration of the analyze command

    Returns:
        Exit code of the verdict for the requested domain, or of the failure
    """
    try:
        program = read_program(cfg)
        report = AnalysisService(int_budget=cfg.int_budget).analyze(program)
    except ValueError as e:
        logger.error(f"Analysis failed: {e}")
        return ExitCode.for_error(e)
    except Exception as e:
        logger.exception(f"Internal error during analysis: {e}")
        return ExitCode.INTERNAL

    sys.stdout.write(render_report(report, cfg))
    verdict = report.verdict(cfg.domain)
    logger.info(f"Verdict over {cfg.domain.value}: {verdict.verdict.value}")
    return ExitCode.for_verdict(verdict.verdict)

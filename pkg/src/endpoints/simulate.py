"""
Simulate command for the linear loop ANT analyzer.
Runs a program exactly from an initial point and reports the first guard violation.
"""

import logging
import sys

from src.config import settings
from src.endpoints.analyze import read_program
from src.models.report_models import CliConfig, ExitCode
from src.services.render_service import horizon_to_text, trace_to_text
from src.services.simulation_service import check_ant_at_horizon, run
from src.util.errors import DimensionMismatchError

logger = logging.getLogger(__name__)


def cmd_simulate(cfg: CliConfig) -> ExitCode:
    """
    Simulate a program for at most the horizon and print the guard values.

    The exit code is 0 when the guard failed within the horizon, 2 when it did not.
    """
    horizon = cfg.horizon or settings.DEFAULT_HORIZON
    try:
        program = read_program(cfg)
        if len(cfg.initial) != program.n:
            raise DimensionMismatchError(f"Initial point has {len(cfg.initial)} values, program has {program.n}")
        trace = run(program, cfg.initial, horizon)
        tail = check_ant_at_horizon(program, cfg.initial, horizon)
    except ValueError as e:
        logger.error(f"Simulation failed: {e}")
        return ExitCode.for_error(e)

    sys.stdout.write(trace_to_text(trace, program.var_names, exact=cfg.exact, show_states=cfg.trace))
    sys.stdout.write(horizon_to_text(tail))
    return ExitCode.TERMINATING if trace.terminated else ExitCode.UNKNOWN

"""
Command router for the linear loop ANT analyzer.
Builds the argument parser, validates flags into a CliConfig and dispatches to the command handlers.
"""

import argparse
import logging
import sys
from typing import Callable, Dict, List, Optional, Sequence

from pydantic import ValidationError

from src.config import settings
from src.endpoints.analyze import cmd_analyze
from src.endpoints.check import cmd_check
from src.endpoints.generate import cmd_generate
from src.endpoints.simulate import cmd_simulate
from src.models.report_models import CliConfig, ExitCode
from src.services.generator_service import PRESETS
from src.util.helpers import parse_range, parse_rational_list
from src.util.logging import configure_logging

logger = logging.getLogger(__name__)

# Command handlers by subcommand name
COMMANDS: Dict[str, Callable[[CliConfig], ExitCode]] = {
    "analyze": cmd_analyze,
    "simulate": cmd_simulate,
    "generate": cmd_generate,
    "check": cmd_check,
}


class UsageError(Exception):
    """Raised by the parser instead of exiting the process."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:
        raise UsageError(message)


def join_option_values(arguments: Sequence[str], options: Sequence[str] = ("--init",)) -> List[str]:
    """
    Attach the value of each listed option to its flag, so points such as `-9,3,-2` are not read as flags.

    Args:
        arguments: Raw command-line arguments
        options: Flags whose next argument is always their value

    Returns:
        Arguments with `--init -9,3,-2` rewritten to `--init=-9,3,-2`
    """
    joined: List[str] = []
    pending: Optional[str] = None
    for argument in arguments:
        if pending is not None:
            joined.append(f"{pending}={argument}")
            pending = None
        elif argument in options:
            pending = argument
        else:
            joined.append(argument)
    if pending is not None:
        joined.append(pending)
    return joined


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--int-budget", type=int, default=None, help="branch-and-bound nodes per cell")
    parser.add_argument("--seed", type=int, default=None, help="random seed")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subcommand per command."""
    parser = _Parser(
        prog="antloop",
        description="Compute the asymptotically non-terminating inputs of linear and affine while loops.",
    )
    parser.add_argument("--version", action="version", version=f"{settings.APP_NAME} {settings.APP_VERSION}")
    commands = parser.add_subparsers(dest="command", parser_class=_Parser)

    analyze = commands.add_parser("analyze", help="analyze a loop program")
    analyze.add_argument("input", nargs="?", default="-", help="program file, or - for stdin")
    analyze.add_argument("--domain", choices=["real", "rational", "integer"], default="real")
    analyze.add_argument("--format", dest="output_format", choices=["text", "json", "smt2"], default=None)
    analyze.add_argument("--trace", action="store_true", help="print the reduction of every guard row")
    analyze.add_argument("--json", dest="json_input", action="store_true", help="read the input as JSON matrices")
    analyze.add_argument("--horizon", type=int, default=None, help=argparse.SUPPRESS)
    _add_common(analyze)

    simulate = commands.add_parser("simulate", help="run a loop program from an initial point")
    simulate.add_argument("input", nargs="?", default="-", help="program file, or - for stdin")
    simulate.add_argument("--init", required=True, help="initial point, e.g. -9,3,-2 or 1/2")
    simulate.add_argument("--horizon", type=int, default=None, help="maximum number of iterations")
    simulate.add_argument("--exact", action="store_true", help="print exact fractions")
    simulate.add_argument("--trace", action="store_true", help="print every visited state")
    simulate.add_argument("--json", dest="json_input", action="store_true", help="read the input as JSON matrices")
    _add_common(simulate)

    generate = commands.add_parser("generate", help="write a random corpus of loop programs")
    generate.add_argument("--count", type=int, required=True, help="number of programs")
    generate.add_argument("--dim", default=None, help="variable count, n or lo:hi")
    generate.add_argument("--cond", default=None, help="guard row count, m or lo:hi")
    generate.add_argument("--class", dest="loop_class", choices=["homogeneous", "generalized", "affine"])
    generate.add_argument("--preset", choices=sorted(PRESETS), default=None)
    generate.add_argument("--output", default=None, help="corpus directory")
    _add_common(generate)

    check = commands.add_parser("check", help="run the property suite over a corpus")
    check.add_argument("input", nargs="?", default=None, help="corpus directory")
    check.add_argument("--horizon", type=int, default=None, help="simulation horizon")
    check.add_argument("--format", dest="output_format", choices=["text", "json"], default=None)
    _add_common(check)
    return parser


def to_config(args: argparse.Namespace) -> CliConfig:
    """
    Validate parsed arguments into a CliConfig.

    Raises:
        ValidationError: If the flags are inconsistent
        ValueError: If a point or range cannot be parsed
    """
    options = vars(args)
    dimension = options.get("dim")
    conditions = options.get("cond")
    initial = options.get("init")
    return CliConfig(
        command=args.command,
        input=options.get("input") if args.command != "generate" else None,
        domain=options.get("domain") or "real",
        output_format=options.get("output_format") or settings.OUTPUT_FORMAT,
        horizon=options.get("horizon"),
        int_budget=settings.INT_BUDGET if options.get("int_budget") is None else options["int_budget"],
        seed=settings.DEFAULT_SEED if options.get("seed") is None else options["seed"],
        trace=bool(options.get("trace")),
        exact=bool(options.get("exact")),
        initial=parse_rational_list(initial) if initial is not None else None,
        count=options.get("count") or 0,
        dimension=parse_range(dimension) if dimension else None,
        conditions=parse_range(conditions) if conditions else None,
        loop_class=options.get("loop_class"),
        preset=options.get("preset"),
        output=options.get("output"),
        json_input=bool(options.get("json_input")),
    )


def dispatch(argv: Optional[Sequence[str]] = None) -> ExitCode:
    """
    Parse arguments and run the selected command.

    Args:
        argv: Command-line arguments without the program name

    Returns:
        Exit code of the command, USAGE for invalid flags
    """
    parser = build_parser()
    arguments = join_option_values(argv if argv is not None else [])
    try:
        args = parser.parse_args(arguments)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        logger.error(f"Usage error: {e}")
        return ExitCode.USAGE
    if args.command is None:
        parser.print_help(sys.stderr)
        return ExitCode.USAGE

    try:
        configure_logging(args.log_level)
        config = to_config(args)
    except (ValidationError, ValueError) as e:
        logger.error(f"Invalid flags for {args.command}: {e}")
        return ExitCode.USAGE
    return COMMANDS[config.command](config)

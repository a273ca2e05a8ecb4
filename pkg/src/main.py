#!/usr/bin/env python3
"""
Main entry point of the Wigner's friend simulator.
Handles argument parsing, configuration loading, and environment setup, then
runs the processor of the selected command.
"""

import argparse
import json
import logging
import sys
from datetime import datetime
from pathlib import Path
from typing import List, Optional
from dotenv import load_dotenv

from moduls.logger_setup import get_logger
from moduls.processing.command_processor import (
    COMMANDS,
    CHSH_TERMS,
    EXIT_INVALID_INPUT,
    EXIT_IO,
    EXIT_USAGE,
    InvariantInputError,
    RunConfig,
    UsageError,
)
from moduls.processing.simulation_processing import SimulationRunner
from moduls.result_writer import OUTPUT_FORMATS, OutputWriteError

AMPLITUDE_FLAGS = ("alpha", "beta", "a", "b")


def parse_arguments(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """
    Parse command line arguments. Unset simulation flags stay None so that the
    stage configuration can fill them in.

    Args:
        argv: Argument list (default: sys.argv[1:])

    Returns:
        Parsed arguments namespace
    """
    parser = argparse.ArgumentParser(
        description="Wigner's friend simulator: collapse vs. unitary predictions, records, "
        "partial collapse through a measure-and-prepare channel and local friendliness CHSH values"
    )

    parser.add_argument("command", choices=COMMANDS, help="What to compute")

    for name in AMPLITUDE_FLAGS:
        parser.add_argument(f"--{name}-mod", type=float, default=None, help=f"Modulus of amplitude {name}")
        parser.add_argument(f"--{name}-phase", type=float, default=None, help=f"Phase of amplitude {name} (radians)")

    parser.add_argument("--theta", type=float, default=None, help="Message basis angle theta (radians)")
    parser.add_argument("--phi", type=float, default=None, help="Message basis phase phi (radians)")
    parser.add_argument("--grid", type=int, default=None, help="Number of theta samples on [0, pi] for sweeps")
    parser.add_argument("--out", type=str, default="-", help="Output file, '-' for stdout (default)")
    parser.add_argument("--format", type=str, choices=OUTPUT_FORMATS, default=None, help="Output format")
    parser.add_argument("--seed", type=int, default=None, help="Seed for validate")
    parser.add_argument("--trials", type=int, default=None, help="Number of random trials for validate")
    parser.add_argument(
        "--subtract",
        type=str,
        choices=CHSH_TERMS,
        default=None,
        help="CHSH correlator that is subtracted, as <bob><wigner> (default: zx)",
    )

    parser.add_argument(
        "--stage",
        type=str,
        choices=["dev", "test", "prod"],
        default="prod",
        help="Execution stage (default: prod)",
    )
    parser.add_argument(
        "--log-level",
        type=str,
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        default=None,
        help="Logging level (default: DEBUG for dev/test, INFO for prod)",
    )
    parser.add_argument(
        "--log-file",
        type=str,
        default=None,
        help="Log file path (default: no file unless enabled in the stage config)",
    )

    return parser.parse_args(argv)


def load_configuration(stage: str) -> dict:
    """
    Load configuration based on the specified stage.

    Args:
        stage: Execution stage (dev, test, prod)

    Returns:
        Configuration dictionary
    """
    config_path = Path(__file__).parent.parent / "config" / f"{stage}.json"

    if not config_path.exists():
        raise FileNotFoundError(f"Configuration file not found: {config_path}")

    with open(config_path, "r", encoding="utf-8") as f:
        return json.load(f)


def setup_environment(stage: str) -> None:
    """
    Load environment variables (WFSIM_LOG_DIR) from the optional .env file.

    Args:
        stage: Execution stage (dev, test, prod)
    """
    env_file = Path(__file__).parent.parent / ".env"
    load_dotenv(env_file)


def main(argv: Optional[List[str]] = None) -> int:
    """
    Main application entry point.

    Returns:
        Exit code: 0 success, 1 validation failure or unexpected error,
        2 usage error, 3 invariant-violating input, 4 output error
    """
    try:
        args = parse_arguments(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    logger: Optional[logging.Logger] = None
    try:
        start_time = datetime.now()
        setup_environment(args.stage)
        config = load_configuration(args.stage)

        log_level = getattr(logging, args.log_level.upper(), None) if args.log_level else None
        logging_config = config.get("logging", {})
        logger = get_logger(
            stage=args.stage,
            log_level=log_level,
            log_file=args.log_file,
            name=__name__,
            file_logging=bool(logging_config.get("file_logging", False)),
            retention_days=int(logging_config.get("retention_days", 30)),
        )

        logger.info(f"Command '{args.command}' started")
        logger.info(f"Stage: {args.stage}")
        logger.debug(f"Config: {config}")

        run_config = RunConfig.from_sources(args, config)
        exit_code = SimulationRunner(run_config).run()

        duration = datetime.now() - start_time
        logger.info(f"Command '{args.command}' completed with exit code {exit_code}. Duration: {duration}")
        return exit_code

    except UsageError as e:
        _report(logger, f"Usage error: {e}")
        return EXIT_USAGE
    except InvariantInputError as e:
        _report(logger, f"Invalid input: {e}")
        return EXIT_INVALID_INPUT
    except OutputWriteError as e:
        _report(logger, f"Output error: {e}")
        return EXIT_IO
    except (FileNotFoundError, json.JSONDecodeError) as e:
        _report(logger, f"Configuration error: {e}")
        return EXIT_USAGE
    except Exception as e:
        _report(logger, f"Unexpected error: {e}", exc_info=True)
        return 1


def _report(logger: Optional[logging.Logger], message: str, exc_info: bool = False) -> None:
    if logger:
        logger.error(message, exc_info=exc_info)
    else:
        print(f"Error: {message}", file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())

"""CLI argument parsing and command implementations."""

import argparse
import logging
import sys
from typing import Any

from tabulate import tabulate

from .config import DEFAULT_OUT_DIR, THREADS_ENV, RunConfig, parse_config, resolve_threads
from .errors import ConfigError, OutputError, SpecwaveError
from .logging import setup_logging
from .service import ExperimentService, RunResult
from . import __version__

logger = logging.getLogger("specwave")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CRITERIA = 3

# Subcommand -> one-line help
COMMANDS = {
    "kernel-scan": "Scan sup |D|, sup |dD/dt| and the diffusion-symbol constant",
    "linear": "Run the linear damped wave flow and write its norm trace",
    "heat": "Run the heat flow of u0 + u1 and write its norm trace",
    "nonlinear": "Run the nonlinear exponential integrator and write its norm trace",
    "verify-matsumura": "Fit linear decay rates against the Matsumura-type exponents",
    "verify-diffusion": "Fit the decay of the solution minus the heat flow",
    "check-inequalities": "Check Gagliardo-Nirenberg, Sobolev and heat estimates numerically",
    "smalldata": "Check small-data global boundedness of the nonlinear flow",
    "sweep": "Classify nonlinear runs over a (p, q, eps, form) grid",
    "alphas": "List the decay index and Fujita exponent of documented operators",
}


def _format_cell(value: Any) -> Any:
    if isinstance(value, float):
        return f"{value:.6g}"
    if value is None:
        return "-"
    return value


def print_result(result: RunResult) -> None:
    """Print a run's summary table and output files to stdout."""
    if result.rows:
        rows = [[_format_cell(v) for v in row] for row in result.rows]
        print(tabulate(rows, headers=result.headers, tablefmt="simple"))
    if result.outputs:
        print()
        for path in result.outputs:
            print(f"  {path}")
    if result.passed is not None:
        print()
        print("PASS" if result.passed else "FAIL")


def run_config_from_args(args: argparse.Namespace) -> RunConfig:
    """Collect the command-line settings of one invocation."""
    return RunConfig(
        subcommand=args.command,
        config_path=args.config,
        overrides=list(args.overrides or []),
        out_dir=args.out,
        seed=args.seed,
        threads=resolve_threads(args.threads),
        exploratory=args.exploratory,
        verbose=args.verbose,
        quiet=args.quiet,
    )


def cmd_run(args: argparse.Namespace) -> int:
    """Run an experiment subcommand: parse config, run, print the summary."""
    run = run_config_from_args(args)
    config = parse_config(run)
    logger.debug("Using %d worker thread(s), seed %d, output in %s", run.threads, run.seed, run.out_dir)

    service = ExperimentService.from_run(run)
    result = service.run(run.subcommand, config)
    print_result(result)

    if result.passed is False:
        logger.error("%s: one or more criteria failed", run.subcommand)
        return EXIT_CRITERIA
    return EXIT_OK


def cmd_alphas(args: argparse.Namespace) -> int:
    """Alphas command: print the documented-operator catalog."""
    service = ExperimentService(args.out)
    print_result(service.alphas(parse_config(run_config_from_args(args))))
    return EXIT_OK


def cmd_version(args: argparse.Namespace) -> int:
    """Version command: print the installed version."""
    print(f"specwave {__version__}")
    return EXIT_OK


def _run_options(parser: argparse.ArgumentParser, suppress: bool = False) -> argparse.ArgumentParser:
    """Add the run flags to ``parser``.

    They are accepted before and after the subcommand. Subcommand copies use
    ``suppress=True``: a flag omitted there keeps the value given before the
    subcommand.
    """

    def default(value: Any) -> Any:
        return argparse.SUPPRESS if suppress else value

    parser.add_argument(
        "-c",
        "--config",
        default=default(None),
        help="JSON experiment config (missing keys take defaults)",
    )
    parser.add_argument(
        "-o",
        "--out",
        default=default(DEFAULT_OUT_DIR),
        help=f"Output directory (default: {DEFAULT_OUT_DIR})",
    )
    parser.add_argument(
        "--seed",
        type=int,
        default=default(0),
        help="Seed for random data and inequality trials (default: 0)",
    )
    parser.add_argument(
        "--threads",
        type=int,
        default=default(None),
        help=f"Worker threads (default: ${THREADS_ENV}, else 1)",
    )
    parser.add_argument(
        "--exploratory",
        action="store_true",
        default=default(False),
        help="Allow runs whose (p, q, alpha) is not admissible",
    )
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=default(None),
        metavar="KEY=VALUE",
        help="Override a config key (dotted for nested keys, repeatable)",
    )
    return parser


def create_parser() -> argparse.ArgumentParser:
    """Create and configure the argument parser."""
    parser = argparse.ArgumentParser(
        prog="specwave",
        description="Spectral experiments for damped wave equations with self-adjoint operators.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument(
        "-v",
        "--verbose",
        action="store_true",
        help="Enable verbose output (show debug messages)",
    )
    parser.add_argument(
        "-q",
        "--quiet",
        action="store_true",
        help="Suppress informational output (only show warnings/errors)",
    )

    _run_options(parser)

    subparsers = parser.add_subparsers(dest="command", help="Available commands")
    common = _run_options(argparse.ArgumentParser(add_help=False), suppress=True)

    for name, help_text in COMMANDS.items():
        sub = subparsers.add_parser(name, help=help_text, parents=[common])
        sub.set_defaults(func=cmd_alphas if name == "alphas" else cmd_run)

    version_parser = subparsers.add_parser("version", help="Show specwave version")
    version_parser.set_defaults(func=cmd_version)

    return parser


def main() -> None:
    """Main entry point for the CLI."""
    parser = create_parser()
    args = parser.parse_args()

    setup_logging(
        verbose=getattr(args, "verbose", False),
        quiet=getattr(args, "quiet", False),
    )

    if args.command is None:
        parser.print_help()
        return

    try:
        code = args.func(args)
    except ConfigError as e:
        logger.error("Configuration error: %s", e)
        code = EXIT_CONFIG
    except OutputError as e:
        logger.error("Output error: %s", e)
        code = EXIT_CONFIG
    except SpecwaveError as e:
        logger.error("Error: %s", e)
        code = EXIT_CONFIG

    if code:
        sys.exit(code)

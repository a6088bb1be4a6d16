"""Logging configuration for specwave.

Library modules log to the ``"specwave"`` logger and never add handlers;
only the CLI calls ``setup_logging``.
"""

import logging
import sys

logger = logging.getLogger("specwave")

DEFAULT_FORMAT = "%(message)s"
VERBOSE_FORMAT = "%(levelname)s: %(message)s"


def log_level(verbose: bool = False, quiet: bool = False) -> int:
    """Level for the CLI flags; ``quiet`` wins over ``verbose``."""
    if quiet:
        return logging.WARNING
    if verbose:
        return logging.DEBUG
    return logging.INFO


def setup_logging(verbose: bool = False, quiet: bool = False) -> None:
    """Send specwave messages to stderr.

    Python warnings (numpy overflow and invalid-value warnings from a run
    approaching blow-up) are captured onto the same handler, so ``-q`` hides
    them together with the INFO chatter.

    Args:
        verbose: Show DEBUG messages (clamp sizes, step counts, fit windows)
            with a level prefix.
        quiet: Only show warnings and errors.
    """
    level = log_level(verbose, quiet)
    handler = logging.StreamHandler(sys.stderr)
    handler.setLevel(level)
    handler.setFormatter(logging.Formatter(VERBOSE_FORMAT if verbose else DEFAULT_FORMAT))

    logging.captureWarnings(True)
    for target in (logger, logging.getLogger("py.warnings")):
        target.handlers.clear()
        target.addHandler(handler)
        target.setLevel(level)


def get_logger() -> logging.Logger:
    """Get the specwave logger."""
    return logger

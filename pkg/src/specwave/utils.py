"""Utility functions for specwave."""

import json
import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from pathlib import Path
from typing import Any, Callable, Iterable, TypeVar

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import OutputError

T = TypeVar("T")
R = TypeVar("R")

# -----------------------------------------------------------------------------
# Output Formatting Constants
# -----------------------------------------------------------------------------

# Significant digits for floats in CSV output (round-trips any double)
FLOAT_DIGITS = 17


def japanese_bracket(t: ArrayLike) -> NDArray[np.float64]:
    """Return <t> = (1 + t^2)^(1/2) elementwise."""
    return np.sqrt(1.0 + np.square(np.asarray(t, dtype=float)))


def format_float(value: float) -> str:
    """Format a float with 17 significant digits.

    Non-finite values are written as ``inf``, ``-inf`` or ``nan``; callers
    decide whether those may appear at all.
    """
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return format(value, f".{FLOAT_DIGITS}g")


# Extensions the exporters write
OUTPUT_EXTENSIONS = (".csv", ".json")

_SYSTEM_PREFIXES = (
    "/etc/",
    "/usr/",
    "/bin/",
    "/sbin/",
    "/sys/",
    "/proc/",
    "/boot/",
    "c:/windows/",
    "c:/program files/",
)


def check_output_path(path: str | Path, extensions: Iterable[str] = OUTPUT_EXTENSIONS) -> Path:
    """Resolve an output file path before anything is created on disk.

    The parent directory need not exist yet.

    Raises:
        OutputError: If the path is empty, under a system directory, names an
            existing directory, or has an extension outside ``extensions``.
    """
    if not str(path):
        raise OutputError("<empty>", "output path cannot be empty")
    try:
        resolved = Path(path).resolve()
    except (OSError, RuntimeError) as e:
        raise OutputError(str(path), f"invalid path: {e}") from e

    lowered = resolved.as_posix().lower()
    if lowered.startswith(_SYSTEM_PREFIXES):
        raise OutputError(str(resolved), f"cannot write to system directory {resolved.parent}")

    allowed = tuple(e.lower() for e in extensions)
    if resolved.suffix.lower() not in allowed:
        raise OutputError(
            str(resolved), f"invalid file extension '{resolved.suffix}', allowed: {', '.join(allowed)}"
        )
    if resolved.is_dir():
        raise OutputError(str(resolved), "is a directory")
    return resolved


def parse_override(text: str) -> tuple[str, Any]:
    """Split a ``key=value`` override into a dotted key and a parsed value.

    Values are parsed as JSON (numbers, lists, booleans, null); anything that
    is not valid JSON is kept as a bare string, so ``form=-|u|^p`` works
    without quoting.

    Raises:
        ValueError: If there is no ``=`` or the key is empty.
    """
    if "=" not in text:
        raise ValueError(f"Override must look like key=value, got '{text}'")
    key, raw = text.split("=", 1)
    key = key.strip()
    if not key:
        raise ValueError(f"Override has an empty key: '{text}'")
    raw = raw.strip()
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key, value


def map_in_order(func: Callable[[T], R], items: Iterable[T], max_workers: int = 1) -> list[R]:
    """Apply ``func`` to every item on a thread pool, returning results in input order.

    With ``max_workers == 1`` the items run sequentially on the calling thread.
    Results never depend on the worker count.
    """
    work = list(items)
    if max_workers <= 1 or len(work) <= 1:
        return [func(item) for item in work]

    results: dict[int, R] = {}
    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        futures = {executor.submit(func, item): i for i, item in enumerate(work)}
        for future in as_completed(futures):
            results[futures[future]] = future.result()
    return [results[i] for i in range(len(work))]

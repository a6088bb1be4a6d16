"""Export functions for traces, scans and reports.

Every writer returns the text it would write, so callers can compare runs
byte for byte; ``write_output`` puts it on disk.
"""

import csv
import io
import json
import logging
import math
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from .errors import OutputError
from .evolution import CORE_CHANNELS, EXTRA_CHANNELS, EvolutionTrace
from .utils import check_output_path, format_float

logger = logging.getLogger("specwave")

# Keys whose subtree may hold inf/nan (the state at numerical blow-up)
_NONFINITE_KEYS = ("blowup",)

SCAN_COLUMNS = ("t", "lambda", "D", "dtD", "diff_symbol")
PHASE_COLUMNS = ("p", "q", "eps", "form", "p_F", "admissible", "class", "t_blowup", "max_linf", "energy_nonincreasing")


def trace_columns(trace: EvolutionTrace) -> list[str]:
    """``t``, the core channels, ``blowup``, then recorded extras in fixed order."""
    extras = [name for name in EXTRA_CHANNELS if name in trace.channels]
    return ["t", *CORE_CHANNELS, "blowup", *extras]


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (int, float)):
        return format_float(value)
    return str(value)


def _writer(output: io.StringIO) -> Any:
    return csv.writer(output, lineterminator="\n")


def export_trace_csv(trace: EvolutionTrace, output: io.StringIO | None = None) -> str:
    """One row per recorded time.

    Only the terminal row of a blown-up trace may hold non-finite values; it
    is the row with ``blowup`` set to 1.

    Raises:
        OutputError: If any other row holds inf or nan.
    """
    if output is None:
        output = io.StringIO()
    columns = trace_columns(trace)
    writer = _writer(output)
    writer.writerow(columns)

    n = len(trace)
    for i in range(n):
        terminal = trace.blowup is not None and i == n - 1
        row: list[Any] = [float(trace.times[i])]
        for name in columns[1:]:
            if name == "blowup":
                row.append(terminal)
                continue
            value = float(trace.channels[name][i])
            if not terminal and not math.isfinite(value):
                raise OutputError(f"trace:{trace.kind}", f"non-finite {name} at t={trace.times[i]:g}")
            row.append(value)
        writer.writerow([_cell(v) for v in row])
    return output.getvalue()


def export_snapshots_csv(trace: EvolutionTrace, output: io.StringIO | None = None) -> str:
    """Snapshot matrix: one row per stored time and field, one column per grid point.

    The header is ``t, field`` followed by the grid coordinates; each snapshot
    contributes a ``u`` row and then a ``ut`` row.
    """
    if output is None:
        output = io.StringIO()
    writer = _writer(output)
    writer.writerow(["t", "field", *(_cell(float(x)) for x in trace.backend.grid)])
    for snap in trace.snapshots:
        for field, values in (("u", snap.u.samples), ("ut", snap.ut.samples)):
            writer.writerow([_cell(snap.time), field, *(_cell(float(v)) for v in values)])
    return output.getvalue()


def export_scan_csv(
    rows: Iterable[Sequence[float | None]], output: io.StringIO | None = None
) -> str:
    """Kernel table ``t, lambda, D, dtD, diff_symbol``; the symbol cell is empty off its domain."""
    if output is None:
        output = io.StringIO()
    writer = _writer(output)
    writer.writerow(SCAN_COLUMNS)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return output.getvalue()


def export_phase_csv(table: Iterable[dict[str, Any]], output: io.StringIO | None = None) -> str:
    """Sweep phase table, one row per (p, q, eps, form) point."""
    if output is None:
        output = io.StringIO()
    writer = _writer(output)
    writer.writerow(PHASE_COLUMNS)
    for point in table:
        writer.writerow(
            [
                _cell(point["p"]),
                _cell(point["q"]),
                _cell(point["eps"]),
                point["form"],
                _cell(point["p_F"]),
                _cell(point["admissible"]),
                point["classification"],
                _cell(point["t_blowup"]),
                _cell(point["max_linf"]),
                _cell(point["energy_nonincreasing"]),
            ]
        )
    return output.getvalue()


def _json_safe(value: Any, path: str, nonfinite_ok: bool) -> Any:
    if isinstance(value, dict):
        return {
            k: _json_safe(v, f"{path}.{k}", nonfinite_ok or k in _NONFINITE_KEYS)
            for k, v in value.items()
        }
    if isinstance(value, (list, tuple)):
        return [_json_safe(v, f"{path}[{i}]", nonfinite_ok) for i, v in enumerate(value)]
    if isinstance(value, float) and not math.isfinite(value):
        if not nonfinite_ok:
            raise OutputError(path, f"non-finite value {value} outside a blow-up record")
        return format_float(value)
    return value


def export_json(payload: Mapping[str, object]) -> str:
    """Serialize a report payload with stable key order and a trailing newline.

    Raises:
        OutputError: If a non-finite float appears outside a blow-up record.
    """
    safe = _json_safe(payload, "$", False)
    return json.dumps(safe, indent=2, allow_nan=False) + "\n"


def write_output(path: str | Path, text: str) -> Path:
    """Write ``text`` to ``path``, creating the parent directory.

    Raises:
        OutputError: If the path is unsafe or the write fails.
    """
    target = check_output_path(path)
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        with open(target, "w", encoding="utf-8", newline="") as f:
            f.write(text)
    except OSError as e:
        raise OutputError(str(target), e.strerror or str(e)) from e
    logger.info("Wrote %s", target)
    return target

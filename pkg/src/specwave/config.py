"""Configuration for specwave runs.

An experiment is described by a JSON file whose keys mirror
``ExperimentConfig``. Missing keys take the defaults below, unknown keys are
rejected, and ``--set key=value`` overrides (dotted keys for nested
sections) win over the file.
"""

import json
import logging
import math
import os
from dataclasses import dataclass, field, fields, is_dataclass
from pathlib import Path
from typing import Any

from .backends import (
    BACKEND_KINDS,
    MAX_SIERPINSKI_LEVEL,
    BackendSpec,
)
from .errors import ConfigError
from .evolution import INTEGRATORS, NonlinearForm
from .utils import parse_override

logger = logging.getLogger("specwave")

THREADS_ENV = "SPECWAVE_THREADS"
DEFAULT_OUT_DIR = "specwave-out"

SUBCOMMANDS = (
    "kernel-scan",
    "linear",
    "heat",
    "nonlinear",
    "verify-matsumura",
    "verify-diffusion",
    "check-inequalities",
    "smalldata",
    "sweep",
    "alphas",
)

# Subcommands that run the nonlinear integrator default to small data
NONLINEAR_SUBCOMMANDS = ("nonlinear", "smalldata", "sweep")

DATA_KINDS = ("bump", "eigen-mix", "random")

LINEAR_AMPLITUDE = 1.0
NONLINEAR_AMPLITUDE = 1e-2


# -----------------------------------------------------------------------------
# Config sections
# -----------------------------------------------------------------------------


@dataclass
class DataSpec:
    """Initial data. ``amplitude`` and ``center`` default per run (see parse_config)."""

    kind: str = "bump"
    amplitude: float | None = None
    center: float | None = None
    width: float = 2.0
    modes: list[int] = field(default_factory=lambda: [1])
    band_fraction: float = 0.25
    u0_weight: float = 1.0
    u1_weight: float = 1.0
    seed: int | None = None


@dataclass
class Tolerances:
    l2: float = 0.05
    l2_derivative: float = 0.1
    linf: float = 0.1
    diffusion: float = 0.1
    smalldata_l2: float = 0.07


@dataclass
class SweepSpec:
    p: list[float] = field(default_factory=lambda: [2.0, 2.5, 3.5, 4.0])
    q: list[float] = field(default_factory=lambda: [1.0])
    eps: list[float] = field(default_factory=lambda: [1e-2])
    forms: list[str] = field(default_factory=lambda: [NonlinearForm.PLUS_ABS.value])


@dataclass
class KernelScanSpec:
    t_max: float = 100.0
    lam_max: float = 100.0
    n_t: int = 2000
    n_lam: int = 2000
    diff_times: list[float] = field(default_factory=lambda: [10.0, 100.0, 1000.0, 10000.0])
    n_diff_lam: int = 4000
    plot_n_t: int = 50
    plot_n_lam: int = 50


@dataclass
class InequalitySpec:
    trials: int = 200
    levels: list[int] = field(default_factory=lambda: [512, 1024, 2048, 4096])
    gn_q: float = math.inf
    sobolev_q: float = math.inf
    sobolev_s: float = 0.6


@dataclass
class ExperimentConfig:
    """Everything one subcommand needs, fully validated."""

    backend: BackendSpec = field(default_factory=BackendSpec)
    data: DataSpec = field(default_factory=DataSpec)
    p: float = 4.0
    q: float = 1.0
    form: str = NonlinearForm.PLUS_ABS.value
    T: float = 400.0
    h: float = 0.05
    integrator: str = "euler"
    fit_window: list[float] = field(default_factory=lambda: [10.0, 200.0])
    n_times: int = 200
    cap: float = 1e6
    record_stride: int = 1
    snapshot_stride: int = 0
    x_ratio_cap: float = 50.0
    tolerances: Tolerances = field(default_factory=Tolerances)
    sweep: SweepSpec = field(default_factory=SweepSpec)
    kernel_scan: KernelScanSpec = field(default_factory=KernelScanSpec)
    inequalities: InequalitySpec = field(default_factory=InequalitySpec)

    def to_dict(self) -> dict[str, Any]:
        """Plain-JSON echo of the config; infinite exponents become ``"inf"``."""
        return _to_plain(self)


@dataclass
class RunConfig:
    """Command-line level settings of one invocation."""

    subcommand: str
    config_path: str | None = None
    overrides: list[str] = field(default_factory=list)
    out_dir: str = DEFAULT_OUT_DIR
    seed: int = 0
    threads: int = 1
    exploratory: bool = False
    verbose: bool = False
    quiet: bool = False


def _to_plain(value: Any) -> Any:
    if is_dataclass(value) and not isinstance(value, type):
        return {f.name: _to_plain(getattr(value, f.name)) for f in fields(value)}
    if isinstance(value, (list, tuple)):
        return [_to_plain(v) for v in value]
    if isinstance(value, float) and math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return value


# -----------------------------------------------------------------------------
# Loading
# -----------------------------------------------------------------------------


def load_config_file(path: str | Path) -> dict[str, Any]:
    """Read a JSON config file into a dict.

    Raises:
        ConfigError: If the file is missing, unreadable, not JSON, or not an object.
    """
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError("config", f"cannot read {p}: {e.strerror or e}") from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError("config", f"malformed JSON in {p} at line {e.lineno}: {e.msg}") from e
    if not isinstance(data, dict):
        raise ConfigError("config", "top level must be a JSON object")
    return data


def apply_overrides(data: dict[str, Any], overrides: list[str]) -> dict[str, Any]:
    """Apply ``key=value`` overrides to a raw config dict (returns a new dict).

    Both the previous and the new value are logged.
    """
    result = json.loads(json.dumps(data))
    for text in overrides:
        try:
            key, value = parse_override(text)
        except ValueError as e:
            raise ConfigError("--set", str(e)) from e
        parts = key.split(".")
        target = result
        for part in parts[:-1]:
            node = target.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(key, f"'{part}' is not a section")
            target = node
        previous = target.get(parts[-1])
        target[parts[-1]] = value
        logger.info("override %s: %r -> %r", key, previous, value)
    return result


def _section(cls: type, raw: Any, prefix: str) -> dict[str, Any]:
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        raise ConfigError(prefix.rstrip("."), "must be an object", raw)
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError(f"{prefix}{unknown[0]}", "unknown key")
    return dict(raw)


def _backend_spec(raw: Any) -> BackendSpec:
    if raw is None:
        return BackendSpec()
    if not isinstance(raw, dict):
        raise ConfigError("backend", "must be an object", raw)
    raw = dict(raw)
    if "L_over_pi" in raw:
        if "L" in raw:
            raise ConfigError("backend.L_over_pi", "give either L or L_over_pi, not both")
        ratio = raw.pop("L_over_pi")
        if not _is_number(ratio):
            raise ConfigError("backend.L_over_pi", "must be a number", ratio)
        raw["L"] = float(ratio) * math.pi
    return BackendSpec(**_section(BackendSpec, raw, "backend."))


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _exponent(value: Any, key: str) -> float:
    """Number or the string ``"inf"``."""
    if isinstance(value, str) and value.lower() in ("inf", "infinity"):
        return math.inf
    if not _is_number(value):
        raise ConfigError(key, "must be a number or \"inf\"", value)
    return float(value)


def build_experiment_config(data: dict[str, Any]) -> ExperimentConfig:
    """Turn a raw dict into an ``ExperimentConfig`` and validate it."""
    top = _section(ExperimentConfig, data, "")
    nested = {
        "data": DataSpec,
        "tolerances": Tolerances,
        "sweep": SweepSpec,
        "kernel_scan": KernelScanSpec,
        "inequalities": InequalitySpec,
    }
    kwargs: dict[str, Any] = {}
    for key, value in top.items():
        if key == "backend":
            kwargs[key] = _backend_spec(value)
        elif key in nested:
            kwargs[key] = nested[key](**_section(nested[key], value, f"{key}."))
        else:
            kwargs[key] = value

    config = ExperimentConfig(**kwargs)
    ineq = config.inequalities
    ineq.gn_q = _exponent(ineq.gn_q, "inequalities.gn_q")
    ineq.sobolev_q = _exponent(ineq.sobolev_q, "inequalities.sobolev_q")
    validate_config(config)
    return config


# -----------------------------------------------------------------------------
# Validation
# -----------------------------------------------------------------------------


def _number(value: Any, key: str) -> float:
    if not _is_number(value) or not math.isfinite(value):
        raise ConfigError(key, "must be a finite number", value)
    return float(value)


def _positive(value: Any, key: str) -> float:
    number = _number(value, key)
    if number <= 0:
        raise ConfigError(key, f"{key.rsplit('.', 1)[-1]} > 0", value)
    return number


def _integer(value: Any, key: str, minimum: int) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ConfigError(key, f"integer >= {minimum}", value)
    return value


def _q_range(value: Any, key: str) -> float:
    number = _number(value, key)
    if not 1.0 <= number <= 2.0:
        raise ConfigError(key, "q ∈ [1,2]", value)
    return number


def _power(value: Any, key: str) -> float:
    number = _number(value, key)
    if number <= 1.0:
        raise ConfigError(key, "p > 1", value)
    return number


def _form(value: Any, key: str) -> str:
    allowed = [f.value for f in NonlinearForm]
    if value not in allowed:
        raise ConfigError(key, f"one of {allowed}", value)
    return str(value)


def _non_empty_list(value: Any, key: str) -> list[Any]:
    if not isinstance(value, list) or not value:
        raise ConfigError(key, "must be a non-empty list", value)
    return value


def validate_config(config: ExperimentConfig) -> None:
    """Check every constraint; the first violation raises ``ConfigError``."""
    b = config.backend
    if b.kind not in BACKEND_KINDS:
        raise ConfigError("backend.kind", f"one of {list(BACKEND_KINDS)}", b.kind)
    _positive(b.L, "backend.L")
    _integer(b.N, "backend.N", 2)
    if b.nu is not None:
        _positive(b.nu, "backend.nu")
    if b.kind == "fractional-of-base" and b.nu is None:
        raise ConfigError("backend.nu", "required for fractional-of-base")
    if b.kind == "dense-matrix" and not b.matrix_path:
        raise ConfigError("backend.matrix_path", "required for dense-matrix")
    if b.alpha is not None:
        _positive(b.alpha, "backend.alpha")
    if b.level is not None:
        level = _integer(b.level, "backend.level", 0)
        if level > MAX_SIERPINSKI_LEVEL:
            raise ConfigError("backend.level", f"level <= {MAX_SIERPINSKI_LEVEL}", level)

    d = config.data
    if d.kind not in DATA_KINDS:
        raise ConfigError("data.kind", f"one of {list(DATA_KINDS)}", d.kind)
    if d.amplitude is not None:
        _number(d.amplitude, "data.amplitude")
    if d.center is not None:
        _number(d.center, "data.center")
    _positive(d.width, "data.width")
    for i, mode in enumerate(_non_empty_list(d.modes, "data.modes")):
        _integer(mode, f"data.modes[{i}]", 1)
    band = _number(d.band_fraction, "data.band_fraction")
    if not 0 < band <= 1:
        raise ConfigError("data.band_fraction", "band_fraction ∈ (0,1]", band)
    _number(d.u0_weight, "data.u0_weight")
    _number(d.u1_weight, "data.u1_weight")
    if d.seed is not None:
        _integer(d.seed, "data.seed", 0)

    _power(config.p, "p")
    _q_range(config.q, "q")
    _form(config.form, "form")
    T = _positive(config.T, "T")
    h = _positive(config.h, "h")
    if h > T:
        raise ConfigError("h", "h <= T", h)
    if config.integrator not in INTEGRATORS:
        raise ConfigError("integrator", f"one of {list(INTEGRATORS)}", config.integrator)
    window = config.fit_window
    if (
        not isinstance(window, list)
        or len(window) != 2
        or not all(_is_number(v) for v in window)
        or not 0 < window[0] < window[1]
    ):
        raise ConfigError("fit_window", "[t_lo, t_hi] with 0 < t_lo < t_hi", window)
    _integer(config.n_times, "n_times", 8)
    _positive(config.cap, "cap")
    _integer(config.record_stride, "record_stride", 1)
    _integer(config.snapshot_stride, "snapshot_stride", 0)
    _positive(config.x_ratio_cap, "x_ratio_cap")

    for f in fields(Tolerances):
        _positive(getattr(config.tolerances, f.name), f"tolerances.{f.name}")

    s = config.sweep
    for i, p in enumerate(_non_empty_list(s.p, "sweep.p")):
        _power(p, f"sweep.p[{i}]")
    for i, q in enumerate(_non_empty_list(s.q, "sweep.q")):
        _q_range(q, f"sweep.q[{i}]")
    for i, eps in enumerate(_non_empty_list(s.eps, "sweep.eps")):
        _number(eps, f"sweep.eps[{i}]")
    for i, form in enumerate(_non_empty_list(s.forms, "sweep.forms")):
        _form(form, f"sweep.forms[{i}]")

    k = config.kernel_scan
    _positive(k.t_max, "kernel_scan.t_max")
    if _number(k.lam_max, "kernel_scan.lam_max") < 0:
        raise ConfigError("kernel_scan.lam_max", "lam_max >= 0", k.lam_max)
    for name in ("n_t", "n_lam", "plot_n_t", "plot_n_lam"):
        _integer(getattr(k, name), f"kernel_scan.{name}", 1)
    _integer(k.n_diff_lam, "kernel_scan.n_diff_lam", 2)
    for i, t in enumerate(_non_empty_list(k.diff_times, "kernel_scan.diff_times")):
        _positive(t, f"kernel_scan.diff_times[{i}]")

    ineq = config.inequalities
    _integer(ineq.trials, "inequalities.trials", 1)
    for i, n in enumerate(_non_empty_list(ineq.levels, "inequalities.levels")):
        _integer(n, f"inequalities.levels[{i}]", 2)
    for name in ("gn_q", "sobolev_q"):
        value = getattr(ineq, name)
        if math.isnan(value) or value < 1:
            raise ConfigError(f"inequalities.{name}", "q >= 1 or \"inf\"", value)
    if _number(ineq.sobolev_s, "inequalities.sobolev_s") < 0:
        raise ConfigError("inequalities.sobolev_s", "s >= 0", ineq.sobolev_s)


# -----------------------------------------------------------------------------
# Entry points
# -----------------------------------------------------------------------------


def parse_config(run: RunConfig) -> ExperimentConfig:
    """Load, override and validate the experiment config of one run.

    Run-dependent defaults are filled last: the data amplitude (1e-2 for
    nonlinear subcommands, 1 otherwise), the bump centre (middle of the
    interval) and the data seed (the run seed).
    """
    raw: dict[str, Any] = {}
    if run.config_path:
        raw = load_config_file(run.config_path)
        logger.info("Loaded config from %s", run.config_path)
    if run.overrides:
        raw = apply_overrides(raw, run.overrides)
    config = build_experiment_config(raw)

    data = config.data
    if data.amplitude is None:
        data.amplitude = (
            NONLINEAR_AMPLITUDE if run.subcommand in NONLINEAR_SUBCOMMANDS else LINEAR_AMPLITUDE
        )
    if data.center is None and config.backend.kind in ("dirichlet-1d", "fractional-of-base"):
        if config.backend.matrix_path is None:
            data.center = config.backend.L / 2.0
    if data.seed is None:
        data.seed = run.seed
    return config


def resolve_threads(cli_value: int | None) -> int:
    """Worker count: ``--threads``, else ``SPECWAVE_THREADS``, else 1."""
    if cli_value is not None:
        if cli_value < 1:
            raise ConfigError("--threads", "threads >= 1", cli_value)
        return cli_value
    env = os.environ.get(THREADS_ENV)
    if env is None or env.strip() == "":
        return 1
    try:
        value = int(env)
    except ValueError:
        raise ConfigError(THREADS_ENV, "must be an integer", env) from None
    if value < 1:
        raise ConfigError(THREADS_ENV, "threads >= 1", value)
    return value

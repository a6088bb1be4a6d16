"""End-to-end studies: Matsumura rates, diffusion phenomenon, small data, sweeps.

Every study takes a validated ``ExperimentConfig``, builds its backend and
initial data, runs the solvers and returns an ``ExperimentReport`` whose
criteria each cite the predicted exponent or bound they were judged against.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from numpy.typing import NDArray

from .analysis import (
    DELTA_NOTE,
    CriticalityRecord,
    criticality,
    fit_decay,
    interpolation_ratio,
    predict_exponent,
    weighted_X_norm,
    weighted_Y_norm,
)
from .backends import (
    GridFunction,
    SpectrumBackend,
    build_backend,
    homogeneous_norm,
    lq_norm,
)
from .config import LINEAR_AMPLITUDE, DataSpec, ExperimentConfig
from .errors import ConfigError, DataError, ParameterError
from .evolution import (
    BlowupRecord,
    CauchyData,
    EvolutionTrace,
    Nonlinearity,
    NonlinearForm,
    TraceOptions,
    diffusion_difference,
    duhamel_residual,
    linear_solve,
    nonlinear_evolve,
)
from .fitting import DecayFit
from .types import CriterionPayload, ReportPayload, SweepRowPayload
from .utils import map_in_order

logger = logging.getLogger("specwave")

SCHEMA_VERSION = "1"

# Energy may grow by at most this many h * E(0) per unit time on dissipative runs
ENERGY_SLACK = 10.0

# Snapshot stride of the small-data run when the config disables snapshots;
# the Duhamel residual needs stored states
RESIDUAL_SNAPSHOT_STRIDE = 10

# -----------------------------------------------------------------------------
# Initial data
# -----------------------------------------------------------------------------


def bump_profile(y: NDArray[np.float64]) -> NDArray[np.float64]:
    """Smooth compactly supported bump ``exp(-1/(1 - y**2))`` on ``|y| < 1``."""
    out = np.zeros_like(y, dtype=float)
    inside = np.abs(y) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - y[inside] ** 2))
    return out


def _bump(backend: SpectrumBackend, spec: DataSpec) -> NDArray[np.float64]:
    if backend.points is not None and backend.points.ndim == 2:
        centre = backend.points.mean(axis=0)
        distance = np.linalg.norm(backend.points - centre, axis=1)
        return bump_profile(distance / spec.width)
    grid = backend.grid
    centre = spec.center if spec.center is not None else 0.5 * (grid[0] + grid[-1])
    return bump_profile((grid - centre) / spec.width)


def _random_profile(backend: SpectrumBackend, spec: DataSpec, rng: np.random.Generator) -> NDArray:
    band = max(1, int(spec.band_fraction * backend.mode_count))
    coeffs = np.zeros(backend.mode_count)
    coeffs[:band] = rng.standard_normal(band)
    coeffs /= np.sqrt(np.sum(coeffs**2))
    return backend.transform.inverse(coeffs)


def make_initial_data(backend: SpectrumBackend, spec: DataSpec) -> CauchyData:
    """Build ``(u0, u1)`` from a data spec.

    ``bump``: ``amplitude * exp(-1/(1-y**2))`` with ``y = (x - center)/width``.
    ``eigen-mix``: ``amplitude`` times the sum of the listed eigenfunctions
    (1-based mode numbers). ``random``: unit-L2 white noise on the lowest
    ``band_fraction`` of the modes, drawn independently for ``u0`` and ``u1``.
    Both components are then scaled by ``u0_weight`` and ``u1_weight``.
    """
    amplitude = spec.amplitude if spec.amplitude is not None else LINEAR_AMPLITUDE

    if spec.kind == "bump":
        shape = _bump(backend, spec)
        first, second = shape, shape
    elif spec.kind == "eigen-mix":
        too_high = [k for k in spec.modes if k > backend.mode_count]
        if too_high:
            raise ConfigError("data.modes", f"mode numbers <= {backend.mode_count}", too_high)
        shape = np.sum([backend.transform.eigenfunction(k - 1) for k in spec.modes], axis=0)
        first, second = shape, shape
    elif spec.kind == "random":
        rng = np.random.default_rng(spec.seed if spec.seed is not None else 0)
        first = _random_profile(backend, spec, rng)
        second = _random_profile(backend, spec, rng)
    else:
        raise ConfigError("data.kind", "one of ['bump', 'eigen-mix', 'random']", spec.kind)

    return CauchyData(
        GridFunction(amplitude * spec.u0_weight * first, backend),
        GridFunction(amplitude * spec.u1_weight * second, backend),
    )


def initial_size(data: CauchyData, q: float) -> float:
    """``I0 = ||u0||_q + ||u0||_{H^1} + ||u1||_q + ||u1||_2``."""
    u0, u1 = data.u0, data.u1
    h1 = math.sqrt(lq_norm(u0, 2.0) ** 2 + homogeneous_norm(u0, 1.0) ** 2)
    return lq_norm(u0, q) + h1 + lq_norm(u1, q) + lq_norm(u1, 2.0)


# -----------------------------------------------------------------------------
# Reports
# -----------------------------------------------------------------------------


@dataclass(frozen=True)
class Criterion:
    """One judged quantity. Observations are recorded but never gate a run."""

    name: str
    channel: str
    predicted: float | None
    fitted: float | None
    tolerance: float | None
    passed: bool | None
    observation: bool = False
    fit: DecayFit | None = None
    note: str = ""

    @property
    def deviation(self) -> float | None:
        if self.predicted is None or self.fitted is None:
            return None
        return abs(self.fitted - self.predicted)

    def to_dict(self) -> CriterionPayload:
        return {
            "name": self.name,
            "channel": self.channel,
            "predicted": self.predicted,
            "fitted": self.fitted,
            "deviation": self.deviation,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "observation": self.observation,
            "fit": self.fit.to_dict() if self.fit is not None else None,
            "note": self.note,
        }


@dataclass
class ExperimentReport:
    """Outcome of one study. ``traces`` are kept for output but never serialized."""

    experiment: str
    config: dict[str, Any]
    backend: dict[str, Any]
    criteria: list[Criterion] = field(default_factory=list)
    blowup: BlowupRecord | None = None
    criticality: CriticalityRecord | None = None
    metrics: dict[str, float | None] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    table: list[dict[str, Any]] = field(default_factory=list)
    traces: dict[str, EvolutionTrace] = field(default_factory=dict, repr=False)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.criteria if not c.observation)

    @property
    def failures(self) -> list[Criterion]:
        return [c for c in self.criteria if not c.observation and not c.passed]

    def to_dict(self) -> ReportPayload:
        payload: ReportPayload = {
            "schema_version": SCHEMA_VERSION,
            "experiment": self.experiment,
            "config": self.config,
            "backend": self.backend,
            "passed": self.passed,
            "criteria": [c.to_dict() for c in self.criteria],
            "blowup": self.blowup.to_dict() if self.blowup is not None else None,
            "criticality": self.criticality.to_dict() if self.criticality is not None else None,
            "metrics": dict(self.metrics),
            "notes": list(self.notes),
        }
        if self.table:
            payload["table"] = list(self.table)
        return payload


# -----------------------------------------------------------------------------
# Shared plumbing
# -----------------------------------------------------------------------------


def _backend_alpha(backend: SpectrumBackend) -> float:
    if backend.alpha is None:
        raise ConfigError("backend.alpha", "needed for exponent predictions on this backend")
    return backend.alpha


def _window(config: ExperimentConfig, backend: SpectrumBackend) -> tuple[float, float]:
    t_lo, t_hi = float(config.fit_window[0]), float(config.fit_window[1])
    if t_hi > config.T:
        raise ConfigError("fit_window", f"t_hi <= T = {config.T:g}", config.fit_window)
    limit = backend.resolvable_time()
    if t_hi > limit:
        raise ConfigError(
            "fit_window", f"t_hi <= resolvable time {limit:.6g} of this backend", config.fit_window
        )
    return t_lo, t_hi


def record_times(config: ExperimentConfig) -> NDArray[np.float64]:
    """``t = 0`` followed by ``n_times`` log-spaced times up to ``T``."""
    first = min(0.1, config.T / 10.0)
    return np.concatenate([[0.0], np.geomspace(first, config.T, config.n_times)])


def _fit_criterion(
    name: str,
    trace: EvolutionTrace,
    channel: str,
    window: tuple[float, float],
    predicted: float,
    tolerance: float,
    observation: bool = False,
) -> Criterion:
    try:
        fit = fit_decay(trace, channel, window)
    except (DataError, ParameterError) as e:
        return Criterion(name, channel, predicted, None, tolerance, None if observation else False,
                         observation, note=str(e))
    passed = abs(fit.exponent - predicted) <= tolerance
    note = "" if fit.is_power_law else f"fit regime is {fit.regime} (r2={fit.r_squared:.3f})"
    logger.info(
        "%s: fitted %.4f, predicted %.4f, tolerance %g -> %s",
        name,
        fit.exponent,
        predicted,
        tolerance,
        "observed" if observation else ("pass" if passed else "FAIL"),
    )
    return Criterion(name, channel, predicted, fit.exponent, tolerance,
                     None if observation else passed, observation, fit, note)


def _report(name: str, config: ExperimentConfig, backend: SpectrumBackend) -> ExperimentReport:
    return ExperimentReport(experiment=name, config=config.to_dict(), backend=backend.describe())


# -----------------------------------------------------------------------------
# Linear studies
# -----------------------------------------------------------------------------


def verify_matsumura(config: ExperimentConfig) -> ExperimentReport:
    """Fit the linear decay rates and compare them with the Matsumura-type exponents.

    Gated: ``||u||_2`` (tolerance ``l2``), ``||u_t||_2`` and
    ``||A^(1/2) u||_2`` (``l2_derivative``), ``||u||_inf`` (``linf``).
    The sup norms of ``u_t`` and ``A^(1/2) u`` and both norms of
    ``A^(1/2) u_t`` are observations.
    """
    backend = build_backend(config.backend)
    alpha = _backend_alpha(backend)
    window = _window(config, backend)
    data = make_initial_data(backend, config.data)
    q, tol = config.q, config.tolerances

    options = TraceOptions(q=q, extras=("ut_linf", "h1dot_linf", "ut_h1dot", "ut_h1dot_linf"), snapshot_stride=0)
    trace = linear_solve(data, record_times(config), options)

    plan = [
        ("u_L2", "l2", predict_exponent(alpha, q, 0, 0.0, "L2"), tol.l2, False),
        ("ut_L2", "ut_l2", predict_exponent(alpha, q, 1, 0.0, "L2"), tol.l2_derivative, False),
        ("h1dot_L2", "h1dot", predict_exponent(alpha, q, 0, 1.0, "L2"), tol.l2_derivative, False),
        ("u_Linf", "linf", predict_exponent(alpha, q, 0, 0.0, "Linf"), tol.linf, False),
        ("ut_Linf", "ut_linf", predict_exponent(alpha, q, 1, 0.0, "Linf"), tol.linf, True),
        ("h1dot_Linf", "h1dot_linf", predict_exponent(alpha, q, 0, 1.0, "Linf"), tol.linf, True),
        ("ut_h1dot_L2", "ut_h1dot", predict_exponent(alpha, q, 1, 1.0, "L2"), tol.l2_derivative, True),
        ("ut_h1dot_Linf", "ut_h1dot_linf", predict_exponent(alpha, q, 1, 1.0, "Linf"), tol.linf, True),
    ]
    report = _report("verify-matsumura", config, backend)
    for name, channel, prediction, tolerance, observation in plan:
        report.criteria.append(
            _fit_criterion(name, trace, channel, window, prediction.predicted, tolerance, observation)
        )
    report.metrics["alpha"] = alpha
    report.traces["linear"] = trace
    return report


def verify_diffusion(config: ExperimentConfig) -> ExperimentReport:
    """Fit the decay of ``u_lin - exp(-tA)(u0 + u1)``; it should gain one power of t."""
    backend = build_backend(config.backend)
    alpha = _backend_alpha(backend)
    window = _window(config, backend)
    if window[0] < 1.0:
        raise ConfigError("fit_window", "t_lo >= 1 for the diffusion comparison", config.fit_window)
    data = make_initial_data(backend, config.data)
    q, tolerance = config.q, config.tolerances.diffusion
    times = record_times(config)

    difference = diffusion_difference(data, times, TraceOptions(q=q, snapshot_stride=0))
    solution = linear_solve(data, times, TraceOptions(q=q, snapshot_stride=0))

    report = _report("verify-diffusion", config, backend)
    report.criteria.append(
        _fit_criterion("diff_L2", difference, "l2", window,
                       predict_exponent(alpha, q, 0, 0.0, "diff_L2").predicted, tolerance)
    )
    report.criteria.append(
        _fit_criterion("diff_Linf", difference, "linf", window,
                       predict_exponent(alpha, q, 0, 0.0, "diff_Linf").predicted, tolerance)
    )
    report.criteria.append(
        _fit_criterion("u_L2", solution, "l2", window,
                       predict_exponent(alpha, q, 0, 0.0, "L2").predicted, tolerance, observation=True)
    )
    report.metrics["alpha"] = alpha
    report.traces["difference"] = difference
    report.traces["linear"] = solution
    return report


# -----------------------------------------------------------------------------
# Nonlinear studies
# -----------------------------------------------------------------------------


def smalldata_global(config: ExperimentConfig, exploratory: bool = False) -> ExperimentReport:
    """Run small data to ``T`` and check boundedness of the weighted X-norm.

    Gated: no numerical blow-up, ``X / I0 <= x_ratio_cap`` and the fitted
    ``||u||_2`` exponent within ``smalldata_l2`` of ``2 alpha (1/q - 1/2)``.

    Raises:
        ConfigError: If ``(p, q, alpha)`` is inadmissible and ``exploratory``
            is not set.
    """
    backend = build_backend(config.backend)
    alpha = _backend_alpha(backend)
    window = _window(config, backend)
    record = criticality(config.p, config.q, alpha)
    report = _report("smalldata", config, backend)
    report.criticality = record

    if not record.admissible:
        if not exploratory:
            raise ConfigError(
                "p", "admissible (p, q, alpha): " + "; ".join(record.reasons), config.p
            )
        logger.warning("Exploratory run of inadmissible (p=%g, q=%g): %s",
                       config.p, config.q, "; ".join(record.reasons))
        report.notes.append("exploratory: (p, q, alpha) is not admissible")
    if record.delta == 1:
        logger.warning("delta = 1 boundary case: %s", DELTA_NOTE)
        report.notes.append(DELTA_NOTE)

    data = make_initial_data(backend, config.data)
    nonlinearity = Nonlinearity(config.p, NonlinearForm(config.form))
    extras: tuple[str, ...] = ("f_l2", "f_lsigma")
    if nonlinearity.is_dissipative:
        extras += ("energy",)
    options = TraceOptions(
        q=config.q,
        extras=extras,
        record_stride=config.record_stride,
        snapshot_stride=config.snapshot_stride or RESIDUAL_SNAPSHOT_STRIDE,
    )
    trace = nonlinear_evolve(data, nonlinearity, config.h, config.T, config.cap, config.integrator, options)
    report.traces["nonlinear"] = trace
    report.blowup = trace.blowup

    i0 = initial_size(data, config.q)
    report.metrics["I0"] = i0
    report.criteria.append(
        Criterion("no_blowup", "linf", None, None, None, trace.blowup is None,
                  note=trace.blowup.reason if trace.blowup else "")
    )

    try:
        x_norm = weighted_X_norm(trace, config.q, alpha, record.delta)
    except DataError as e:
        x_norm = math.nan
        report.notes.append(str(e))
    ratio = x_norm / i0 if i0 > 0 else math.inf
    ratio_ok = math.isfinite(ratio) and ratio <= config.x_ratio_cap and trace.blowup is None
    report.metrics["X"] = x_norm if math.isfinite(x_norm) else None
    report.metrics["X_over_I0"] = ratio if math.isfinite(ratio) else None
    report.criteria.append(
        Criterion("x_ratio", "X/I0", None, ratio if math.isfinite(ratio) else None,
                  config.x_ratio_cap, ratio_ok)
    )
    logger.info("X/I0 = %.4g (cap %g)", ratio, config.x_ratio_cap)

    predicted = predict_exponent(alpha, config.q, 0, 0.0, "L2").predicted
    if trace.blowup is None:
        report.criteria.append(
            _fit_criterion("u_L2", trace, "l2", window, predicted, config.tolerances.smalldata_l2)
        )
        report.metrics["Y"] = weighted_Y_norm(trace, config.p, config.q, alpha, record.sigma)
        report.metrics["interpolation_ratio"] = interpolation_ratio(trace, config.q, alpha, record.delta)
        if len(trace.snapshots) >= 2:
            sample = [trace.snapshots[len(trace.snapshots) // 2].time, trace.snapshots[-1].time]
            report.metrics["duhamel_residual"] = duhamel_residual(trace, nonlinearity, sample)
    else:
        report.criteria.append(
            Criterion("u_L2", "l2", predicted, None, config.tolerances.smalldata_l2, False,
                      note="not fitted after numerical blow-up")
        )
    report.metrics["alpha"] = alpha
    return report


@dataclass(frozen=True)
class SweepPoint:
    """Classification of one (p, q, eps, form) run."""

    p: float
    q: float
    eps: float
    form: str
    p_F: float
    admissible: bool
    classification: str
    t_blowup: float | None
    max_linf: float | None
    energy_nonincreasing: bool | None

    def to_dict(self) -> SweepRowPayload:
        return {
            "p": self.p,
            "q": self.q,
            "eps": self.eps,
            "form": self.form,
            "p_F": self.p_F,
            "admissible": self.admissible,
            "classification": self.classification,
            "t_blowup": self.t_blowup,
            "max_linf": self.max_linf,
            "energy_nonincreasing": self.energy_nonincreasing,
        }


def classify_trace(trace: EvolutionTrace) -> str:
    """``blowup``, ``bounded`` (late sup no larger than early sup) or ``undecided``."""
    if trace.blowup is not None:
        return "blowup"
    times, channels = trace.finite_view()
    linf = channels["linf"]
    half = 0.5 * trace.final_time
    early, late = linf[times <= half], linf[times >= half]
    if early.size and late.size and late.max() <= early.max():
        return "bounded"
    return "undecided"


def energy_nonincreasing(trace: EvolutionTrace, h: float) -> bool:
    """True if the energy never grows faster than ``10 h E(0)`` per unit time."""
    times, channels = trace.finite_view()
    energy = channels["energy"]
    if energy.size < 2:
        return True
    slack = ENERGY_SLACK * h * energy[0] * np.diff(times)
    return bool(np.all(np.diff(energy) <= slack + 1e-14 * max(1.0, energy[0])))


def critical_sweep(config: ExperimentConfig, threads: int = 1) -> ExperimentReport:
    """Run every (p, q, eps, form) point of the sweep grid and classify it.

    Points run concurrently on ``threads`` workers and are reported in grid
    order. Dissipative points also gate on energy monotonicity.
    """
    backend = build_backend(config.backend)
    alpha = _backend_alpha(backend)
    sweep = config.sweep
    grid = [
        (float(p), float(q), float(eps), str(form))
        for p in sweep.p
        for q in sweep.q
        for eps in sweep.eps
        for form in sweep.forms
    ]
    logger.info("Sweep over %d points on %d threads", len(grid), threads)

    def run_point(point: tuple[float, float, float, str]) -> SweepPoint:
        p, q, eps, form = point
        nonlinearity = Nonlinearity(p, NonlinearForm(form))
        spec = DataSpec(**{**config.data.__dict__, "amplitude": eps})
        data = make_initial_data(backend, spec)
        extras = ("energy",) if nonlinearity.is_dissipative else ()
        options = TraceOptions(q=q, extras=extras, record_stride=config.record_stride, snapshot_stride=0)
        trace = nonlinear_evolve(data, nonlinearity, config.h, config.T, config.cap, config.integrator, options)
        record = criticality(p, q, alpha)
        _, channels = trace.finite_view()
        return SweepPoint(
            p=p,
            q=q,
            eps=eps,
            form=form,
            p_F=record.p_F,
            admissible=record.admissible,
            classification=classify_trace(trace),
            t_blowup=trace.blowup.time if trace.blowup else None,
            max_linf=float(np.max(channels["linf"])) if channels["linf"].size else None,
            energy_nonincreasing=energy_nonincreasing(trace, config.h) if extras else None,
        )

    points = map_in_order(run_point, grid, threads)

    report = _report("sweep", config, backend)
    report.notes.append("blowup means numerical blow-up: the sup norm crossed the cap before T")
    for i, point in enumerate(points, start=1):
        logger.info("[%d/%d] p=%g q=%g eps=%g %s: %s", i, len(points), point.p, point.q,
                    point.eps, point.form, point.classification)
        report.table.append(point.to_dict())
        if point.energy_nonincreasing is not None:
            report.criteria.append(
                Criterion(f"energy p={point.p:g} eps={point.eps:g}", "energy", None, None,
                          ENERGY_SLACK, point.energy_nonincreasing)
            )
    counts = {c: sum(1 for p in points if p.classification == c) for c in ("blowup", "bounded", "undecided")}
    report.metrics.update({f"n_{k}": float(v) for k, v in counts.items()})
    report.metrics["alpha"] = alpha
    return report

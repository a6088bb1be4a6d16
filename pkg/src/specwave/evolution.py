"""Linear propagation, heat flow and the nonlinear exponential integrator.

States are advanced in spectral coefficients: ``a`` for ``u`` and ``b`` for
``u_t``. The linear part of every update is exact (it is the representation
formula applied mode by mode), so any observed decay comes from the
multipliers and not from numerical dissipation.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable

import numpy as np
import scipy.integrate
from numpy.typing import ArrayLike, NDArray

from .backends import GridFunction, SpectrumBackend, check_same_backend, weighted_lq
from .errors import DataError, ParameterError
from .kernels import DEFAULT_KERNEL, MultiplierKernel
from .types import BlowupPayload

logger = logging.getLogger("specwave")

# -----------------------------------------------------------------------------
# Constants
# -----------------------------------------------------------------------------

CORE_CHANNELS = ("l1", "lq", "l2", "linf", "h1dot", "ut_l2")
EXTRA_CHANNELS = ("ut_linf", "h1dot_linf", "ut_h1dot", "ut_h1dot_linf", "hs", "f_l2", "f_lsigma", "energy")
FORCING_CHANNELS = ("f_l2", "f_lsigma")

INTEGRATORS = ("euler", "midpoint")

DEFAULT_STEP = 0.05
DEFAULT_CAP = 1e6

# Rows of the (time x mode) multiplier table evaluated at once by linear solves
_TIME_CHUNK = 128

# Relative tolerance when matching requested times to snapshot times
_TIME_MATCH = 1e-9


class NonlinearForm(str, Enum):
    """Signed power nonlinearities F(u)."""

    PLUS_ABS = "+|u|^p"
    MINUS_ABS = "-|u|^p"
    SIGNED = "|u|^{p-1}u"
    MINUS_SIGNED = "-|u|^{p-1}u"


# -----------------------------------------------------------------------------
# Problem data
# -----------------------------------------------------------------------------


@dataclass(frozen=True)
class Nonlinearity:
    """Power nonlinearity ``F(u) = amplitude * form(u, p)``.

    ``amplitude = 0`` gives the zero forcing, which turns every nonlinear run
    into a linear one.
    """

    p: float
    form: NonlinearForm = NonlinearForm.PLUS_ABS
    amplitude: float = 1.0

    def __post_init__(self) -> None:
        if not math.isfinite(self.p) or self.p <= 1:
            raise ParameterError(f"nonlinearity power p must be > 1, got {self.p}")
        if not math.isfinite(self.amplitude):
            raise ParameterError(f"nonlinearity amplitude must be finite, got {self.amplitude}")
        try:
            object.__setattr__(self, "form", NonlinearForm(self.form))
        except ValueError:
            forms = ", ".join(f.value for f in NonlinearForm)
            raise ParameterError(f"unknown nonlinearity form '{self.form}', expected one of {forms}") from None

    @classmethod
    def zero(cls, p: float = 2.0) -> "Nonlinearity":
        return cls(p=p, amplitude=0.0)

    @property
    def is_zero(self) -> bool:
        return self.amplitude == 0.0

    @property
    def is_dissipative(self) -> bool:
        return self.form is NonlinearForm.MINUS_SIGNED and self.amplitude >= 0

    @property
    def sigma(self) -> float:
        """Lebesgue exponent ``max(1, 2/p)`` of the second Y-norm channel."""
        return max(1.0, 2.0 / self.p)

    def __call__(self, u: NDArray[np.float64]) -> NDArray[np.float64]:
        if self.is_zero:
            return np.zeros_like(u)
        magnitude = np.abs(u)
        if self.form is NonlinearForm.PLUS_ABS:
            return self.amplitude * magnitude**self.p
        if self.form is NonlinearForm.MINUS_ABS:
            return -self.amplitude * magnitude**self.p
        odd = magnitude ** (self.p - 1.0) * u
        if self.form is NonlinearForm.SIGNED:
            return self.amplitude * odd
        return -self.amplitude * odd

    def potential(self, u: NDArray[np.float64], weights: NDArray[np.float64]) -> Any:
        """``amplitude/(p+1) * ||u||_{p+1}**(p+1)``, the potential of the dissipative form."""
        return self.amplitude / (self.p + 1.0) * np.sum(weights * np.abs(u) ** (self.p + 1.0), axis=-1)


@dataclass(frozen=True, eq=False)
class CauchyData:
    """Initial position ``u0`` and velocity ``u1`` on a common backend."""

    u0: GridFunction
    u1: GridFunction

    def __post_init__(self) -> None:
        check_same_backend(self.u0.backend, self.u1.backend)

    @property
    def backend(self) -> SpectrumBackend:
        return self.u0.backend

    @classmethod
    def zero(cls, backend: SpectrumBackend) -> "CauchyData":
        return cls(backend.zeros(), backend.zeros())


@dataclass(frozen=True)
class TraceOptions:
    """What a solve records.

    Attributes:
        q: Exponent of the ``lq`` channel.
        extras: Optional channels from ``EXTRA_CHANNELS``.
        sobolev_s: Order of the ``hs`` channel.
        record_stride: Nonlinear runs record every this many steps.
        snapshot_stride: Keep a full state every this many recorded points (0 disables).
    """

    q: float = 1.0
    extras: tuple[str, ...] = ()
    sobolev_s: float = 1.0
    record_stride: int = 1
    snapshot_stride: int = 0

    def __post_init__(self) -> None:
        if math.isnan(self.q) or self.q < 1:
            raise ParameterError(f"trace exponent q must be >= 1, got {self.q}")
        unknown = [name for name in self.extras if name not in EXTRA_CHANNELS]
        if unknown:
            raise ParameterError(f"unknown trace channels {unknown}, expected a subset of {EXTRA_CHANNELS}")
        if self.record_stride < 1:
            raise ParameterError(f"record_stride must be >= 1, got {self.record_stride}")
        if self.snapshot_stride < 0:
            raise ParameterError(f"snapshot_stride must be >= 0, got {self.snapshot_stride}")
        object.__setattr__(self, "extras", tuple(n for n in EXTRA_CHANNELS if n in self.extras))

    @property
    def channels(self) -> tuple[str, ...]:
        return CORE_CHANNELS + self.extras


# -----------------------------------------------------------------------------
# Traces
# -----------------------------------------------------------------------------


@dataclass(frozen=True)
class BlowupRecord:
    """Where and why a nonlinear run stopped."""

    time: float
    reason: str
    linf: float

    def to_dict(self) -> BlowupPayload:
        return {"time": self.time, "reason": self.reason, "linf": self.linf}


@dataclass(frozen=True, eq=False)
class Snapshot:
    """Full state at one recorded time."""

    time: float
    u: GridFunction
    ut: GridFunction


@dataclass(frozen=True, eq=False)
class EvolutionTrace:
    """Norm time series of one run, with optional snapshots and blow-up record."""

    kind: str
    backend: SpectrumBackend
    times: NDArray[np.float64]
    channels: dict[str, NDArray[np.float64]]
    options: TraceOptions
    snapshots: tuple[Snapshot, ...] = ()
    blowup: BlowupRecord | None = None
    initial: CauchyData | None = None
    nonlinearity: Nonlinearity | None = None
    step: float | None = None
    integrator: str | None = None
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        times = np.array(self.times, dtype=float)
        times.setflags(write=False)
        object.__setattr__(self, "times", times)
        if times.size > 1 and np.any(np.diff(times) <= 0):
            raise ParameterError("trace times must be strictly increasing")
        channels: dict[str, NDArray[np.float64]] = {}
        for name, values in self.channels.items():
            array = np.array(values, dtype=float)
            array.setflags(write=False)
            if array.shape != times.shape:
                raise DataError(f"channel '{name}' has {array.size} entries for {times.size} times")
            channels[name] = array
        object.__setattr__(self, "channels", channels)

    def __len__(self) -> int:
        return int(self.times.size)

    @property
    def blew_up(self) -> bool:
        return self.blowup is not None

    @property
    def final_time(self) -> float:
        return float(self.times[-1]) if self.times.size else 0.0

    def channel(self, name: str) -> NDArray[np.float64]:
        """Return one recorded norm series.

        Raises:
            DataError: If the channel was not recorded.
        """
        try:
            return self.channels[name]
        except KeyError:
            raise DataError(
                f"trace has no channel '{name}'; recorded: {', '.join(self.channels)}"
            ) from None

    def finite_view(self) -> tuple[NDArray[np.float64], dict[str, NDArray[np.float64]]]:
        """Times and channels without a non-finite terminal blow-up row."""
        if self.blowup is None or self.times.size == 0:
            return self.times, dict(self.channels)
        return self.times[:-1], {k: v[:-1] for k, v in self.channels.items()}


# -----------------------------------------------------------------------------
# Measurement
# -----------------------------------------------------------------------------


def _measure(
    backend: SpectrumBackend,
    a: NDArray[np.float64],
    b: NDArray[np.float64],
    options: TraceOptions,
    nonlinearity: Nonlinearity | None = None,
    u: NDArray[np.float64] | None = None,
) -> dict[str, NDArray[np.float64]]:
    """Evaluate every requested channel for a stack of states (rows)."""
    lam, w, transform = backend.eigenvalues, backend.weights, backend.transform
    if u is None:
        u = transform.inverse(a)

    out: dict[str, NDArray[np.float64]] = {
        "l1": weighted_lq(u, w, 1.0),
        "lq": weighted_lq(u, w, options.q),
        "l2": np.sqrt(np.sum(a**2, axis=-1)),
        "linf": np.max(np.abs(u), axis=-1),
        "h1dot": np.sqrt(np.sum(lam * a**2, axis=-1)),
        "ut_l2": np.sqrt(np.sum(b**2, axis=-1)),
    }
    extras = options.extras
    if "ut_linf" in extras:
        out["ut_linf"] = np.max(np.abs(transform.inverse(b)), axis=-1)
    if "h1dot_linf" in extras:
        out["h1dot_linf"] = np.max(np.abs(transform.inverse(np.sqrt(lam) * a)), axis=-1)
    if "ut_h1dot" in extras:
        out["ut_h1dot"] = np.sqrt(np.sum(lam * b**2, axis=-1))
    if "ut_h1dot_linf" in extras:
        out["ut_h1dot_linf"] = np.max(np.abs(transform.inverse(np.sqrt(lam) * b)), axis=-1)
    if "hs" in extras:
        out["hs"] = np.sqrt(np.sum((1.0 + lam) ** options.sobolev_s * a**2, axis=-1))
    if "f_l2" in extras or "f_lsigma" in extras:
        if nonlinearity is None:
            raise ParameterError("forcing channels need a nonlinearity")
        fu = nonlinearity(u)
        if "f_l2" in extras:
            out["f_l2"] = weighted_lq(fu, w, 2.0)
        if "f_lsigma" in extras:
            out["f_lsigma"] = weighted_lq(fu, w, nonlinearity.sigma)
    if "energy" in extras:
        energy = 0.5 * np.sum(b**2, axis=-1) + 0.5 * np.sum(lam * a**2, axis=-1)
        if nonlinearity is not None and not nonlinearity.is_zero:
            energy = energy + nonlinearity.potential(u, w)
        out["energy"] = energy
    return {name: np.atleast_1d(np.asarray(out[name], dtype=float)) for name in options.channels}


def lyapunov_energy(u: GridFunction, ut: GridFunction, nonlinearity: Nonlinearity | None = None) -> float:
    """``1/2 ||u_t||**2 + 1/2 ||A**(1/2) u||**2 + amplitude/(p+1) ||u||_{p+1}**(p+1)``.

    The potential term is only defined for the dissipative form ``-|u|^{p-1}u``.
    """
    check_same_backend(u.backend, ut.backend)
    if nonlinearity is not None and not nonlinearity.is_zero and not nonlinearity.is_dissipative:
        raise ParameterError("lyapunov_energy is defined for the dissipative form -|u|^{p-1}u only")
    transform = u.backend.transform
    a = transform.forward(u.samples)
    b = transform.forward(ut.samples)
    energy = 0.5 * np.sum(b**2) + 0.5 * np.sum(u.backend.eigenvalues * a**2)
    if nonlinearity is not None and not nonlinearity.is_zero:
        energy += nonlinearity.potential(u.samples, u.backend.weights)
    return float(energy)


def _check_times(times: ArrayLike) -> NDArray[np.float64]:
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise ParameterError("times must be a non-empty 1-D array")
    if not np.all(np.isfinite(t)) or np.any(t < 0):
        raise ParameterError("times must be finite and non-negative")
    if np.any(np.diff(t) <= 0):
        raise ParameterError("times must be strictly increasing")
    return t


def _underflow_count(kind: str, kernel: MultiplierKernel, t: float, lam: NDArray[np.float64]) -> int:
    """Modes whose multipliers are exactly 0.0 at time ``t``."""
    count = int(np.count_nonzero(kernel.underflow_mask(t, lam)))
    if count:
        logger.debug("%s: %d of %d modes underflow to 0 at t=%g", kind, count, lam.size, t)
    return count


def _coefficient_trace(
    kind: str,
    backend: SpectrumBackend,
    times: NDArray[np.float64],
    propagate: Callable[[NDArray[np.float64]], tuple[NDArray[np.float64], NDArray[np.float64]]],
    options: TraceOptions,
    initial: CauchyData | None,
    metadata: dict[str, Any] | None = None,
) -> EvolutionTrace:
    """Evaluate a closed-form flow at given times, chunk by chunk."""
    channels: dict[str, list[NDArray[np.float64]]] = {name: [] for name in options.channels}
    snapshots: list[Snapshot] = []
    stride = options.snapshot_stride

    for start in range(0, times.size, _TIME_CHUNK):
        chunk = times[start : start + _TIME_CHUNK]
        a, b = propagate(chunk[:, None])
        u = backend.transform.inverse(a)
        for name, values in _measure(backend, a, b, options, u=u).items():
            channels[name].append(values)
        if stride:
            for row in range(chunk.size):
                if (start + row) % stride == 0:
                    snapshots.append(
                        Snapshot(
                            time=float(chunk[row]),
                            u=GridFunction(u[row], backend),
                            ut=GridFunction(backend.transform.inverse(b[row]), backend),
                        )
                    )

    return EvolutionTrace(
        kind=kind,
        backend=backend,
        times=times,
        channels={name: np.concatenate(parts) for name, parts in channels.items()},
        options=options,
        snapshots=tuple(snapshots),
        initial=initial,
        metadata=metadata or {},
    )


# -----------------------------------------------------------------------------
# Linear flows
# -----------------------------------------------------------------------------


def linear_solve(
    data: CauchyData,
    times: ArrayLike,
    options: TraceOptions | None = None,
    kernel: MultiplierKernel = DEFAULT_KERNEL,
) -> EvolutionTrace:
    """Exact linear damped wave flow via the representation formula.

    ``c(t) = D(t)(c0 + c1) + dD/dt(t) c0`` and
    ``c_t(t) = dD/dt(t)(c0 + c1) + d2D/dt2(t) c0`` mode by mode.
    """
    options = options or TraceOptions()
    if any(name in FORCING_CHANNELS for name in options.extras):
        raise ParameterError("forcing channels are only recorded by nonlinear runs")
    t = _check_times(times)
    backend = data.backend
    lam = backend.eigenvalues
    c0 = backend.transform.forward(data.u0.samples)
    c1 = backend.transform.forward(data.u1.samples)

    def propagate(tc: NDArray[np.float64]) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        d = kernel.eval_D(tc, lam)
        dtd = kernel.eval_dtD(tc, lam)
        dt2d = -dtd - lam * d
        return d * (c0 + c1) + dtd * c0, dtd * (c0 + c1) + dt2d * c0

    underflow = _underflow_count("linear", kernel, float(t[-1]), lam) if t.size else 0
    return _coefficient_trace("linear", backend, t, propagate, options, data, {"underflow_modes": underflow})


def heat_solve(f: GridFunction, times: ArrayLike, options: TraceOptions | None = None) -> EvolutionTrace:
    """Heat flow ``exp(-tA) f``; the ``ut`` channels hold ``-A exp(-tA) f``."""
    options = options or TraceOptions()
    if any(name in FORCING_CHANNELS for name in options.extras):
        raise ParameterError("forcing channels are only recorded by nonlinear runs")
    t = _check_times(times)
    backend = f.backend
    lam = backend.eigenvalues
    c = backend.transform.forward(f.samples)

    def propagate(tc: NDArray[np.float64]) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        heat = np.exp(-tc * lam) * c
        return heat, -lam * heat

    return _coefficient_trace("heat", backend, t, propagate, options, CauchyData(f, backend.zeros()))


def diffusion_difference(
    data: CauchyData,
    times: ArrayLike,
    options: TraceOptions | None = None,
    kernel: MultiplierKernel = DEFAULT_KERNEL,
) -> EvolutionTrace:
    """Trace of ``u_lin(t) - exp(-tA)(u0 + u1)`` and of its time derivative."""
    options = options or TraceOptions()
    if any(name in FORCING_CHANNELS for name in options.extras):
        raise ParameterError("forcing channels are only recorded by nonlinear runs")
    t = _check_times(times)
    backend = data.backend
    lam = backend.eigenvalues
    c0 = backend.transform.forward(data.u0.samples)
    c1 = backend.transform.forward(data.u1.samples)

    def propagate(tc: NDArray[np.float64]) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        d = kernel.eval_D(tc, lam)
        dtd = kernel.eval_dtD(tc, lam)
        dt2d = -dtd - lam * d
        heat = np.exp(-tc * lam) * (c0 + c1)
        a = d * (c0 + c1) + dtd * c0 - heat
        b = dtd * (c0 + c1) + dt2d * c0 + lam * heat
        return a, b

    underflow = _underflow_count("diffusion-difference", kernel, float(t[-1]), lam) if t.size else 0
    return _coefficient_trace(
        "diffusion-difference", backend, t, propagate, options, data, {"underflow_modes": underflow}
    )


# -----------------------------------------------------------------------------
# Nonlinear flow
# -----------------------------------------------------------------------------


def nonlinear_evolve(
    data: CauchyData,
    nonlinearity: Nonlinearity,
    h: float = DEFAULT_STEP,
    T: float = 1.0,
    cap: float = DEFAULT_CAP,
    integrator: str = "euler",
    options: TraceOptions | None = None,
    kernel: MultiplierKernel = DEFAULT_KERNEL,
) -> EvolutionTrace:
    """Advance the mild-solution equation with an exponential integrator.

    One step with frozen forcing ``Fbar`` maps ``(a, b)`` to

        a' = D(h)(a + b) + dD/dt(h) a + I(h) Fbar
        b' = dD/dt(h)(a + b) + d2D/dt2(h) a + D(h) Fbar

    where ``Fbar`` is the transform of ``F(u)`` at the start of the step
    (``euler``) or at an Euler predictor half step (``midpoint``). Recorded
    times are ``n*h``. Crossing ``cap`` in sup norm, or any non-finite
    value, ends the run with a ``BlowupRecord`` on the trace.

    Raises:
        ParameterError: For a non-positive step, ``T < h``, a bad cap or an
            unknown integrator.
    """
    options = options or TraceOptions()
    if not math.isfinite(h) or h <= 0:
        raise ParameterError(f"step h must be positive, got {h}")
    if not math.isfinite(T) or T < h:
        raise ParameterError(f"horizon T must be >= h, got T={T}, h={h}")
    if not cap > 0:
        raise ParameterError(f"blow-up cap must be positive, got {cap}")
    if integrator not in INTEGRATORS:
        raise ParameterError(f"unknown integrator '{integrator}', expected one of {INTEGRATORS}")
    if "energy" in options.extras and not (nonlinearity.is_zero or nonlinearity.is_dissipative):
        raise ParameterError("the energy channel needs the dissipative form -|u|^{p-1}u")

    backend = data.backend
    transform = backend.transform
    full = kernel.step_multipliers(h, backend.eigenvalues)
    half = kernel.step_multipliers(h / 2.0, backend.eigenvalues) if integrator == "midpoint" else None
    underflow = _underflow_count("nonlinear step", kernel, h, backend.eigenvalues)

    n_steps = int(math.floor(T / h + 1e-9))
    logger.debug("nonlinear_evolve: %d %s steps of h=%g on %s", n_steps, integrator, h, backend.kind)

    a = transform.forward(data.u0.samples)
    b = transform.forward(data.u1.samples)
    u = np.array(data.u0.samples)

    times: list[float] = []
    rows: dict[str, list[float]] = {name: [] for name in options.channels}
    snapshots: list[Snapshot] = []
    blowup: BlowupRecord | None = None

    def record(step: int, a: NDArray, b: NDArray, u: NDArray) -> None:
        times.append(step * h)
        values = _measure(backend, a[None, :], b[None, :], options, nonlinearity, u[None, :])
        for name, value in values.items():
            rows[name].append(float(value[0]))

    def keep(step: int, u: NDArray, b: NDArray) -> None:
        snapshots.append(
            Snapshot(step * h, GridFunction(u, backend), GridFunction(transform.inverse(b), backend))
        )

    record(0, a, b, u)
    record_count = 1
    if options.snapshot_stride:
        keep(0, u, b)

    with np.errstate(over="ignore", invalid="ignore"):
        for step in range(1, n_steps + 1):
            forcing = transform.forward(nonlinearity(u))
            if half is not None:
                a_half = half.D * (a + b) + half.dtD * a + half.integral * forcing
                forcing = transform.forward(nonlinearity(transform.inverse(a_half)))

            a, b = (
                full.D * (a + b) + full.dtD * a + full.integral * forcing,
                full.dtD * (a + b) + full.dt2D * a + full.D * forcing,
            )
            u = transform.inverse(a)

            finite = bool(np.all(np.isfinite(u)) and np.all(np.isfinite(b)))
            linf = float(np.max(np.abs(u))) if finite else math.inf
            if not finite or linf > cap:
                reason = "non-finite state" if not finite else f"sup norm exceeded cap {cap:g}"
                blowup = BlowupRecord(time=step * h, reason=reason, linf=linf)
                record(step, a, b, u)
                logger.warning("Numerical blow-up at t=%g: %s", step * h, reason)
                break

            if step % options.record_stride == 0 or step == n_steps:
                record(step, a, b, u)
                if options.snapshot_stride and record_count % options.snapshot_stride == 0:
                    keep(step, u, b)
                record_count += 1

    return EvolutionTrace(
        kind="nonlinear",
        backend=backend,
        times=np.array(times),
        channels={name: np.array(values) for name, values in rows.items()},
        options=options,
        snapshots=tuple(snapshots),
        blowup=blowup,
        initial=data,
        nonlinearity=nonlinearity,
        step=h,
        integrator=integrator,
        metadata={"underflow_modes": underflow},
    )


# -----------------------------------------------------------------------------
# A posteriori check
# -----------------------------------------------------------------------------


def duhamel_residual(
    trace: EvolutionTrace,
    nonlinearity: Nonlinearity,
    sample_times: ArrayLike,
    kernel: MultiplierKernel = DEFAULT_KERNEL,
) -> float:
    """Max L2 defect of the mild-solution equation at ``sample_times``.

    The Duhamel integral is approximated by the trapezoidal rule over the
    stored snapshots up to each sample time, so sample times must be
    snapshot times and the residual has a quadrature floor set by the
    snapshot spacing.

    Raises:
        ParameterError: With fewer than two snapshots, or a sample time that
            is not a snapshot time.
        DataError: If the trace does not carry its initial data.
    """
    if len(trace.snapshots) < 2:
        raise ParameterError(
            f"duhamel_residual needs at least 2 snapshots, trace has {len(trace.snapshots)}"
        )
    if trace.initial is None:
        raise DataError("trace does not carry its initial data")

    backend = trace.backend
    transform = backend.transform
    lam = backend.eigenvalues
    snap_times = np.array([s.time for s in trace.snapshots])
    coeffs = np.array([transform.forward(s.u.samples) for s in trace.snapshots])
    forcing = np.array([transform.forward(nonlinearity(s.u.samples)) for s in trace.snapshots])
    c0 = transform.forward(trace.initial.u0.samples)
    c1 = transform.forward(trace.initial.u1.samples)

    worst = 0.0
    for t in np.atleast_1d(np.asarray(sample_times, dtype=float)):
        matches = np.flatnonzero(np.abs(snap_times - t) <= _TIME_MATCH * max(1.0, abs(t)))
        if matches.size == 0:
            raise ParameterError(f"sample time {t} is not a snapshot time")
        i = int(matches[0])
        tau = snap_times[i]
        linear = kernel.eval_D(tau, lam) * (c0 + c1) + kernel.eval_dtD(tau, lam) * c0
        if i == 0:
            duhamel = np.zeros_like(linear)
        else:
            lags = tau - snap_times[: i + 1]
            integrand = kernel.eval_D(lags[:, None], lam) * forcing[: i + 1]
            duhamel = scipy.integrate.trapezoid(integrand, x=snap_times[: i + 1], axis=0)
        defect = coeffs[i] - linear - duhamel
        worst = max(worst, float(np.sqrt(np.sum(defect**2))))
    return worst

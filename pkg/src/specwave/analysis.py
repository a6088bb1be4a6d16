"""Decay fits, predicted exponents, weighted norms and numerical bound checks."""

import logging
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from numpy.typing import NDArray

from .backends import (
    GridFunction,
    SpectrumBackend,
    heat_operator_norm,
    weighted_lq,
)
from .errors import DataError, ParameterError
from .evolution import EvolutionTrace
from .fitting import DecayFit, fit_power_law
from .kernels import DEFAULT_KERNEL, DIFF_SYMBOL_LIMIT, QUARTER, MultiplierKernel
from .types import CriticalityPayload, InequalityPayload, KernelBoundsPayload
from .utils import japanese_bracket, map_in_order

logger = logging.getLogger("specwave")

# -----------------------------------------------------------------------------
# Decay fits
# -----------------------------------------------------------------------------


def fit_decay(
    trace: EvolutionTrace, which_norm: str, window: tuple[float, float]
) -> DecayFit:
    """Fit ``norm ~ C t**(-exponent)`` to one trace channel inside ``window``.

    A terminal blow-up row is never part of the fit.

    Raises:
        DataError: If the channel is missing or not positive in the window.
        ParameterError: If the window holds fewer than 8 recorded times.
    """
    trace.channel(which_norm)
    times, channels = trace.finite_view()
    fit = fit_power_law(times, channels[which_norm], window)
    if fit.regime == "non-power":
        logger.warning(
            "Poor power-law fit for %s on [%g, %g]: r2=%.3f", which_norm, window[0], window[1], fit.r_squared
        )
    return fit


# -----------------------------------------------------------------------------
# Predicted exponents
# -----------------------------------------------------------------------------

PREDICTION_TARGETS = ("Linf", "L2", "diff_Linf", "diff_L2")


@dataclass(frozen=True)
class ExponentPrediction:
    """Decay exponent of the linear flow in a given norm."""

    alpha: float
    q: float
    k: int
    s: float
    target: str
    predicted: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "alpha": self.alpha,
            "q": self.q,
            "k": self.k,
            "s": self.s,
            "target": self.target,
            "predicted": self.predicted,
        }


def _check_q(q: float) -> None:
    if not 1.0 <= q <= 2.0:
        raise ParameterError(f"q must be in [1, 2], got {q}")


def predict_exponent(alpha: float, q: float, k: int, s: float, target: str) -> ExponentPrediction:
    """Exponent of ``t`` in the Matsumura-type decay of the k-th time derivative.

    ``Linf``: ``2 alpha/q + k + s/2``; ``L2``: ``2 alpha (1/q - 1/2) + k + s/2``.
    The ``diff_`` targets (solution minus heat flow) gain one more power.
    """
    if not alpha > 0:
        raise ParameterError(f"alpha must be positive, got {alpha}")
    _check_q(q)
    if k not in (0, 1):
        raise ParameterError(f"k must be 0 or 1, got {k}")
    if not s >= 0:
        raise ParameterError(f"s must be non-negative, got {s}")
    if target not in PREDICTION_TARGETS:
        raise ParameterError(f"unknown target '{target}', expected one of {PREDICTION_TARGETS}")

    base = target.removeprefix("diff_")
    if base == "Linf":
        predicted = 2.0 * alpha / q + k + s / 2.0
    else:
        predicted = 2.0 * alpha * (1.0 / q - 0.5) + k + s / 2.0
    if target.startswith("diff_"):
        predicted += 1.0
    return ExponentPrediction(alpha, q, k, s, target, predicted)


# -----------------------------------------------------------------------------
# Criticality
# -----------------------------------------------------------------------------

DELTA_NOTE = (
    "delta follows the weight definition (1 only when q = 2 alpha (p-1)); "
    "the global existence statement reads 'delta = 1 if q <= 2 alpha (p-1)'"
)


def fujita_exponent(alpha: float, q: float = 1.0) -> float:
    """``p_F = 1 + q / (2 alpha)``."""
    return 1.0 + q / (2.0 * alpha)


@dataclass(frozen=True)
class CriticalityRecord:
    """Admissibility of a nonlinearity power for small-data global existence."""

    p: float
    q: float
    alpha: float
    p_F: float
    admissible: bool
    delta: int
    sigma: float
    q_range: tuple[float, float] | None
    reasons: tuple[str, ...] = ()
    note: str = ""

    def to_dict(self) -> CriticalityPayload:
        return {
            "p": self.p,
            "q": self.q,
            "alpha": self.alpha,
            "p_F": self.p_F,
            "admissible": self.admissible,
            "delta": self.delta,
            "sigma": self.sigma,
            "q_range": list(self.q_range) if self.q_range is not None else None,
            "reasons": list(self.reasons),
            "note": self.note,
        }


def criticality(p: float, q: float, alpha: float) -> CriticalityRecord:
    """Evaluate the supercriticality conditions for ``(p, q, alpha)``.

    Admissible requires ``p > p_F(alpha, 1)``, ``2/p < 2 alpha (p-1)``,
    ``q`` in ``[max(1, 2/p), min(2, 2 alpha (p-1))]`` and, when
    ``alpha > 1/2``, ``p <= 2 alpha / (2 alpha - 1)``.
    """
    if not p > 1:
        raise ParameterError(f"p must be > 1, got {p}")
    _check_q(q)
    if not alpha > 0:
        raise ParameterError(f"alpha must be positive, got {alpha}")

    growth = 2.0 * alpha * (p - 1.0)
    sigma = max(1.0, 2.0 / p)
    q_lo, q_hi = max(1.0, 2.0 / p), min(2.0, growth)
    q_range = (q_lo, q_hi) if q_lo <= q_hi else None

    reasons = []
    if not p > fujita_exponent(alpha, 1.0):
        reasons.append(f"p <= p_F(alpha, 1) = {fujita_exponent(alpha, 1.0):.6g}")
    if not 2.0 / p < growth:
        reasons.append(f"2/p >= 2 alpha (p-1) = {growth:.6g}")
    if q_range is None or not q_lo <= q <= q_hi:
        reasons.append(f"q outside [max(1, 2/p), min(2, 2 alpha (p-1))] = [{q_lo:.6g}, {q_hi:.6g}]")
    if alpha > 0.5 and p > 2.0 * alpha / (2.0 * alpha - 1.0):
        reasons.append(f"p > 2 alpha/(2 alpha - 1) = {2.0 * alpha / (2.0 * alpha - 1.0):.6g}")

    delta = 1 if math.isclose(q, growth, rel_tol=1e-12, abs_tol=0.0) else 0
    return CriticalityRecord(
        p=p,
        q=q,
        alpha=alpha,
        p_F=fujita_exponent(alpha, q),
        admissible=not reasons,
        delta=delta,
        sigma=sigma,
        q_range=q_range,
        reasons=tuple(reasons),
        note=DELTA_NOTE if delta == 1 else "",
    )


# -----------------------------------------------------------------------------
# Weighted norms
# -----------------------------------------------------------------------------


def _finite_channels(trace: EvolutionTrace, names: tuple[str, ...]) -> tuple[NDArray, list[NDArray]]:
    times, channels = trace.finite_view()
    missing = [n for n in names if n not in channels]
    if missing:
        raise DataError(f"trace lacks channels {missing} needed for this norm")
    if times.size == 0:
        raise DataError("trace has no finite records")
    return times, [channels[n] for n in names]


def x_norm_series(trace: EvolutionTrace, q: float, alpha: float, delta: int) -> NDArray[np.float64]:
    """Per-time value of the X-norm weighted sum."""
    times, (ut, h1, l2) = _finite_channels(trace, ("ut_l2", "h1dot", "l2"))
    beta = 2.0 * alpha * (1.0 / q - 0.5)
    bracket = japanese_bracket(times)
    return (
        bracket ** (beta + 1.0) * np.log(2.0 + times) ** (-delta) * ut
        + bracket ** (beta + 0.5) * h1
        + bracket**beta * l2
    )


def weighted_X_norm(trace: EvolutionTrace, q: float, alpha: float, delta: int) -> float:
    """``sup_t`` of ``<t>**(b+1) log(2+t)**-delta ||u_t|| + <t>**(b+1/2) ||A^(1/2) u|| + <t>**b ||u||``.

    Here ``b = 2 alpha (1/q - 1/2)``.
    """
    return float(np.max(x_norm_series(trace, q, alpha, delta)))


def weighted_Y_norm(
    trace: EvolutionTrace, p: float, q: float, alpha: float, sigma: float | None = None
) -> float:
    """``sup_t`` of ``<t>**(2 alpha (1/q - 1/(2p)) p) ||F||_2 + <t>**(2 alpha (1/q - 1/(sigma p)) p) ||F||_sigma``."""
    if sigma is None:
        sigma = max(1.0, 2.0 / p)
    times, (f2, fs) = _finite_channels(trace, ("f_l2", "f_lsigma"))
    bracket = japanese_bracket(times)
    series = (
        bracket ** (2.0 * alpha * (1.0 / q - 1.0 / (2.0 * p)) * p) * f2
        + bracket ** (2.0 * alpha * (1.0 / q - 1.0 / (sigma * p)) * p) * fs
    )
    return float(np.max(series))


def interpolation_ratio(trace: EvolutionTrace, q: float, alpha: float, delta: int) -> float:
    """``sup_t <t>**(2 alpha/q) ||u(t)||_inf`` divided by the X-norm.

    The X-norm controls this quantity when ``alpha <= 1/2``.
    """
    times, (linf,) = _finite_channels(trace, ("linf",))
    numerator = float(np.max(japanese_bracket(times) ** (2.0 * alpha / q) * linf))
    x_norm = weighted_X_norm(trace, q, alpha, delta)
    if x_norm == 0.0:
        return 0.0 if numerator == 0.0 else math.inf
    return numerator / x_norm


# -----------------------------------------------------------------------------
# Kernel bound scans
# -----------------------------------------------------------------------------

DEFAULT_DIFF_TIMES = (10.0, 100.0, 1000.0, 10000.0)

# Relative change of a scanned constant under grid refinement still counted as stable
SCAN_STABILITY = 0.1


@dataclass(frozen=True)
class KernelBoundsReport:
    """Scanned constants of the multiplier bounds."""

    sup_D: float
    sup_dtD: float
    sup_quarter_column: float
    diff_constants: tuple[tuple[float, float], ...]
    diff_constant: float
    diff_constant_refined: float
    underflow_points: int = 0
    grid: dict[str, float] = field(default_factory=dict)

    @property
    def diff_stable(self) -> bool:
        if self.diff_constant == 0.0:
            return True
        change = abs(self.diff_constant_refined - self.diff_constant) / self.diff_constant
        return change <= SCAN_STABILITY

    def to_dict(self) -> KernelBoundsPayload:
        return {
            "sup_D": self.sup_D,
            "sup_dtD": self.sup_dtD,
            "sup_quarter_column": self.sup_quarter_column,
            "diff_constants": [{"t": t, "constant": c} for t, c in self.diff_constants],
            "diff_constant": self.diff_constant,
            "diff_constant_refined": self.diff_constant_refined,
            "diff_stable": self.diff_stable,
            "underflow_points": self.underflow_points,
            "grid": dict(self.grid),
        }


def diff_symbol_lambdas(n: int) -> NDArray[np.float64]:
    """Grid on ``[0, 1/8)`` dense near 0, where the symbol peaks for large t."""
    upper = np.nextafter(DIFF_SYMBOL_LIMIT, 0.0)
    grid = np.concatenate(
        [[0.0], np.geomspace(1e-9, upper, n), np.linspace(0.0, DIFF_SYMBOL_LIMIT, n, endpoint=False)]
    )
    return np.unique(grid)


def diff_symbol_constant(
    t: float, lambdas: NDArray[np.float64], kernel: MultiplierKernel = DEFAULT_KERNEL
) -> float:
    """``<t> * max_lambda |diffusion symbol(t, lambda)|`` over ``lambdas``."""
    values = np.abs(kernel.eval_diff_symbol(t, lambdas))
    return float(japanese_bracket(t) * np.max(values))


def scan_kernel_bounds(
    t_max: float = 100.0,
    lam_max: float = 100.0,
    n_t: int = 2000,
    n_lam: int = 2000,
    diff_times: tuple[float, ...] = DEFAULT_DIFF_TIMES,
    n_diff_lam: int = 4000,
    threads: int = 1,
    kernel: MultiplierKernel = DEFAULT_KERNEL,
) -> KernelBoundsReport:
    """Scan sup |D| and sup |dD/dt| on ``(0, t_max] x [0, lam_max]`` and the diffusion constants.

    The (t, lambda) grid is split into row blocks evaluated on ``threads``
    workers; the maxima do not depend on the split.
    """
    if n_t < 1 or n_lam < 1 or n_diff_lam < 2:
        raise ParameterError("scan grids need at least one point per axis")
    if not t_max > 0 or not lam_max >= 0:
        raise ParameterError(f"scan needs t_max > 0 and lam_max >= 0, got {t_max}, {lam_max}")

    t_grid = np.linspace(t_max / n_t, t_max, n_t)
    lam_grid = np.linspace(0.0, lam_max, n_lam)
    blocks = np.array_split(t_grid, max(1, min(n_t, 4 * max(1, threads))))

    def block_max(ts: NDArray[np.float64]) -> tuple[float, float, int]:
        tt = ts[:, None]
        return (
            float(np.max(np.abs(kernel.eval_D(tt, lam_grid)))),
            float(np.max(np.abs(kernel.eval_dtD(tt, lam_grid)))),
            int(np.count_nonzero(kernel.underflow_mask(tt, lam_grid))),
        )

    maxima = map_in_order(block_max, [b for b in blocks if b.size], threads)
    sup_d = max(m[0] for m in maxima)
    sup_dtd = max(m[1] for m in maxima)
    underflow = sum(m[2] for m in maxima)
    sup_quarter = float(np.max(np.abs(kernel.eval_D(t_grid, QUARTER))))

    lambdas = diff_symbol_lambdas(n_diff_lam)
    refined = diff_symbol_lambdas(2 * n_diff_lam)
    constants = tuple((float(t), diff_symbol_constant(t, lambdas, kernel)) for t in diff_times)
    diff_constant = max((c for _, c in constants), default=0.0)
    diff_refined = max((diff_symbol_constant(t, refined, kernel) for t in diff_times), default=0.0)

    logger.debug("Kernel scan: sup|D|=%.6g sup|dtD|=%.6g diff C=%.6g", sup_d, sup_dtd, diff_constant)
    logger.debug("Kernel scan: %d of %d grid points underflow to 0", underflow, n_t * n_lam)
    return KernelBoundsReport(
        sup_D=sup_d,
        sup_dtD=sup_dtd,
        sup_quarter_column=sup_quarter,
        diff_constants=constants,
        diff_constant=diff_constant,
        diff_constant_refined=diff_refined,
        underflow_points=underflow,
        grid={"t_max": t_max, "lam_max": lam_max, "n_t": n_t, "n_lam": n_lam, "n_diff_lam": n_diff_lam},
    )


def kernel_table(
    t_values: NDArray[np.float64],
    lam_values: NDArray[np.float64],
    kernel: MultiplierKernel = DEFAULT_KERNEL,
) -> list[tuple[float, float, float, float, float | None]]:
    """Rows ``(t, lambda, D, dtD, diff_symbol)``; the symbol is None for lambda >= 1/8."""
    tt, ll = np.meshgrid(np.asarray(t_values, float), np.asarray(lam_values, float), indexing="ij")
    tt, ll = tt.ravel(), ll.ravel()
    underflow = int(np.count_nonzero(kernel.underflow_mask(tt, ll)))
    if underflow:
        logger.debug("kernel_table: %d of %d entries underflow to 0", underflow, tt.size)
    d = kernel.eval_D(tt, ll)
    dtd = kernel.eval_dtD(tt, ll)
    inside = ll < DIFF_SYMBOL_LIMIT
    diff = np.full(tt.shape, np.nan)
    if inside.any():
        diff[inside] = kernel.eval_diff_symbol(tt[inside], ll[inside])
    return [
        (float(t), float(lam), float(dv), float(dtv), float(sv) if ok else None)
        for t, lam, dv, dtv, sv, ok in zip(tt, ll, d, dtd, diff, inside)
    ]


# -----------------------------------------------------------------------------
# Inequality checks
# -----------------------------------------------------------------------------

DEFAULT_LEVELS = (512, 1024, 2048, 4096)
DEFAULT_TRIALS = 200

# Test functions live on this lowest fraction of the coarsest level's modes
BAND_FRACTION = 0.25

# Relative change of the max ratio between levels still counted as bounded
BOUNDED_CHANGE = 0.2

INEQUALITIES = ("gagliardo-nirenberg", "sobolev", "critical-sobolev", "heat-smoothing", "heat-decay")


@dataclass(frozen=True)
class InequalityResult:
    """Max ratio of one inequality per refinement level."""

    inequality: str
    status: str
    per_level: tuple[tuple[int, float], ...] = ()
    reason: str = ""
    parameters: dict[str, float] = field(default_factory=dict)

    @property
    def max_ratio(self) -> float | None:
        return max(r for _, r in self.per_level) if self.per_level else None

    @property
    def passed(self) -> bool:
        return self.status != "unbounded"

    def to_dict(self) -> InequalityPayload:
        return {
            "inequality": self.inequality,
            "status": self.status,
            "max_ratio": self.max_ratio,
            "per_level": [{"modes": n, "max_ratio": r} for n, r in self.per_level],
            "reason": self.reason,
            "parameters": {k: "inf" if math.isinf(v) else v for k, v in self.parameters.items()},
        }


@dataclass(frozen=True)
class InequalityReport:
    results: tuple[InequalityResult, ...]
    levels: tuple[int, ...]
    trials: int
    seed: int

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def result(self, name: str) -> InequalityResult:
        for r in self.results:
            if r.inequality == name:
                return r
        raise KeyError(name)

    def to_dict(self) -> dict[str, Any]:
        return {
            "levels": list(self.levels),
            "trials": self.trials,
            "seed": self.seed,
            "passed": self.passed,
            "results": [r.to_dict() for r in self.results],
        }


def _spectral_norms(
    backend: SpectrumBackend, coeffs: NDArray[np.float64]
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    lam = backend.eigenvalues
    return np.sqrt(np.sum(coeffs**2, axis=-1)), np.sqrt(np.sum(lam * coeffs**2, axis=-1))


def gn_theta(alpha: float, q: float) -> float:
    """Interpolation exponent ``4 alpha (1/2 - 1/q)`` of the Gagliardo-Nirenberg inequality."""
    return 4.0 * alpha * (0.5 - 1.0 / q)


def critical_sobolev_exponent(alpha: float) -> float:
    """``4 alpha / (2 alpha - 1)``, defined for ``alpha > 1/2``."""
    if not alpha > 0.5:
        raise ParameterError(f"critical Sobolev exponent needs alpha > 1/2, got {alpha}")
    return 4.0 * alpha / (2.0 * alpha - 1.0)


def _gn_ratios(backend: SpectrumBackend, samples: NDArray, coeffs: NDArray, q: float, theta: float) -> Any:
    l2, h1 = _spectral_norms(backend, coeffs)
    return weighted_lq(samples, backend.weights, q) / (l2 ** (1.0 - theta) * h1**theta)


def _sobolev_ratios(backend: SpectrumBackend, samples: NDArray, coeffs: NDArray, q: float, s: float) -> Any:
    hs = np.sqrt(np.sum((1.0 + backend.eigenvalues) ** s * coeffs**2, axis=-1))
    return weighted_lq(samples, backend.weights, q) / hs


def _critical_sobolev_ratios(backend: SpectrumBackend, samples: NDArray, coeffs: NDArray, alpha: float) -> Any:
    _, h1 = _spectral_norms(backend, coeffs)
    return weighted_lq(samples, backend.weights, critical_sobolev_exponent(alpha)) / h1


def gagliardo_nirenberg_ratio(f: GridFunction, q: float, alpha: float) -> float:
    """``||f||_q / (||f||_2**(1-theta) ||A^(1/2) f||_2**theta)``."""
    c = f.backend.transform.forward(f.samples)
    return float(_gn_ratios(f.backend, f.samples, c, q, gn_theta(alpha, q)))


def sobolev_ratio(f: GridFunction, q: float, s: float) -> float:
    """``||f||_q / ||f||_{H^s(A)}``."""
    c = f.backend.transform.forward(f.samples)
    return float(_sobolev_ratios(f.backend, f.samples, c, q, s))


def critical_sobolev_ratio(f: GridFunction, alpha: float) -> float:
    """``||f||_r / ||A^(1/2) f||_2`` with ``r = 4 alpha / (2 alpha - 1)``."""
    c = f.backend.transform.forward(f.samples)
    return float(_critical_sobolev_ratios(f.backend, f.samples, c, alpha))


def _heat_times(backend: SpectrumBackend) -> NDArray[np.float64]:
    upper = min(100.0, backend.resolvable_time())
    return np.geomspace(1.0, upper, 16) if upper > 1.0 else np.array([1.0])


def check_inequalities(
    backend: SpectrumBackend,
    trials: int = DEFAULT_TRIALS,
    seed: int = 0,
    levels: tuple[int, ...] | None = DEFAULT_LEVELS,
    gn_q: float = math.inf,
    sobolev_q: float = math.inf,
    sobolev_s: float = 0.6,
    threads: int = 1,
) -> InequalityReport:
    """Max LHS/RHS ratios of the functional inequalities on random band-limited data.

    Interval backends are rebuilt at every mode count in ``levels``; the
    random coefficients are drawn once on the lowest quarter of the coarsest
    level's modes, so every level samples the same continuum functions.
    Other backends are checked at their own resolution only. An inequality
    whose max ratio changes by 20% or more between consecutive levels is
    reported as unbounded.
    """
    if trials < 1:
        raise ParameterError(f"trials must be >= 1, got {trials}")
    alpha = backend.alpha
    if alpha is None:
        raise ParameterError("check_inequalities needs a backend with a known alpha")

    if backend.is_interval and backend.spec is not None and levels:
        level_modes = tuple(sorted(set(int(n) for n in levels)))
        backends = [backend if n == backend.mode_count else backend.refined(n) for n in level_modes]
    else:
        level_modes = (backend.mode_count,)
        backends = [backend]

    coarse = backends[0]
    band = max(1, int(BAND_FRACTION * coarse.mode_count))
    nonzero = np.flatnonzero(coarse.eigenvalues > 0)[:band]
    if nonzero.size == 0:
        raise ParameterError("backend has no non-zero modes to test")
    rng = np.random.default_rng(seed)
    draws = rng.standard_normal((trials, nonzero.size))

    theta = gn_theta(alpha, gn_q)
    gn_ok = gn_q >= 2 and 0 <= theta < 1
    sob_ok = sobolev_q >= 2 and sobolev_s > 2.0 * alpha * (1.0 - 2.0 / sobolev_q)
    crit_ok = alpha > 0.5

    def level_ratios(level: SpectrumBackend) -> dict[str, float]:
        coeffs = np.zeros((trials, level.mode_count))
        coeffs[:, nonzero] = draws
        samples = level.transform.inverse(coeffs)
        lam = level.eigenvalues
        ratios: dict[str, float] = {}
        if gn_ok:
            ratios["gagliardo-nirenberg"] = float(np.max(_gn_ratios(level, samples, coeffs, gn_q, theta)))
        if sob_ok:
            ratios["sobolev"] = float(np.max(_sobolev_ratios(level, samples, coeffs, sobolev_q, sobolev_s)))
        if crit_ok:
            ratios["critical-sobolev"] = float(np.max(_critical_sobolev_ratios(level, samples, coeffs, alpha)))
        times = _heat_times(level)
        smoothing = [np.max(np.sqrt(lam) * np.exp(-t * lam)) * math.sqrt(2.0 * math.e * t) for t in times]
        ratios["heat-smoothing"] = float(np.max(smoothing))
        ratios["heat-decay"] = float(max(t**alpha * heat_operator_norm(level, t) for t in times))
        return ratios

    per_level = map_in_order(level_ratios, backends, threads)

    skipped = {
        "gagliardo-nirenberg": "" if gn_ok else f"needs q >= 2 and theta = {theta:.4g} in [0, 1)",
        "sobolev": ""
        if sob_ok
        else f"needs q >= 2 and s > 2 alpha (1 - 2/q) = {2.0 * alpha * (1.0 - 2.0 / sobolev_q):.4g}",
        "critical-sobolev": "" if crit_ok else f"needs alpha > 1/2, backend has alpha = {alpha:.4g}",
        "heat-smoothing": "",
        "heat-decay": "",
    }
    parameters = {
        "gagliardo-nirenberg": {"q": gn_q, "theta": theta},
        "sobolev": {"q": sobolev_q, "s": sobolev_s},
        "critical-sobolev": {"r": critical_sobolev_exponent(alpha)} if crit_ok else {},
        "heat-smoothing": {},
        "heat-decay": {"alpha": alpha},
    }

    results = []
    for name in INEQUALITIES:
        if skipped[name]:
            logger.warning("Skipping %s: %s", name, skipped[name])
            results.append(InequalityResult(name, "skipped", reason=skipped[name], parameters=parameters[name]))
            continue
        rows = tuple((n, ratios[name]) for n, ratios in zip(level_modes, per_level))
        results.append(
            InequalityResult(name, _level_status(rows), per_level=rows, parameters=parameters[name])
        )
        logger.info("%s: max ratio %s", name, ", ".join(f"{n}:{r:.4g}" for n, r in rows))

    return InequalityReport(tuple(results), level_modes, trials, seed)


def _level_status(rows: tuple[tuple[int, float], ...]) -> str:
    if len(rows) < 2:
        return "single-level"
    for (_, prev), (_, cur) in zip(rows, rows[1:]):
        if prev == 0.0 or abs(cur - prev) / prev >= BOUNDED_CHANGE:
            return "unbounded"
    return "bounded"


# -----------------------------------------------------------------------------
# Documented operators
# -----------------------------------------------------------------------------


@dataclass(frozen=True)
class DocumentedOperator:
    """An operator with a known decay index but no backend."""

    name: str
    alpha_formula: str
    conditions: str


DOCUMENTED_OPERATORS = (
    DocumentedOperator("dirichlet-laplacian", "d/4", "any open set in R^d"),
    DocumentedOperator("robin-laplacian", "d/4", "exterior domains; d = 1, 2 need a positive Robin coefficient"),
    DocumentedOperator("schrodinger-kato", "d/4", "Kato-class potential; V_- = 0 for d = 1, 2"),
    DocumentedOperator("schrodinger-delta", "1/4", "repulsive Dirac delta on R, d = 1"),
    DocumentedOperator("elliptic", "d/4", "divergence-form, uniformly elliptic"),
    DocumentedOperator("sierpinski", "log2(d+1) / (2 log2(d+3))", "unbounded gasket in R^d, d >= 2"),
    DocumentedOperator("fractional", "d/(m nu)", "A**(nu/2) of a base with heat-kernel exponent m"),
)


def documented_alpha(operator: str, d: int = 1, m: float = 2.0, nu: float = 2.0) -> float:
    """Decay index of a documented operator in dimension ``d``."""
    if d < 1:
        raise ParameterError(f"dimension must be >= 1, got {d}")
    if operator in ("dirichlet-laplacian", "robin-laplacian", "schrodinger-kato", "elliptic"):
        return d / 4.0
    if operator == "schrodinger-delta":
        if d != 1:
            raise ParameterError("the delta-potential operator lives on R, d = 1")
        return 0.25
    if operator == "sierpinski":
        if d < 2:
            raise ParameterError("the Sierpinski gasket needs d >= 2")
        return math.log2(d + 1) / (2.0 * math.log2(d + 3))
    if operator == "fractional":
        if not nu > 0 or not m > 0:
            raise ParameterError(f"fractional operator needs m > 0 and nu > 0, got m={m}, nu={nu}")
        return d / (m * nu)
    names = ", ".join(op.name for op in DOCUMENTED_OPERATORS)
    raise ParameterError(f"unknown operator '{operator}', expected one of {names}")

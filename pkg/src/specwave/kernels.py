"""Scalar multipliers of the damped wave equation.

``D(t, lam)`` solves ``y'' + y' + lam*y = 0`` with ``y(0) = 0``, ``y'(0) = 1``.
It has a hyperbolic branch for ``lam < 1/4``, a polynomial branch at
``lam = 1/4`` and an oscillatory branch above. Near ``lam = 1/4`` both outer
branches are replaced by the power series of ``sinh(t w)/w`` in ``w**2``,
which continues them analytically through the branch point.

All evaluators broadcast over ``t`` and ``lam`` and return a float when both
arguments are scalars.
"""

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, NamedTuple

import numpy as np
from numpy.polynomial import polynomial
from numpy.typing import ArrayLike, NDArray

from .errors import DomainError, ParameterError

QUARTER = 0.25

# Upper end of the range on which the diffusion symbol is defined
DIFF_SYMBOL_LIMIT = 0.125

DEFAULT_BRANCH_THRESHOLD = 1e-6
DEFAULT_SERIES_TERMS = 12

# exp(x) is exactly 0.0 in double precision below this
LOG_UNDERFLOW = -745.0


@lru_cache(maxsize=None)
def _series_coeffs(terms: int, offset: int) -> NDArray[np.float64]:
    """Coefficients ``1/(2n + offset)!`` for n = 0..terms-1."""
    return np.array([1.0 / math.factorial(2 * n + offset) for n in range(terms)])


def _prepare(t: ArrayLike, lam: ArrayLike, t_name: str = "t") -> tuple[NDArray, NDArray, bool]:
    t_arr = np.asarray(t, dtype=float)
    lam_arr = np.asarray(lam, dtype=float)
    scalar = t_arr.ndim == 0 and lam_arr.ndim == 0
    if not np.all(np.isfinite(t_arr)) or np.any(t_arr < 0):
        raise ParameterError(f"{t_name} must be finite and non-negative")
    if not np.all(np.isfinite(lam_arr)) or np.any(lam_arr < 0):
        raise ParameterError("lambda must be finite and non-negative")
    t_b, lam_b = np.broadcast_arrays(t_arr, lam_arr)
    return np.atleast_1d(t_b), np.atleast_1d(lam_b), scalar


def _finish(out: NDArray[np.float64], scalar: bool) -> Any:
    if scalar:
        return float(out.reshape(-1)[0])
    return out


class StepMultipliers(NamedTuple):
    """Per-mode multipliers of one exponential-integrator step of size h."""

    D: NDArray[np.float64]
    dtD: NDArray[np.float64]
    dt2D: NDArray[np.float64]
    integral: NDArray[np.float64]


@dataclass(frozen=True)
class MultiplierKernel:
    """Evaluators for D, its time derivatives, the heat symbol and related symbols.

    Attributes:
        branch_threshold: Half-width of the series window around ``lam = 1/4``.
        series_terms: Number of series terms used inside the window.
    """

    branch_threshold: float = DEFAULT_BRANCH_THRESHOLD
    series_terms: int = DEFAULT_SERIES_TERMS

    def __post_init__(self) -> None:
        if not 0 < self.branch_threshold < DIFF_SYMBOL_LIMIT:
            raise ParameterError(
                f"branch_threshold must be in (0, {DIFF_SYMBOL_LIMIT}), got {self.branch_threshold}"
            )
        if self.series_terms < 1:
            raise ParameterError(f"series_terms must be >= 1, got {self.series_terms}")

    # -------------------------------------------------------------------------
    # Branch selection
    # -------------------------------------------------------------------------

    def _branches(self, t: NDArray, z: NDArray) -> tuple[NDArray, NDArray, NDArray]:
        series = (np.abs(z) < self.branch_threshold) & (t * t * np.abs(z) <= 1.0)
        hyper = (z > 0) & ~series
        osc = (z < 0) & ~series
        return series, hyper, osc

    def _sinhc(self, x: NDArray) -> NDArray:
        return np.asarray(polynomial.polyval(x, _series_coeffs(self.series_terms, 1)))

    def _cosh(self, x: NDArray) -> NDArray:
        return np.asarray(polynomial.polyval(x, _series_coeffs(self.series_terms, 0)))

    def underflow_mask(self, t: ArrayLike, lam: ArrayLike) -> NDArray[np.bool_]:
        """True where every term of D and its derivatives underflows to 0.0."""
        t_arr, lam_arr, _ = _prepare(t, lam)
        z = QUARTER - lam_arr
        omega = np.sqrt(np.maximum(z, 0.0))
        growth = np.where(z > 0, -lam_arr / (0.5 + omega), -0.5)
        return np.asarray(t_arr * growth < LOG_UNDERFLOW)

    # -------------------------------------------------------------------------
    # Multipliers
    # -------------------------------------------------------------------------

    def eval_D(self, t: ArrayLike, lam: ArrayLike) -> Any:
        """Evaluate ``D(t, lam)``.

        On the hyperbolic branch this is ``e**(-t/2) sinh(t w)/w`` with
        ``w = sqrt(1/4 - lam)``, rewritten as
        ``e**(t r+) * (1 - e**(-2 t w)) / (2 w)`` where ``r+ = -lam/(1/2 + w)``
        so that large ``t`` and small ``lam`` lose no digits.
        """
        t, lam, scalar = _prepare(t, lam)
        z = QUARTER - lam
        out = np.empty(t.shape)
        series, hyper, osc = self._branches(t, z)

        if series.any():
            ts, zs = t[series], z[series]
            out[series] = ts * np.exp(-0.5 * ts) * self._sinhc(ts * ts * zs)
        if hyper.any():
            th, lh = t[hyper], lam[hyper]
            omega = np.sqrt(z[hyper])
            r_plus = -lh / (0.5 + omega)
            out[hyper] = np.exp(th * r_plus) * (-np.expm1(-2.0 * th * omega)) / (2.0 * omega)
        if osc.any():
            to = t[osc]
            omega = np.sqrt(-z[osc])
            out[osc] = np.exp(-0.5 * to) * np.sin(to * omega) / omega

        return _finish(out, scalar)

    def eval_dtD(self, t: ArrayLike, lam: ArrayLike) -> Any:
        """Evaluate ``dD/dt = -D/2 + e**(-t/2) cosh(t w)`` (``cos`` above 1/4)."""
        t, lam, scalar = _prepare(t, lam)
        z = QUARTER - lam
        out = np.empty(t.shape)
        series, hyper, osc = self._branches(t, z)

        if series.any():
            ts, zs = t[series], z[series]
            x = ts * ts * zs
            decay = np.exp(-0.5 * ts)
            out[series] = decay * (self._cosh(x) - 0.5 * ts * self._sinhc(x))
        if hyper.any():
            th, lh = t[hyper], lam[hyper]
            omega = np.sqrt(z[hyper])
            r_plus = -lh / (0.5 + omega)
            r_minus = -0.5 - omega
            out[hyper] = (r_plus * np.exp(th * r_plus) - r_minus * np.exp(th * r_minus)) / (
                2.0 * omega
            )
        if osc.any():
            to = t[osc]
            omega = np.sqrt(-z[osc])
            decay = np.exp(-0.5 * to)
            out[osc] = decay * (np.cos(to * omega) - 0.5 * np.sin(to * omega) / omega)

        return _finish(out, scalar)

    def eval_dt2D(self, t: ArrayLike, lam: ArrayLike) -> Any:
        """Evaluate ``d2D/dt2 = -dD/dt - lam*D``."""
        d = np.asarray(self.eval_D(t, lam))
        dtd = np.asarray(self.eval_dtD(t, lam))
        result = -dtd - np.asarray(lam, dtype=float) * d
        return float(result) if _both_scalar(t, lam) else result

    def eval_heat(self, t: ArrayLike, lam: ArrayLike) -> Any:
        """Heat symbol ``exp(-t*lam)``."""
        t, lam, scalar = _prepare(t, lam)
        return _finish(np.exp(-t * lam), scalar)

    def eval_step_integral(self, h: ArrayLike, lam: ArrayLike) -> Any:
        """Evaluate ``I(h, lam) = integral of D(s, lam) for s in [0, h]``.

        Hyperbolic modes away from 1/4 integrate the two exponentials
        directly; everything else uses ``(1 - dD/dt(h) - D(h)) / lam``.
        At ``lam = 0`` the value is ``h - 1 + e**-h``.
        """
        h_arr = np.asarray(h, dtype=float)
        if np.any(h_arr <= 0):
            raise ParameterError("step h must be positive")
        h, lam, scalar = _prepare(h, lam, t_name="h")
        z = QUARTER - lam
        out = np.empty(h.shape)
        series, hyper, _ = self._branches(h, z)
        hyper = hyper & (z >= self.branch_threshold)
        rest = ~hyper

        if hyper.any():
            hh, lh = h[hyper], lam[hyper]
            omega = np.sqrt(z[hyper])
            r_plus = -lh / (0.5 + omega)
            r_minus = -0.5 - omega
            safe = np.where(r_plus == 0.0, 1.0, r_plus)
            plus_term = np.where(r_plus == 0.0, hh, np.expm1(safe * hh) / safe)
            minus_term = np.expm1(r_minus * hh) / r_minus
            out[hyper] = (plus_term - minus_term) / (2.0 * omega)
        if rest.any():
            hr, lr = h[rest], lam[rest]
            out[rest] = (1.0 - self.eval_dtD(hr, lr) - self.eval_D(hr, lr)) / lr

        return _finish(out, scalar)

    def eval_diff_symbol(self, t: ArrayLike, lam: ArrayLike) -> Any:
        """Diffusion-difference symbol ``e**(t lam/2) (D(t, lam) - e**(-t lam))``.

        Defined for ``lam`` in ``[0, 1/8)``. With ``s = sqrt(1 - 4 lam)`` the
        symbol is evaluated as

            e**(-t lam/2) [(1/s - 1) E + (E - 1)] - e**(t (lam/2 - 1/2 - s/2)) / s

        where ``E = exp(-4 t lam**2 / (1 + s)**2)``, ``1/s - 1 = 4 lam/(s (1 + s))``
        and ``E - 1`` comes from ``expm1``.

        Raises:
            DomainError: If any ``lam >= 1/8``.
        """
        t, lam, scalar = _prepare(t, lam)
        if np.any(lam >= DIFF_SYMBOL_LIMIT):
            raise DomainError(f"diffusion symbol is defined for lambda in [0, {DIFF_SYMBOL_LIMIT})")
        s = np.sqrt(1.0 - 4.0 * lam)
        exponent = -4.0 * t * lam**2 / (1.0 + s) ** 2
        gap = 4.0 * lam / (s * (1.0 + s))
        head = np.exp(-0.5 * t * lam) * (gap * np.exp(exponent) + np.expm1(exponent))
        tail = np.exp(t * (0.5 * lam - 0.5 - 0.5 * s)) / s
        return _finish(head - tail, scalar)

    def step_multipliers(self, h: float, eigenvalues: NDArray[np.float64]) -> StepMultipliers:
        """All multipliers one integrator step of size ``h`` needs, per mode."""
        d = np.asarray(self.eval_D(h, eigenvalues), dtype=float)
        dtd = np.asarray(self.eval_dtD(h, eigenvalues), dtype=float)
        return StepMultipliers(
            D=d,
            dtD=dtd,
            dt2D=-dtd - eigenvalues * d,
            integral=np.asarray(self.eval_step_integral(h, eigenvalues), dtype=float),
        )


def _both_scalar(t: ArrayLike, lam: ArrayLike) -> bool:
    return np.ndim(t) == 0 and np.ndim(lam) == 0


DEFAULT_KERNEL = MultiplierKernel()


def eval_D(t: ArrayLike, lam: ArrayLike) -> Any:
    """``D(t, lam)`` with the default kernel settings."""
    return DEFAULT_KERNEL.eval_D(t, lam)


def eval_dtD(t: ArrayLike, lam: ArrayLike) -> Any:
    return DEFAULT_KERNEL.eval_dtD(t, lam)


def eval_dt2D(t: ArrayLike, lam: ArrayLike) -> Any:
    return DEFAULT_KERNEL.eval_dt2D(t, lam)


def eval_heat(t: ArrayLike, lam: ArrayLike) -> Any:
    return DEFAULT_KERNEL.eval_heat(t, lam)


def eval_step_integral(h: ArrayLike, lam: ArrayLike) -> Any:
    return DEFAULT_KERNEL.eval_step_integral(h, lam)


def eval_diff_symbol(t: ArrayLike, lam: ArrayLike) -> Any:
    return DEFAULT_KERNEL.eval_diff_symbol(t, lam)

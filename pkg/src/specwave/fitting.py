"""Power-law fitting of decaying time series."""

import logging
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from .errors import DataError, ParameterError
from .types import FitPayload

logger = logging.getLogger("specwave")

# Minimum number of samples for a fit to count as non-degenerate
MIN_FIT_POINTS = 8

# Below this r^2 a log-log fit is not reported as a power law
POWER_LAW_R2 = 0.95


@dataclass(frozen=True)
class DecayFit:
    """A fitted decay law ``norm ~ C * t**(-exponent)``.

    ``regime`` is ``"power"`` for a clean power law, ``"exponential"`` when a
    straight line in (t, log norm) explains the data better than one in
    (log t, log norm), and ``"non-power"`` when neither fits well.
    """

    exponent: float
    intercept: float
    window: tuple[float, float]
    r_squared: float
    n_points: int
    regime: str = "power"

    @property
    def is_power_law(self) -> bool:
        return self.regime == "power"

    def to_dict(self) -> FitPayload:
        return {
            "exponent": self.exponent,
            "intercept": self.intercept,
            "window": [self.window[0], self.window[1]],
            "r_squared": self.r_squared,
            "n_points": self.n_points,
            "regime": self.regime,
        }


def _r_squared(x: np.ndarray, y: np.ndarray, coeffs: np.ndarray) -> float:
    residual = y - np.polyval(coeffs, x)
    ss_res = float(np.sum(residual**2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        return 1.0 if ss_res == 0.0 else 0.0
    return max(0.0, 1.0 - ss_res / ss_tot)


def fit_power_law(
    times: ArrayLike,
    values: ArrayLike,
    window: tuple[float, float] | None = None,
) -> DecayFit:
    """Least-squares fit of log(values) against log(times).

    Args:
        times: Sample times, all positive inside the window.
        values: Norm values at those times.
        window: Closed interval ``(t_lo, t_hi)`` restricting the samples used.
            Defaults to the full range of ``times``.

    Returns:
        DecayFit with ``exponent = -slope``.

    Raises:
        ParameterError: If the window is inverted or holds fewer than 8 samples.
        DataError: If any value inside the window is not strictly positive.
    """
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    if t.shape != v.shape:
        raise ParameterError(f"times and values differ in shape: {t.shape} vs {v.shape}")

    if window is None:
        window = (float(t.min()), float(t.max())) if t.size else (0.0, 0.0)
    t_lo, t_hi = float(window[0]), float(window[1])
    if not t_lo < t_hi:
        raise ParameterError(f"fit window must satisfy t_lo < t_hi, got ({t_lo}, {t_hi})")

    mask = (t >= t_lo) & (t <= t_hi) & (t > 0)
    n_points = int(mask.sum())
    if n_points < MIN_FIT_POINTS:
        raise ParameterError(
            f"fit window ({t_lo}, {t_hi}) holds {n_points} samples, "
            f"need at least {MIN_FIT_POINTS}"
        )

    tw, vw = t[mask], v[mask]
    if not np.all(np.isfinite(vw)) or np.any(vw <= 0):
        raise DataError(f"non-positive or non-finite norm values in window ({t_lo}, {t_hi})")

    log_t, log_v = np.log(tw), np.log(vw)
    coeffs = np.polyfit(log_t, log_v, 1)
    r2 = _r_squared(log_t, log_v, coeffs)

    semilog = np.polyfit(tw, log_v, 1)
    r2_semilog = _r_squared(tw, log_v, semilog)

    if r2_semilog > r2 and semilog[0] < 0:
        regime = "exponential"
    elif r2 < POWER_LAW_R2:
        regime = "non-power"
    else:
        regime = "power"

    if regime != "power":
        logger.debug(
            "Fit on (%g, %g) is %s: r2 log-log %.4f, r2 semilog %.4f",
            t_lo,
            t_hi,
            regime,
            r2,
            r2_semilog,
        )

    return DecayFit(
        exponent=float(-coeffs[0]),
        intercept=float(coeffs[1]),
        window=(t_lo, t_hi),
        r_squared=r2,
        n_points=n_points,
        regime=regime,
    )

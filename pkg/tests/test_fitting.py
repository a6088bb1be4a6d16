"""Tests for power-law decay fits."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from specwave import DataError, ParameterError, fit_power_law


class TestFitPowerLaw:
    """Tests for fit_power_law."""

    def test_exact_power_law(self):
        """A pure power law is recovered to machine precision."""
        t = np.geomspace(1.0, 1000.0, 50)
        fit = fit_power_law(t, 3.0 * t**-0.75)
        assert fit.exponent == pytest.approx(0.75, abs=1e-12)
        assert fit.intercept == pytest.approx(math.log(3.0), abs=1e-12)
        assert fit.r_squared == pytest.approx(1.0)
        assert fit.regime == "power"
        assert fit.n_points == 50

    @settings(max_examples=50, deadline=None)
    @given(scale=st.floats(min_value=1e-6, max_value=1e6))
    def test_scale_changes_intercept_only(self, scale):
        """Multiplying the series by c > 0 leaves the exponent unchanged."""
        t = np.geomspace(1.0, 100.0, 30)
        values = t**-0.25 * (1.0 + 0.01 * np.sin(t))
        base = fit_power_law(t, values)
        scaled = fit_power_law(t, scale * values)
        assert scaled.exponent == pytest.approx(base.exponent, abs=1e-9)
        assert scaled.intercept - base.intercept == pytest.approx(math.log(scale), abs=1e-9)

    def test_window_restricts_points(self):
        """Only samples inside the closed window are used."""
        t = np.arange(1.0, 101.0)
        values = np.where(t <= 50, t**-1.0, t**-3.0)
        fit = fit_power_law(t, values, (60.0, 100.0))
        assert fit.exponent == pytest.approx(3.0, abs=1e-12)
        assert fit.n_points == 41
        assert fit.window == (60.0, 100.0)

    def test_exponential_regime(self):
        """Exponential decay is flagged when a semilog fit is better."""
        t = np.linspace(10.0, 200.0, 40)
        fit = fit_power_law(t, np.exp(-0.5 * t))
        assert fit.regime == "exponential"
        assert not fit.is_power_law

    def test_non_power_regime(self):
        """A poor log-log fit is flagged as non-power."""
        t = np.geomspace(1.0, 100.0, 40)
        values = np.exp(-np.sin(4.0 * math.pi * np.log10(t)))
        fit = fit_power_law(t, values)
        assert fit.regime == "non-power"
        assert fit.r_squared < 0.95

    def test_too_few_points(self):
        """Fewer than 8 samples in the window raise ParameterError."""
        t = np.geomspace(1.0, 10.0, 7)
        with pytest.raises(ParameterError, match="at least 8"):
            fit_power_law(t, t**-1.0)

    def test_inverted_window(self):
        """t_lo >= t_hi raises ParameterError."""
        t = np.geomspace(1.0, 10.0, 20)
        with pytest.raises(ParameterError):
            fit_power_law(t, t, (5.0, 2.0))

    def test_non_positive_values(self):
        """Zero norms in the window raise DataError."""
        t = np.geomspace(1.0, 10.0, 20)
        values = t**-1.0
        values[4] = 0.0
        with pytest.raises(DataError):
            fit_power_law(t, values)

    def test_shape_mismatch(self):
        """times and values of different shapes raise ParameterError."""
        with pytest.raises(ParameterError):
            fit_power_law(np.ones(10), np.ones(9))

    def test_to_dict(self):
        """to_dict carries the window and r^2."""
        t = np.geomspace(1.0, 10.0, 20)
        payload = fit_power_law(t, t**-2.0).to_dict()
        assert payload["window"] == [1.0, 10.0]
        assert payload["regime"] == "power"
        assert set(payload) == {"exponent", "intercept", "window", "r_squared", "n_points", "regime"}

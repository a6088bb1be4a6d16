"""Tests for decay fits, exponent predictions, criticality and inequality checks."""

import logging
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from specwave import (
    DataError,
    ParameterError,
    TraceOptions,
    build_matrix_backend,
    check_inequalities,
    criticality,
    documented_alpha,
    fit_decay,
    fujita_exponent,
    interpolation_ratio,
    predict_exponent,
    weighted_X_norm,
    weighted_Y_norm,
)
from specwave.analysis import DELTA_NOTE, critical_sobolev_ratio, gagliardo_nirenberg_ratio, sobolev_ratio
from specwave.evolution import CORE_CHANNELS, BlowupRecord, EvolutionTrace


def _trace(backend, times, blowup=None, **values):
    """A hand-built trace; channels not given are zero."""
    times = np.asarray(times, dtype=float)
    channels = {name: np.zeros_like(times) for name in CORE_CHANNELS}
    extras = tuple(name for name in values if name not in CORE_CHANNELS)
    for name, series in values.items():
        channels[name] = np.asarray(series, dtype=float)
    return EvolutionTrace(
        kind="synthetic",
        backend=backend,
        times=times,
        channels=channels,
        options=TraceOptions(extras=extras),
        blowup=blowup,
    )


class TestFitDecay:
    """Tests for fit_decay on traces."""

    def test_synthetic_power_law(self, small_dirichlet):
        """The exponent of C t**-0.5 is recovered."""
        t = np.geomspace(1.0, 100.0, 40)
        fit = fit_decay(_trace(small_dirichlet, t, l2=3.0 * t**-0.5), "l2", (2.0, 90.0))
        assert fit.exponent == pytest.approx(0.5, abs=1e-10)
        assert fit.is_power_law

    def test_missing_channel(self, small_dirichlet):
        """Fitting an unrecorded channel raises DataError."""
        t = np.geomspace(1.0, 100.0, 40)
        with pytest.raises(DataError):
            fit_decay(_trace(small_dirichlet, t), "energy", (2.0, 90.0))

    def test_terminal_blowup_row_ignored(self, small_dirichlet):
        """A non-finite last row does not enter the fit."""
        t = np.geomspace(1.0, 100.0, 40)
        l2 = 2.0 * t**-0.25
        l2[-1] = math.inf
        trace = _trace(small_dirichlet, t, blowup=BlowupRecord(100.0, "non-finite state", math.inf), l2=l2)
        fit = fit_decay(trace, "l2", (1.0, 100.0))
        assert fit.exponent == pytest.approx(0.25, abs=1e-10)
        assert fit.n_points == 39

    def test_poor_fit_warns(self, small_dirichlet, caplog):
        """A non-power series logs a warning."""
        t = np.geomspace(1.0, 100.0, 40)
        series = np.exp(-np.sin(4.0 * math.pi * np.log10(t)))
        with caplog.at_level(logging.WARNING, logger="specwave"):
            fit = fit_decay(_trace(small_dirichlet, t, l2=series), "l2", (1.0, 100.0))
        assert fit.regime == "non-power"
        assert "Poor power-law fit" in caplog.text


class TestPredictExponent:
    """Tests for the predicted decay exponents."""

    @pytest.mark.parametrize(
        "q, k, s, target, expected",
        [
            (1.0, 0, 0.0, "L2", 0.25),
            (1.0, 1, 0.0, "L2", 1.25),
            (1.0, 0, 1.0, "L2", 0.75),
            (1.0, 0, 0.0, "Linf", 0.5),
            (1.0, 0, 0.0, "diff_L2", 1.25),
            (1.0, 0, 0.0, "diff_Linf", 1.5),
            (2.0, 0, 0.0, "L2", 0.0),
        ],
    )
    def test_dirichlet_values(self, q, k, s, target, expected):
        """Values for alpha = 1/4."""
        assert predict_exponent(0.25, q, k, s, target).predicted == pytest.approx(expected)

    @settings(max_examples=100, deadline=None)
    @given(
        alpha=st.floats(min_value=0.01, max_value=5.0),
        q=st.floats(min_value=1.0, max_value=2.0),
    )
    def test_monotone(self, alpha, q):
        """Exponents grow with k and s, and Linf decays at least as fast as L2."""
        base = predict_exponent(alpha, q, 0, 0.0, "L2").predicted
        assert predict_exponent(alpha, q, 1, 0.0, "L2").predicted == pytest.approx(base + 1.0)
        assert predict_exponent(alpha, q, 0, 1.0, "L2").predicted == pytest.approx(base + 0.5)
        assert predict_exponent(alpha, q, 0, 0.0, "Linf").predicted >= base

    @pytest.mark.parametrize(
        "args",
        [
            (0.0, 1.0, 0, 0.0, "L2"),
            (0.25, 0.5, 0, 0.0, "L2"),
            (0.25, 2.5, 0, 0.0, "L2"),
            (0.25, 1.0, 2, 0.0, "L2"),
            (0.25, 1.0, 0, -1.0, "L2"),
            (0.25, 1.0, 0, 0.0, "L3"),
        ],
    )
    def test_invalid(self, args):
        """Out-of-range parameters raise ParameterError."""
        with pytest.raises(ParameterError):
            predict_exponent(*args)


class TestCriticality:
    """Tests for the supercriticality record."""

    def test_fujita(self):
        """p_F = 1 + q / (2 alpha)."""
        assert fujita_exponent(0.25) == 3.0
        assert fujita_exponent(0.25, 1.5) == 4.0

    def test_admissible_cubic(self):
        """p = 4, q = 1 on a Dirichlet-type operator is admissible with delta = 0."""
        record = criticality(4.0, 1.0, 0.25)
        assert record.admissible
        assert record.p_F == 3.0
        assert record.q_range == (1.0, 1.5)
        assert record.delta == 0
        assert record.sigma == 1.0
        assert record.reasons == ()
        assert record.note == ""

    def test_upper_end_sets_delta(self):
        """q = 2 alpha (p-1) switches the log weight on and carries a note."""
        record = criticality(4.0, 1.5, 0.25)
        assert record.admissible
        assert record.delta == 1
        assert record.note == DELTA_NOTE

    @pytest.mark.parametrize("p, q", [(3.0, 1.5), (2.0, 1.0), (3.0, 1.0)])
    def test_inadmissible(self, p, q):
        """Powers at or below the Fujita exponent are rejected with reasons."""
        record = criticality(p, q, 0.25)
        assert not record.admissible
        assert record.reasons

    def test_sigma_for_small_p(self):
        """sigma = 2/p when p < 2."""
        record = criticality(1.5, 1.5, 2.0)
        assert record.sigma == pytest.approx(4.0 / 3.0)

    def test_to_dict(self):
        """The record serializes with a list q_range."""
        data = criticality(4.0, 1.0, 0.25).to_dict()
        assert data["q_range"] == [1.0, 1.5]
        assert data["reasons"] == []

    def test_invalid(self):
        """p <= 1 or q outside [1, 2] raise ParameterError."""
        with pytest.raises(ParameterError):
            criticality(1.0, 1.0, 0.25)
        with pytest.raises(ParameterError):
            criticality(3.0, 3.0, 0.25)


class TestWeightedNorms:
    """Tests for the X and Y norms and the interpolation ratio."""

    def test_x_norm_at_origin(self, small_dirichlet):
        """At t = 0 all weights are 1, so X is the plain sum."""
        trace = _trace(small_dirichlet, [0.0], l2=[1.0], h1dot=[1.0], ut_l2=[1.0], linf=[1.0])
        assert weighted_X_norm(trace, 1.0, 0.25, 0) == pytest.approx(3.0)
        assert interpolation_ratio(trace, 1.0, 0.25, 0) == pytest.approx(1.0 / 3.0)

    def test_x_norm_log_weight(self, small_dirichlet):
        """delta = 1 divides the u_t term by log 2 at t = 0."""
        trace = _trace(small_dirichlet, [0.0], ut_l2=[1.0])
        assert weighted_X_norm(trace, 1.0, 0.25, 1) == pytest.approx(1.0 / math.log(2.0))

    def test_x_norm_weights_decay(self, small_dirichlet):
        """A trace decaying at the predicted rates has a bounded X-norm."""
        t = np.linspace(0.0, 1000.0, 2001)
        bracket = np.sqrt(1.0 + t**2)
        trace = _trace(
            small_dirichlet,
            t,
            l2=bracket**-0.25,
            h1dot=bracket**-0.75,
            ut_l2=bracket**-1.25,
        )
        assert weighted_X_norm(trace, 1.0, 0.25, 0) == pytest.approx(3.0)

    def test_y_norm(self, small_dirichlet):
        """The Y-norm needs both forcing channels."""
        trace = _trace(small_dirichlet, [0.0], f_l2=[1.0], f_lsigma=[1.0])
        assert weighted_Y_norm(trace, 3.0, 1.0, 0.25) == pytest.approx(2.0)
        with pytest.raises(DataError):
            weighted_Y_norm(_trace(small_dirichlet, [0.0]), 3.0, 1.0, 0.25)

    def test_zero_trace(self, small_dirichlet):
        """A zero trace has a zero interpolation ratio."""
        assert interpolation_ratio(_trace(small_dirichlet, [0.0, 1.0]), 1.0, 0.25, 0) == 0.0


class TestInequalities:
    """Tests for the numerical inequality checks."""

    def test_dirichlet_bounded(self, small_dirichlet):
        """On the interval GN (q = inf) and Sobolev (s = 0.6) stay bounded under refinement."""
        report = check_inequalities(small_dirichlet, trials=40, seed=1, levels=(512, 1024, 2048))
        assert report.levels == (512, 1024, 2048)
        assert report.result("gagliardo-nirenberg").status == "bounded"
        assert report.result("sobolev").status == "bounded"
        assert report.result("heat-smoothing").passed
        assert report.result("heat-decay").passed
        assert report.passed

    @pytest.mark.slow
    def test_dirichlet_bounded_at_default_levels(self, small_dirichlet):
        """With the default 200 trials at 512 to 4096 modes every applicable inequality holds."""
        report = check_inequalities(small_dirichlet, seed=0)
        assert report.levels == (512, 1024, 2048, 4096)
        for name in ("gagliardo-nirenberg", "sobolev"):
            result = report.result(name)
            assert result.status == "bounded", result.per_level
            assert [n for n, _ in result.per_level] == [512, 1024, 2048, 4096]
        assert report.result("critical-sobolev").status == "skipped"
        assert report.passed

    def test_critical_sobolev_skipped(self, small_dirichlet, caplog):
        """alpha = 1/4 has no critical Sobolev exponent."""
        with caplog.at_level(logging.WARNING, logger="specwave"):
            report = check_inequalities(small_dirichlet, trials=5, levels=None)
        result = report.result("critical-sobolev")
        assert result.status == "skipped"
        assert result.passed
        assert "alpha" in result.reason
        assert "Skipping critical-sobolev" in caplog.text

    def test_single_level(self):
        """Backends without a rebuild recipe are checked at one level."""
        backend = build_matrix_backend(np.array([[2.0, -1.0], [-1.0, 2.0]]), alpha_hint=0.25)
        report = check_inequalities(backend, trials=3)
        assert report.levels == (2,)
        assert report.result("heat-decay").status == "single-level"

    def test_critical_sobolev_matches_helper(self):
        """The reported critical Sobolev ratio is the helper's value on the tested function."""
        backend = build_matrix_backend(np.diag([1.0, 4.0]), alpha_hint=1.0)
        report = check_inequalities(backend, trials=1, seed=5)
        # the band holds only the lowest mode, and the ratio is scale invariant
        expected = critical_sobolev_ratio(backend.eigenfunction(0), 1.0)
        assert expected == pytest.approx(1.0)
        assert report.result("critical-sobolev").max_ratio == pytest.approx(expected)

    def test_critical_sobolev_ratio_value(self):
        """||f||_4 / ||A^(1/2) f||_2 on a single mode with lambda = 4 is 1/2."""
        backend = build_matrix_backend(np.array([[4.0]]))
        f = backend.eigenfunction(0).scaled(3.0)
        assert critical_sobolev_ratio(f, 1.0) == pytest.approx(0.5)
        with pytest.raises(ParameterError):
            critical_sobolev_ratio(f, 0.5)

    def test_gn_skipped_below_two(self, small_dirichlet):
        """GN with q < 2 is outside its range."""
        report = check_inequalities(small_dirichlet, trials=5, levels=None, gn_q=1.0)
        assert report.result("gagliardo-nirenberg").status == "skipped"

    def test_same_seed_same_report(self, small_dirichlet):
        """Draws depend on the seed only, not on the thread count."""
        one = check_inequalities(small_dirichlet, trials=10, seed=3, levels=(128, 256))
        many = check_inequalities(small_dirichlet, trials=10, seed=3, levels=(128, 256), threads=2)
        assert one.to_dict() == many.to_dict()

    def test_needs_alpha(self, single_mode):
        """A backend without alpha cannot be checked."""
        with pytest.raises(ParameterError):
            check_inequalities(single_mode, trials=1)

    def test_ratios_scale_invariant(self, small_dirichlet):
        """The GN and Sobolev ratios are homogeneous of degree 0."""
        f = small_dirichlet.eigenfunction(3) + small_dirichlet.eigenfunction(7).scaled(0.5)
        assert gagliardo_nirenberg_ratio(f.scaled(7.0), math.inf, 0.25) == pytest.approx(
            gagliardo_nirenberg_ratio(f, math.inf, 0.25)
        )
        assert sobolev_ratio(f.scaled(0.01), math.inf, 0.6) == pytest.approx(sobolev_ratio(f, math.inf, 0.6))


class TestDocumentedAlpha:
    """Tests for the catalog of operators without a backend."""

    def test_values(self):
        """Known decay indices."""
        assert documented_alpha("dirichlet-laplacian", d=3) == 0.75
        assert documented_alpha("schrodinger-delta") == 0.25
        assert documented_alpha("sierpinski", d=2) == pytest.approx(math.log2(3) / (2 * math.log2(5)))
        assert documented_alpha("fractional", d=1, m=2.0, nu=1.0) == 0.5

    def test_invalid(self):
        """Unknown operators and impossible dimensions raise ParameterError."""
        with pytest.raises(ParameterError):
            documented_alpha("wave")
        with pytest.raises(ParameterError):
            documented_alpha("schrodinger-delta", d=2)
        with pytest.raises(ParameterError):
            documented_alpha("sierpinski", d=1)

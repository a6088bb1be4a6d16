"""Tests for linear propagation, heat flow and the nonlinear integrator."""

import logging
import math

import numpy as np
import pytest

from specwave import (
    CauchyData,
    DataError,
    Nonlinearity,
    NonlinearForm,
    ParameterError,
    TraceOptions,
    diffusion_difference,
    duhamel_residual,
    eval_D,
    eval_dtD,
    heat_solve,
    linear_solve,
    lyapunov_energy,
    nonlinear_evolve,
)
from specwave.evolution import CORE_CHANNELS


def _bump_data(backend, amplitude=1.0):
    x = backend.grid
    centre = 0.5 * (x[0] + x[-1])
    y = (x - centre) / 2.0
    shape = np.where(np.abs(y) < 1, np.exp(-1.0 / np.clip(1.0 - y**2, 1e-300, None)), 0.0)
    u0 = backend.function(amplitude * shape)
    return CauchyData(u0, u0)


def _rk4_cubic(u0, T, h):
    """Reference solution of u'' + u' + u = -u^3 with classical RK4."""

    def rhs(state):
        u, v = state
        return np.array([v, -v - u - u**3])

    state = np.array([u0, 0.0])
    for _ in range(int(round(T / h))):
        k1 = rhs(state)
        k2 = rhs(state + 0.5 * h * k1)
        k3 = rhs(state + 0.5 * h * k2)
        k4 = rhs(state + h * k3)
        state = state + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    return state[0]


class TestNonlinearity:
    """Tests for the power nonlinearities."""

    def test_forms(self):
        """Each form applies its sign convention."""
        u = np.array([-2.0, 0.0, 2.0])
        np.testing.assert_allclose(Nonlinearity(2.0, NonlinearForm.PLUS_ABS)(u), [4.0, 0.0, 4.0])
        np.testing.assert_allclose(Nonlinearity(2.0, NonlinearForm.MINUS_ABS)(u), [-4.0, 0.0, -4.0])
        np.testing.assert_allclose(Nonlinearity(2.0, NonlinearForm.SIGNED)(u), [-4.0, 0.0, 4.0])
        np.testing.assert_allclose(Nonlinearity(2.0, NonlinearForm.MINUS_SIGNED)(u), [4.0, 0.0, -4.0])

    def test_form_from_string(self):
        """Forms may be given by their string value."""
        assert Nonlinearity(3.0, "-|u|^{p-1}u").is_dissipative

    def test_invalid(self):
        """p <= 1 or an unknown form raise ParameterError."""
        with pytest.raises(ParameterError):
            Nonlinearity(1.0)
        with pytest.raises(ParameterError):
            Nonlinearity(2.0, "u^2")

    def test_zero(self):
        """The zero nonlinearity returns zeros."""
        nl = Nonlinearity.zero()
        assert nl.is_zero
        np.testing.assert_array_equal(nl(np.ones(3)), np.zeros(3))

    def test_sigma(self):
        """sigma is max(1, 2/p)."""
        assert Nonlinearity(4.0).sigma == 1.0
        assert Nonlinearity(1.5).sigma == pytest.approx(4.0 / 3.0)


class TestTraceOptions:
    """Tests for channel selection."""

    def test_extras_in_canonical_order(self):
        """Extras are reordered to the fixed channel order."""
        options = TraceOptions(extras=("energy", "ut_linf"))
        assert options.extras == ("ut_linf", "energy")
        assert options.channels == CORE_CHANNELS + ("ut_linf", "energy")

    def test_unknown_channel(self):
        """Unknown extras raise ParameterError."""
        with pytest.raises(ParameterError):
            TraceOptions(extras=("pressure",))

    def test_invalid_strides(self):
        """Strides must be positive (snapshots may be disabled with 0)."""
        with pytest.raises(ParameterError):
            TraceOptions(record_stride=0)
        with pytest.raises(ParameterError):
            TraceOptions(snapshot_stride=-1)


class TestLinearSolve:
    """Tests for the exact linear flow."""

    def test_zero_data(self, small_dirichlet):
        """Zero data stays zero."""
        trace = linear_solve(CauchyData.zero(small_dirichlet), [0.0, 1.0, 10.0])
        for name in CORE_CHANNELS:
            np.testing.assert_array_equal(trace.channel(name), 0.0)

    def test_single_mode(self, small_dirichlet):
        """An eigenfunction evolves by D + dD/dt of its eigenvalue."""
        k = 2
        lam = small_dirichlet.eigenvalues[k]
        e = small_dirichlet.eigenfunction(k)
        times = np.array([0.0, 0.5, 1.0, 5.0, 20.0])
        trace = linear_solve(CauchyData(e, small_dirichlet.zeros()), times)
        expected = np.abs(eval_D(times, lam) + eval_dtD(times, lam))
        np.testing.assert_allclose(trace.channel("l2"), expected, atol=1e-13)
        np.testing.assert_allclose(trace.channel("h1dot"), math.sqrt(lam) * expected, atol=1e-13)

    def test_time_derivative_energy_channels(self, small_dirichlet):
        """On one mode, A^(1/2) u_t is u_t scaled by the square root of the eigenvalue."""
        k = 3
        lam = small_dirichlet.eigenvalues[k]
        e = small_dirichlet.eigenfunction(k)
        options = TraceOptions(extras=("ut_linf", "ut_h1dot", "ut_h1dot_linf"))
        trace = linear_solve(CauchyData(e, e), [0.0, 0.7, 3.0], options)
        np.testing.assert_allclose(trace.channel("ut_h1dot"), math.sqrt(lam) * trace.channel("ut_l2"), rtol=1e-12)
        np.testing.assert_allclose(
            trace.channel("ut_h1dot_linf"), math.sqrt(lam) * trace.channel("ut_linf"), rtol=1e-10, atol=1e-14
        )

    def test_underflowed_modes_flagged(self, small_dirichlet, caplog):
        """At t = 2000 the oscillatory modes are exactly zero and counted on the trace."""
        data = _bump_data(small_dirichlet)
        assert linear_solve(data, [0.0, 10.0]).metadata["underflow_modes"] == 0
        with caplog.at_level(logging.DEBUG, logger="specwave"):
            trace = linear_solve(data, [0.0, 2000.0])
        count = trace.metadata["underflow_modes"]
        assert 0 < count < small_dirichlet.mode_count
        assert "modes underflow to 0" in caplog.text

    def test_initial_row_is_data(self, small_dirichlet):
        """At t = 0 the recorded norms are those of (u0, u1)."""
        data = _bump_data(small_dirichlet)
        trace = linear_solve(data, [0.0, 1.0])
        expected = np.linalg.norm(data.u0.samples * np.sqrt(small_dirichlet.weights))
        assert trace.channel("l2")[0] == pytest.approx(expected)

    def test_snapshots(self, small_dirichlet):
        """Snapshots are kept every snapshot_stride recorded times."""
        data = _bump_data(small_dirichlet)
        trace = linear_solve(data, np.linspace(0.0, 4.0, 5), TraceOptions(snapshot_stride=2))
        assert [s.time for s in trace.snapshots] == [0.0, 2.0, 4.0]

    def test_extras(self, small_dirichlet):
        """Requested extra channels are recorded; forcing channels are refused."""
        data = _bump_data(small_dirichlet)
        trace = linear_solve(data, [0.0, 1.0], TraceOptions(extras=("ut_linf", "hs", "energy")))
        assert {"ut_linf", "hs", "energy"} <= set(trace.channels)
        with pytest.raises(ParameterError):
            linear_solve(data, [0.0, 1.0], TraceOptions(extras=("f_l2",)))

    def test_times_validated(self, small_dirichlet):
        """Decreasing or negative times raise ParameterError."""
        data = CauchyData.zero(small_dirichlet)
        with pytest.raises(ParameterError):
            linear_solve(data, [1.0, 0.5])
        with pytest.raises(ParameterError):
            linear_solve(data, [-1.0, 0.5])

    def test_missing_channel(self, small_dirichlet):
        """Asking for an unrecorded channel raises DataError."""
        trace = linear_solve(CauchyData.zero(small_dirichlet), [0.0, 1.0])
        with pytest.raises(DataError):
            trace.channel("energy")

    def test_trace_is_read_only(self, small_dirichlet):
        """Recorded arrays cannot be modified."""
        trace = linear_solve(CauchyData.zero(small_dirichlet), [0.0, 1.0])
        with pytest.raises(ValueError):
            trace.channels["l2"][0] = 1.0


class TestHeatAndDiffusion:
    """Tests for the heat flow and the diffusion difference."""

    def test_heat_single_mode(self, small_dirichlet):
        """exp(-tA) e_k = exp(-t lambda_k) e_k, with -A exp(-tA) in the ut channel."""
        k = 5
        lam = small_dirichlet.eigenvalues[k]
        times = np.array([0.0, 1.0, 3.0])
        trace = heat_solve(small_dirichlet.eigenfunction(k), times)
        np.testing.assert_allclose(trace.channel("l2"), np.exp(-times * lam), atol=1e-13)
        np.testing.assert_allclose(trace.channel("ut_l2"), lam * np.exp(-times * lam), atol=1e-13)

    def test_difference_single_mode(self, small_dirichlet):
        """The difference trace is |D + dD/dt - exp(-t lambda)| on a mode."""
        k = 1
        lam = small_dirichlet.eigenvalues[k]
        times = np.array([0.0, 1.0, 10.0])
        e = small_dirichlet.eigenfunction(k)
        trace = diffusion_difference(CauchyData(e, small_dirichlet.zeros()), times)
        expected = np.abs(eval_D(times, lam) + eval_dtD(times, lam) - np.exp(-times * lam))
        np.testing.assert_allclose(trace.channel("l2"), expected, atol=1e-13)
        assert trace.kind == "diffusion-difference"


class TestNonlinearEvolve:
    """Tests for the exponential integrator."""

    def test_zero_forcing_matches_linear(self, small_dirichlet):
        """With F = 0 the integrator reproduces the exact linear flow."""
        data = _bump_data(small_dirichlet)
        trace = nonlinear_evolve(data, Nonlinearity.zero(), h=0.1, T=2.0)
        exact = linear_solve(data, trace.times)
        np.testing.assert_allclose(trace.channel("l2"), exact.channel("l2"), rtol=1e-10)
        np.testing.assert_allclose(trace.channel("ut_l2"), exact.channel("ut_l2"), rtol=1e-10, atol=1e-14)

    def test_step_count_and_times(self, small_dirichlet):
        """T/h steps are taken and times are multiples of h."""
        trace = nonlinear_evolve(_bump_data(small_dirichlet, 0.01), Nonlinearity(3.0), h=0.1, T=1.0)
        assert len(trace) == 11
        assert trace.final_time == pytest.approx(1.0)
        assert trace.step == 0.1
        assert trace.integrator == "euler"
        assert trace.metadata["underflow_modes"] == 0

    def test_record_stride(self, small_dirichlet):
        """record_stride thins records but always keeps the last step."""
        trace = nonlinear_evolve(
            _bump_data(small_dirichlet, 0.01),
            Nonlinearity(3.0),
            h=0.1,
            T=1.0,
            options=TraceOptions(record_stride=3),
        )
        np.testing.assert_allclose(trace.times, [0.0, 0.3, 0.6, 0.9, 1.0])

    def test_blowup_record(self, single_mode, caplog):
        """Crossing the cap stops the run with a blow-up record and a terminal row."""
        data = CauchyData(single_mode.function([5.0]), single_mode.function([0.0]))
        with caplog.at_level(logging.WARNING, logger="specwave"):
            trace = nonlinear_evolve(data, Nonlinearity(3.0), h=0.05, T=10.0, cap=1e3)
        assert trace.blew_up
        assert trace.blowup.linf > 1e3 or math.isinf(trace.blowup.linf)
        assert trace.final_time == pytest.approx(trace.blowup.time)
        assert trace.final_time < 10.0
        times, channels = trace.finite_view()
        assert times.size == len(trace) - 1
        assert np.all(np.isfinite(channels["l2"]))
        assert "blow-up" in caplog.text

    def test_forcing_channels(self, small_dirichlet):
        """f_l2 and f_lsigma record the norms of F(u)."""
        data = _bump_data(small_dirichlet, 0.5)
        nl = Nonlinearity(3.0)
        trace = nonlinear_evolve(data, nl, h=0.1, T=0.2, options=TraceOptions(extras=("f_l2", "f_lsigma")))
        w = small_dirichlet.weights
        expected = math.sqrt(np.sum(w * nl(data.u0.samples) ** 2))
        assert trace.channel("f_l2")[0] == pytest.approx(expected)

    def test_energy_matches_lyapunov_energy(self, small_dirichlet):
        """The energy channel at t = 0 equals lyapunov_energy of the data."""
        data = _bump_data(small_dirichlet, 0.5)
        nl = Nonlinearity(3.0, NonlinearForm.MINUS_SIGNED)
        trace = nonlinear_evolve(data, nl, h=0.05, T=5.0, options=TraceOptions(extras=("energy",)))
        assert trace.channel("energy")[0] == pytest.approx(lyapunov_energy(data.u0, data.u1, nl))
        assert trace.channel("energy")[-1] < trace.channel("energy")[0]

    def test_energy_needs_dissipative_form(self, small_dirichlet):
        """The energy channel is refused for focusing forms."""
        with pytest.raises(ParameterError):
            nonlinear_evolve(
                _bump_data(small_dirichlet, 0.1),
                Nonlinearity(3.0),
                h=0.1,
                T=1.0,
                options=TraceOptions(extras=("energy",)),
            )
        with pytest.raises(ParameterError):
            lyapunov_energy(small_dirichlet.zeros(), small_dirichlet.zeros(), Nonlinearity(3.0))

    def test_parameter_errors(self, small_dirichlet):
        """Bad steps, horizons and integrators raise ParameterError."""
        data = CauchyData.zero(small_dirichlet)
        nl = Nonlinearity(2.0)
        with pytest.raises(ParameterError):
            nonlinear_evolve(data, nl, h=0.0, T=1.0)
        with pytest.raises(ParameterError):
            nonlinear_evolve(data, nl, h=0.5, T=0.1)
        with pytest.raises(ParameterError):
            nonlinear_evolve(data, nl, h=0.1, T=1.0, integrator="rk4")


class TestIntegratorOrder:
    """Step-halving convergence against an RK4 reference on one mode."""

    @pytest.mark.parametrize(
        "integrator, low, high",
        [("euler", 1.7, 2.3), ("midpoint", 3.5, 4.5)],
    )
    def test_step_halving_ratios(self, single_mode, integrator, low, high):
        """Halving h divides the error by about 2 (euler) or 4 (midpoint)."""
        T, u0 = 2.0, 0.5
        reference = _rk4_cubic(u0, T, 1e-4)
        data = CauchyData(single_mode.function([u0]), single_mode.function([0.0]))
        nl = Nonlinearity(3.0, NonlinearForm.MINUS_SIGNED)
        errors = []
        for h in (0.1, 0.05, 0.025):
            trace = nonlinear_evolve(
                data, nl, h=h, T=T, integrator=integrator, options=TraceOptions(snapshot_stride=1)
            )
            final = trace.snapshots[-1]
            assert final.time == pytest.approx(T)
            errors.append(abs(final.u.samples[0] - reference))
        ratios = [errors[0] / errors[1], errors[1] / errors[2]]
        for ratio in ratios:
            assert low <= ratio <= high


class TestDuhamelResidual:
    """Tests for the a posteriori mild-solution check."""

    def test_linear_run_has_no_residual(self, small_dirichlet):
        """With F = 0 the residual is at round-off level."""
        data = _bump_data(small_dirichlet)
        trace = nonlinear_evolve(
            data, Nonlinearity.zero(), h=0.1, T=1.0, options=TraceOptions(snapshot_stride=1)
        )
        assert duhamel_residual(trace, Nonlinearity.zero(), [0.5, 1.0]) < 1e-10

    def test_nonlinear_residual_small(self, small_dirichlet):
        """A resolved nonlinear run satisfies the mild equation to quadrature accuracy."""
        data = _bump_data(small_dirichlet, 0.5)
        nl = Nonlinearity(3.0, NonlinearForm.MINUS_SIGNED)
        trace = nonlinear_evolve(data, nl, h=0.01, T=1.0, options=TraceOptions(snapshot_stride=1))
        assert duhamel_residual(trace, nl, [1.0]) < 1e-2

    def test_sample_time_must_be_snapshot(self, small_dirichlet):
        """A time between snapshots raises ParameterError."""
        trace = nonlinear_evolve(
            _bump_data(small_dirichlet), Nonlinearity.zero(), h=0.1, T=1.0, options=TraceOptions(snapshot_stride=2)
        )
        with pytest.raises(ParameterError):
            duhamel_residual(trace, Nonlinearity.zero(), [0.1])

    def test_needs_two_snapshots(self, small_dirichlet):
        """Traces without snapshots raise ParameterError."""
        trace = nonlinear_evolve(
            _bump_data(small_dirichlet), Nonlinearity.zero(), h=0.1, T=1.0, options=TraceOptions(snapshot_stride=0)
        )
        with pytest.raises(ParameterError):
            duhamel_residual(trace, Nonlinearity.zero(), [1.0])

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad, solve_ivp

from floquet_lindblad import superop
from floquet_lindblad.errors import NoConvergedRoot, NoValidKernelInRange
from floquet_lindblad.kernel import (
    KernelSpec,
    build_kernel_lindbladian,
    decay_function,
    decay_function_derivative,
    default_tau_grid,
    evolution_choi_floor,
    kernel_evolution,
    minimal_memory_time,
    solve_kernel_eigenvalues,
    verify_decay_function,
)
from floquet_lindblad.propagator import choi_eigenvalue_trajectory

PERIOD = 2 * np.pi / 1.5

complex_rates = st.builds(
    complex,
    st.floats(-5.0, 5.0),
    st.floats(-5.0, 5.0),
)


def decay_by_ode(lambda_k, tau_mem, times):
    """Independent oracle: the memory integral g(t) = int_0^t e^((s-t)/tau) h(s) ds
    turns the kernel equation into the local system h' = lambda_k g, g' = h - g/tau."""

    def rhs(_t, y):
        h, g = y
        return [lambda_k * g, h - g / tau_mem]

    sol = solve_ivp(
        rhs,
        (0.0, times[-1]),
        np.array([1.0 + 0j, 0.0 + 0j]),
        t_eval=times,
        rtol=1e-12,
        atol=1e-14,
    )
    return sol.y[0]


class TestDecayFunction:
    @pytest.mark.parametrize("tau", [0.01 * PERIOD, PERIOD, 10 * PERIOD])
    def test_zero_rate_is_constant(self, tau):
        for t in (0.0, 0.3, 2.7, 40.0):
            assert decay_function(0.0, tau, t) == pytest.approx(1.0, abs=1e-12)

    def test_boundary_conditions(self):
        for lam in (0.8, -2.0, 1.5 + 2.2j):
            assert decay_function(lam, 0.7, 0.0) == pytest.approx(1.0, abs=1e-14)
            assert abs(decay_function_derivative(lam, 0.7, 0.0)) == 0.0
            eps = 1e-6
            fd = (decay_function(lam, 0.7, eps) - decay_function(lam, 0.7, 0.0)) / eps
            assert abs(fd) < 1e-5  # slope vanishes at t = 0

    @given(complex_rates, st.floats(0.05, 2.0))
    @settings(max_examples=25, deadline=None)
    def test_matches_ode_oracle(self, lam, tau_factor):
        tau = tau_factor * PERIOD
        times = np.linspace(0.0, PERIOD, 9)
        oracle = decay_by_ode(lam, tau, times)
        closed = np.array([decay_function(lam, tau, t) for t in times])
        scale = np.max(np.abs(oracle)) + 1.0
        assert np.max(np.abs(closed - oracle)) < 1e-6 * scale

    def test_markovian_limit(self):
        tau = 1e-4 * PERIOD
        roots = solve_kernel_eigenvalues(0.5, tau, PERIOD)
        lam = [z for z in roots if abs(z.imag) < 1e-8 * max(1, abs(z))][0]
        for t in np.linspace(0.2 * PERIOD, PERIOD, 7):
            markovian = np.exp(lam.real * tau * t)
            h = decay_function(lam, tau, t)
            assert abs(h - markovian) / abs(markovian) < 1e-3

    def test_no_overflow_for_tiny_memory_times(self):
        val = decay_function(-3.0, 1e-6 * PERIOD, 10 * PERIOD)
        assert np.isfinite(abs(val))


class TestVerifyDecayFunction:
    def test_zero_rate_residual_vanishes(self):
        grid = np.linspace(0.0, PERIOD, 5)
        assert verify_decay_function(0.0, PERIOD, grid) < 1e-14

    @given(complex_rates)
    @settings(max_examples=15, deadline=None)
    def test_closed_form_satisfies_equation(self, lam):
        grid = np.linspace(0.0, PERIOD, 5)
        scale = max(abs(decay_function(lam, PERIOD, t)) for t in grid) + 1.0
        assert verify_decay_function(lam, PERIOD, grid) < 1e-6 * scale

    def test_sensitive_to_wrong_solution(self):
        # feeding 1.01*h into the memory integral must leave a visible residual
        lam, tau = 2.0, PERIOD
        t = PERIOD
        lhs = decay_function_derivative(lam, tau, t)

        def integrand(s):
            return (np.exp((s - t) / tau) * lam * 1.01 * decay_function(lam, tau, s)).real

        rhs, _ = quad(integrand, 0.0, t, epsabs=1e-12, epsrel=1e-12, limit=200)
        assert abs(lhs - rhs) > 1e-3


class TestSolveKernelEigenvalues:
    def test_unit_eigenvalue_has_zero_root(self):
        roots = solve_kernel_eigenvalues(1.0, 0.1 * PERIOD, PERIOD)
        assert min(abs(z) for z in roots) < 1e-10

    def test_markovian_principal_root(self):
        tau = 1e-3 * PERIOD
        roots = solve_kernel_eigenvalues(0.5, tau, PERIOD)
        lead = [z for z in roots if abs(z.imag) < 1e-8 * max(1, abs(z))][0]
        expected = np.log(0.5) / (tau * PERIOD)  # kernel integral tau*lambda_K -> log
        assert abs(lead.real - expected) / abs(expected) < 1e-3

    @given(
        st.floats(0.05, 1.0),
        st.floats(-np.pi, np.pi),
        st.floats(np.log(1e-2), np.log(10.0)),
    )
    @settings(max_examples=30, deadline=None)
    def test_residual_postcondition(self, modulus, angle, log_tau_factor):
        lam_a = modulus * np.exp(1j * angle)
        tau = np.exp(log_tau_factor) * PERIOD
        try:
            roots = solve_kernel_eigenvalues(lam_a, tau, PERIOD)
        except NoConvergedRoot:
            return
        for z in roots:
            assert abs(decay_function(z, tau, PERIOD) - lam_a) <= 1e-8

    def test_negative_eigenvalue_needs_long_memory(self):
        roots_long = solve_kernel_eigenvalues(-0.4, 2.0 * PERIOD, PERIOD)
        assert any(abs(z.imag) < 1e-8 * max(1, abs(z)) for z in roots_long)
        try:
            roots_short = solve_kernel_eigenvalues(-0.4, 0.05 * PERIOD, PERIOD)
            has_real = any(abs(z.imag) < 1e-8 * max(1, abs(z)) for z in roots_short)
        except NoConvergedRoot:
            has_real = False
        assert not has_real


def dec_of(point_fixture):
    model, p = point_fixture
    return model, superop.spectral_decompose(p), p


class TestBuildKernelLindbladian:
    def test_valid_at_floor_in_lindbladian_phase(self, lindbladian_phase_point):
        model, dec, p = dec_of(lindbladian_phase_point)
        period = model.period
        spec = build_kernel_lindbladian(dec, 1e-2 * period, period)
        assert spec is not None
        # enforced structure
        unit = dec.unit_indices()[0]
        assert spec.kernel_eigenvalues[unit] == 0.0
        for c, cb in dec.pairs:
            assert spec.kernel_eigenvalues[cb] == pytest.approx(
                spec.kernel_eigenvalues[c].conjugate()
            )
        for a in range(4):
            h_t = decay_function(spec.kernel_eigenvalues[a], spec.tau_mem, period)
            assert abs(h_t - dec.eigenvalues[a]) <= 1e-8
        ok, _ = superop.is_ccp(
            spec.generator, tol=1e-9 * max(1.0, np.linalg.norm(spec.generator))
        )
        assert ok
        assert superop.annihilates_trace(spec.generator)
        c = superop.choi(spec.generator)
        assert np.linalg.norm(c - c.conj().T) < 1e-9 * np.linalg.norm(c)

    def test_invalid_at_floor_in_non_lindbladian_phase(self, non_lindbladian_phase_point):
        model, dec, p = dec_of(non_lindbladian_phase_point)
        period = model.period
        assert build_kernel_lindbladian(dec, 1e-2 * period, period) is None
        assert build_kernel_lindbladian(dec, 0.2 * period, period) is not None

    def test_markovian_limit_reaches_floquet_generator(self, lindbladian_phase_point):
        model, dec, p = dec_of(lindbladian_phase_point)
        period = model.period
        s0 = superop.branch_generator(dec, [0] * dec.n_c, period)
        spec = build_kernel_lindbladian(dec, 1e-3 * period, period)
        assert spec is not None
        # the kernel integrates to tau*L_K, which approaches the Floquet generator
        dev = np.linalg.norm(spec.tau_mem * spec.generator - s0) / np.linalg.norm(s0)
        assert dev <= 1e-2


class TestMinimalMemoryTime:
    def test_lindbladian_phase_reports_zero(self, lindbladian_phase_point):
        model, dec, p = dec_of(lindbladian_phase_point)
        report = minimal_memory_time(dec, model.period)
        assert report.tau_min == 0.0
        assert report.spec_at_tau_min is not None
        assert report.resolution_floor == pytest.approx(1e-2 * model.period)

    def test_non_lindbladian_phase_needs_finite_memory(self, non_lindbladian_phase_point):
        model, dec, p = dec_of(non_lindbladian_phase_point)
        period = model.period
        report = minimal_memory_time(dec, period)
        assert report.tau_min >= 1e-2 * period
        # bisection contract: valid at tau_min, invalid one tolerance below
        assert report.spec_at_tau_min is not None
        below = report.tau_min - 1e-2 * period
        spec_below = build_kernel_lindbladian(dec, below, period)
        if spec_below is not None:
            assert evolution_choi_floor(spec_below, dec, period) < -1e-7

    def test_deterministic(self, non_lindbladian_phase_point):
        model, dec, p = dec_of(non_lindbladian_phase_point)
        r1 = minimal_memory_time(dec, model.period)
        r2 = minimal_memory_time(dec, model.period)
        assert r1.tau_min == r2.tau_min
        assert r1.scan == r2.scan

    def test_no_valid_kernel_in_degenerate_range(self, non_lindbladian_phase_point):
        model, dec, p = dec_of(non_lindbladian_phase_point)
        with pytest.raises(NoValidKernelInRange):
            minimal_memory_time(dec, model.period, tau_grid=np.array([1e-2 * model.period]))

    def test_default_grid_spans_decades(self):
        grid = default_tau_grid(2.0)
        assert len(grid) == 40
        assert grid[0] == pytest.approx(0.02)
        assert grid[-1] == pytest.approx(20.0)


class TestKernelEvolution:
    def test_stroboscopic_consistency(self, non_lindbladian_phase_point):
        model, dec, p = dec_of(non_lindbladian_phase_point)
        period = model.period
        report = minimal_memory_time(dec, period)
        traj = kernel_evolution(report.spec_at_tau_min, dec, period, 2 * period, 81)
        np.testing.assert_allclose(traj.maps[40], p, atol=1e-8)
        np.testing.assert_allclose(traj.maps[80], p @ p, atol=1e-8)
        np.testing.assert_allclose(traj.maps[0], np.eye(4), atol=1e-10)

    def test_cpt_trajectory_at_minimal_memory_time(self, non_lindbladian_phase_point):
        model, dec, p = dec_of(non_lindbladian_phase_point)
        period = model.period
        report = minimal_memory_time(dec, period)
        traj = kernel_evolution(report.spec_at_tau_min, dec, period, 2 * period, 161)
        eigs = choi_eigenvalue_trajectory(traj)
        assert eigs.min() >= -1e-6
        for m in traj.maps:
            assert superop.is_trace_preserving(m, tol=1e-8)

    def test_trace_preservation_everywhere(self, lindbladian_phase_point):
        model, dec, p = dec_of(lindbladian_phase_point)
        period = model.period
        spec = build_kernel_lindbladian(dec, 0.5 * period, period)
        traj = kernel_evolution(spec, dec, period, 3 * period, 61)
        for m in traj.maps:
            assert superop.is_trace_preserving(m, tol=1e-8)

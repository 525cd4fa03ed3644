import numpy as np
import pytest

from conftest import amplitude_damping_generator, amplitude_damping_map_eigenvalues
from floquet_lindblad import superop
from floquet_lindblad.model import DriveParams, build_two_level_model
from floquet_lindblad.propagator import (
    IntegratorConfig,
    choi_eigenvalue_trajectory,
    floquet_map,
    propagate_trajectory,
    propagate_window,
)

POINT_NONLINDBLADIAN = DriveParams(E=0.75, omega=1.2, phi=0.0, gamma=0.01)


@pytest.fixture(scope="module")
def undriven_model():
    return build_two_level_model(DriveParams(E=0.0, omega=1.7, phi=0.0, gamma=0.05))


def test_undriven_matches_analytic_solution(undriven_model):
    p = floquet_map(undriven_model)
    period = undriven_model.period
    expected_map = superop.matrix_exp(amplitude_damping_generator(0.05), period)
    np.testing.assert_allclose(p, expected_map, atol=1e-9)
    got = np.linalg.eigvals(p)
    for z in amplitude_damping_map_eigenvalues(0.05, period):
        assert np.min(np.abs(got - z)) < 1e-9


def test_coherent_limit_is_unitary_channel():
    m = build_two_level_model(DriveParams(E=1.3, omega=1.1, phi=0.3, gamma=0.0))
    p = floquet_map(m)
    c = superop.choi(p)
    w = np.linalg.eigvalsh(c)
    assert np.sum(np.abs(w) > 1e-8) == 1
    assert abs(w[-1] - 1.0) < 1e-8


@pytest.mark.parametrize(
    "params",
    [
        DriveParams(E=1.5, omega=1.5, phi=0.0, gamma=0.01),
        POINT_NONLINDBLADIAN,
        DriveParams(E=2.5, omega=0.7, phi=1.2, gamma=0.1),
    ],
)
def test_one_cycle_map_is_cpt(params):
    p = floquet_map(build_two_level_model(params))
    assert superop.is_trace_preserving(p, tol=1e-9)
    ok, min_eig = superop.is_completely_positive(p, tol=1e-9)
    assert ok, f"Choi eigenvalue {min_eig}"


def test_trajectory_endpoint_matches_floquet_map():
    m = build_two_level_model(POINT_NONLINDBLADIAN)
    traj = propagate_trajectory(m, m.period, 41)
    np.testing.assert_allclose(traj.maps[-1], floquet_map(m), atol=1e-9)
    np.testing.assert_array_equal(traj.maps[0], np.eye(4))


def test_undriven_semigroup_property(undriven_model):
    period = undriven_model.period
    traj = propagate_trajectory(undriven_model, 2 * period, 3)
    np.testing.assert_allclose(traj.maps[2], traj.maps[1] @ traj.maps[1], atol=1e-8)


def test_coherent_trajectory_stays_unitary():
    m = build_two_level_model(DriveParams(E=1.0, omega=1.0, phi=0.0, gamma=0.0))
    traj = propagate_trajectory(m, m.period, 9)
    for p in traj.maps:
        c = superop.choi(p)
        w = np.linalg.eigvalsh(c)
        assert np.sum(np.abs(w) > 1e-8) == 1


def test_composition_of_half_periods():
    m = build_two_level_model(POINT_NONLINDBLADIAN)
    half = m.period / 2
    first = propagate_window(m, 0.0, half)
    second = propagate_window(m, half, m.period)
    np.testing.assert_allclose(second @ first, floquet_map(m), atol=1e-9)


def test_phase_offset_equivalence():
    phi = 0.9
    shifted = build_two_level_model(DriveParams(E=1.2, omega=1.4, phi=phi, gamma=0.02))
    base = build_two_level_model(DriveParams(E=1.2, omega=1.4, phi=0.0, gamma=0.02))
    t0 = phi / 1.4
    np.testing.assert_allclose(
        floquet_map(shifted), propagate_window(base, t0, t0 + base.period), atol=1e-9
    )


def test_fixed_step_fourth_order_convergence():
    m = build_two_level_model(DriveParams(E=1.5, omega=1.2, phi=0.0, gamma=0.05))
    maps = {
        n: propagate_window(m, 0.0, m.period, IntegratorConfig(method="rk4", min_substeps_per_period=n))
        for n in (200, 400, 800)
    }
    diff_coarse = np.linalg.norm(maps[400] - maps[200])
    diff_fine = np.linalg.norm(maps[800] - maps[400])
    assert diff_fine < diff_coarse / 10  # 4th order would give ~1/16
    np.testing.assert_allclose(maps[800], floquet_map(m), atol=1e-6)


def test_choi_trajectory_identity_start_and_cpt():
    m = build_two_level_model(POINT_NONLINDBLADIAN)
    traj = propagate_trajectory(m, 2 * m.period, 81)
    eigs = choi_eigenvalue_trajectory(traj)
    np.testing.assert_allclose(eigs[0], [0.0, 0.0, 0.0, 1.0], atol=1e-12)
    assert np.min(eigs) > -1e-8  # the full evolution is CP-T at all times
    np.testing.assert_allclose(eigs.sum(axis=1), 1.0, atol=1e-9)


def test_choi_trajectory_columns_are_continuous():
    m = build_two_level_model(DriveParams(E=1.5, omega=1.5, phi=0.0, gamma=0.01))
    traj = propagate_trajectory(m, m.period, 161)
    eigs = choi_eigenvalue_trajectory(traj)
    jumps = np.max(np.abs(np.diff(eigs, axis=0)))
    assert jumps < 0.1

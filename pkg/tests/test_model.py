import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import SIGMA_Z, amplitude_damping_generator
from floquet_lindblad import superop
from floquet_lindblad.errors import InvalidParams
from floquet_lindblad.model import (
    ConstantProfile,
    CosineProfile,
    DriveParams,
    TimePeriodicLindbladian,
    build_two_level_model,
    generator_at,
)

params_strategy = st.builds(
    DriveParams,
    E=st.floats(0.0, 3.0),
    omega=st.floats(0.3, 4.0),
    phi=st.floats(-np.pi, np.pi),
    gamma=st.floats(0.0, 0.5),
)


def test_period_arithmetic():
    p = DriveParams(E=1.5, omega=1.5, phi=0.0, gamma=0.01)
    m = build_two_level_model(p)
    assert m.period == pytest.approx(2 * np.pi / 1.5)


def test_invalid_params_rejected():
    with pytest.raises(InvalidParams):
        DriveParams(E=1.0, omega=0.0)
    with pytest.raises(InvalidParams):
        DriveParams(E=-1.0, omega=1.0)
    with pytest.raises(InvalidParams):
        DriveParams(E=1.0, omega=1.0, gamma=-0.1)


def test_coherent_undriven_limit():
    m = build_two_level_model(DriveParams(E=0.0, omega=2.0))
    expected = superop.lindbladian_matrix(SIGMA_Z / 2, [])
    for t in (0.0, 0.4, 1.7):
        np.testing.assert_allclose(generator_at(m, t), expected, atol=1e-14)


def test_undriven_generator_spectrum():
    m = build_two_level_model(DriveParams(E=0.0, omega=2.0, gamma=0.01))
    lam = np.linalg.eigvals(generator_at(m, 0.0))
    expected = np.array([0.0, -0.01, -0.005 + 1j, -0.005 - 1j])
    for z in expected:
        assert np.min(np.abs(lam - z)) < 1e-12


def test_cosine_vanishes_at_quarter_phase():
    m = build_two_level_model(DriveParams(E=2.0, omega=1.3, phi=np.pi / 2, gamma=0.05))
    expected = amplitude_damping_generator(0.05)
    np.testing.assert_allclose(generator_at(m, 0.0), expected, atol=1e-14)


@given(params_strategy, st.floats(0.0, 20.0))
@settings(max_examples=50)
def test_periodicity(params, t):
    m = build_two_level_model(params)
    np.testing.assert_allclose(
        generator_at(m, t), generator_at(m, t + m.period), atol=1e-12
    )


@given(params_strategy, st.floats(0.0, 10.0))
@settings(max_examples=50, deadline=None)
def test_generator_is_lindblad_form(params, t):
    gen = generator_at(build_two_level_model(params), t)
    assert superop.annihilates_trace(gen, tol=1e-12)
    ok, _ = superop.is_ccp(gen)
    assert ok


@given(params_strategy, st.floats(0.0, 10.0))
@settings(max_examples=50)
def test_phase_shift_identity(params, t):
    shifted = build_two_level_model(params)
    base = build_two_level_model(
        DriveParams(E=params.E, omega=params.omega, phi=0.0, gamma=params.gamma)
    )
    np.testing.assert_allclose(
        generator_at(shifted, t),
        generator_at(base, t + params.phi / params.omega),
        atol=1e-12,
    )


def test_coherent_part_preserves_hermiticity():
    m = build_two_level_model(DriveParams(E=1.0, omega=1.0, gamma=0.0))
    c = superop.choi(generator_at(m, 0.3))
    np.testing.assert_allclose(c, c.conj().T, atol=1e-14)


def test_jump_tracelessness_enforced():
    with pytest.raises(InvalidParams):
        TimePeriodicLindbladian(
            hdim=2,
            hamiltonian_terms=((SIGMA_Z / 2, ConstantProfile()),),
            jumps=(np.eye(2, dtype=complex),),
            period=1.0,
        )


def test_generic_type_admits_custom_profiles():
    op = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    m = TimePeriodicLindbladian(
        hdim=2,
        hamiltonian_terms=(
            (SIGMA_Z / 2, ConstantProfile(0.7)),
            (op, CosineProfile(amplitude=0.3, omega=2.0, phi=0.1)),
        ),
        jumps=(),
        period=np.pi,
    )
    g0 = generator_at(m, 0.0)
    expected_h = 0.7 * SIGMA_Z / 2 + 0.3 * np.cos(0.1) * op
    np.testing.assert_allclose(g0, superop.lindbladian_matrix(expected_h, []), atol=1e-14)

"""Shared fixtures and oracle helpers for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from floquet_lindblad import superop

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
SIGMA_MINUS = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)


def rng_for(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def random_complex_matrix(rng: np.random.Generator, n: int, scale: float = 1.0) -> np.ndarray:
    return scale * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))


def random_hermitian(rng: np.random.Generator, n: int, scale: float = 1.0) -> np.ndarray:
    a = random_complex_matrix(rng, n, scale)
    return (a + a.conj().T) / 2


def random_lindbladian(rng: np.random.Generator, n: int = 2, n_jumps: int = 2,
                       jump_scale: float = 0.5) -> np.ndarray:
    """Random valid Lindbladian generator matrix."""
    h = random_hermitian(rng, n)
    jumps = [random_complex_matrix(rng, n, jump_scale) for _ in range(n_jumps)]
    return superop.lindbladian_matrix(h, jumps)


def amplitude_damping_generator(gamma: float) -> np.ndarray:
    """Undriven two-level generator: H = sigma_z / 2, jump sqrt(gamma) sigma_-."""
    return superop.lindbladian_matrix(SIGMA_Z / 2, [np.sqrt(gamma) * SIGMA_MINUS])


def amplitude_damping_map_eigenvalues(gamma: float, period: float) -> np.ndarray:
    """Analytic eigenvalues of the undriven one-cycle map, from the Bloch
    equations: populations relax at rates {0, gamma}, coherences at
    gamma/2 -+ i (level splitting 1)."""
    rates = np.array([0.0, -gamma, -gamma / 2 + 1j, -gamma / 2 - 1j])
    return np.exp(period * rates)


def choi_by_definition(s: np.ndarray) -> np.ndarray:
    """Independent Choi oracle: (1/N) sum_ij S(E_ij) kron E_ij."""
    n = int(round(np.sqrt(s.shape[0])))
    c = np.zeros((n * n, n * n), dtype=complex)
    for i in range(n):
        for j in range(n):
            unit = np.zeros((n, n), dtype=complex)
            unit[i, j] = 1.0
            c += np.kron(superop.apply_superop(s, unit), unit)
    return c / n


@pytest.fixture(scope="session")
def rng() -> np.random.Generator:
    return np.random.default_rng(20240811)


def _point_map(e: float, omega: float):
    from floquet_lindblad.model import DriveParams, build_two_level_model
    from floquet_lindblad.propagator import floquet_map

    model = build_two_level_model(DriveParams(E=e, omega=omega, phi=0.0, gamma=0.01))
    return model, floquet_map(model)


@pytest.fixture(scope="session")
def lindbladian_phase_point():
    """(omega=1.5, E=1.5, gamma=0.01, phi=0): a time-independent generator exists."""
    return _point_map(1.5, 1.5)


@pytest.fixture(scope="session")
def non_lindbladian_phase_point():
    """(omega=1.2, E=0.75, gamma=0.01, phi=0): no valid logarithm branch."""
    return _point_map(0.75, 1.2)

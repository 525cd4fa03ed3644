"""Time-periodic Lindbladian systems and the driven dissipative two-level model.

The two-level model: H(t) = sigma_z/2 + E cos(omega t + phi) sigma_x with a
single jump operator sqrt(gamma) sigma_-. Energies are measured in units of
the level splitting and times in its inverse (hbar = 1), leaving the four
dimensionless parameters (E, omega, phi, gamma).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .errors import InvalidParams
from .superop import is_hermitian, lindbladian_matrix

__all__ = [
    "SIGMA_X",
    "SIGMA_Y",
    "SIGMA_Z",
    "SIGMA_MINUS",
    "DriveParams",
    "ConstantProfile",
    "CosineProfile",
    "TimePeriodicLindbladian",
    "build_two_level_model",
    "generator_at",
]

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
SIGMA_MINUS = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)


@dataclass(frozen=True)
class DriveParams:
    """Dimensionless parameters of the driven two-level model."""

    E: float
    omega: float
    phi: float = 0.0
    gamma: float = 0.0
    delta: float = 1.0  # level splitting, fixed to 1 by the choice of units

    def __post_init__(self):
        if self.omega <= 0:
            raise InvalidParams(f"omega must be positive, got {self.omega}")
        if self.E < 0:
            raise InvalidParams(f"driving strength must be >= 0, got {self.E}")
        if self.gamma < 0:
            raise InvalidParams(f"dissipation strength must be >= 0, got {self.gamma}")

    @property
    def period(self) -> float:
        return 2 * math.pi / self.omega


@dataclass(frozen=True)
class ConstantProfile:
    value: float = 1.0

    def __call__(self, t: float) -> float:
        return self.value


@dataclass(frozen=True)
class CosineProfile:
    amplitude: float
    omega: float
    phi: float = 0.0

    def __call__(self, t: float) -> float:
        return self.amplitude * math.cos(self.omega * t + self.phi)


Profile = Union[ConstantProfile, CosineProfile]


@dataclass(frozen=True)
class TimePeriodicLindbladian:
    """H(t) = sum of (operator, profile) terms plus time-independent jumps.

    Each Hamiltonian term operator must be Hermitian and each jump operator
    traceless (both within 1e-10); the generator is periodic with ``period``.
    """

    hdim: int
    hamiltonian_terms: tuple[tuple[np.ndarray, Profile], ...]
    jumps: tuple[np.ndarray, ...]
    period: float
    _static_part: np.ndarray = field(init=False, repr=False, compare=False)
    _drive_parts: tuple[tuple[np.ndarray, Profile], ...] = field(
        init=False, repr=False, compare=False
    )

    def __post_init__(self):
        if self.period <= 0:
            raise InvalidParams(f"period must be positive, got {self.period}")
        static_h = np.zeros((self.hdim, self.hdim), dtype=complex)
        drive: list[tuple[np.ndarray, Profile]] = []
        for op, profile in self.hamiltonian_terms:
            op = np.asarray(op, dtype=complex)
            if op.shape != (self.hdim, self.hdim):
                raise InvalidParams(f"Hamiltonian term shape {op.shape} != dim {self.hdim}")
            if not is_hermitian(op):
                raise InvalidParams("Hamiltonian term fails the 1e-10 Hermiticity tolerance")
            if isinstance(profile, ConstantProfile):
                static_h += profile.value * op
            else:
                commutator = -1j * (
                    np.kron(np.eye(self.hdim), op) - np.kron(op.T, np.eye(self.hdim))
                )
                drive.append((commutator, profile))
        for a in self.jumps:
            if abs(np.trace(a)) > 1e-10 * max(1.0, float(np.max(np.abs(a)))):
                raise InvalidParams("jump operators must be traceless within 1e-10")
        static = lindbladian_matrix(static_h, list(self.jumps))
        object.__setattr__(self, "_static_part", static)
        object.__setattr__(self, "_drive_parts", tuple(drive))


def generator_at(model: TimePeriodicLindbladian, t: float) -> np.ndarray:
    """Instantaneous generator L(t); periodic with the model's period."""
    gen = model._static_part.copy()
    for commutator, profile in model._drive_parts:
        gen += profile(t) * commutator
    return gen


def build_two_level_model(params: DriveParams) -> TimePeriodicLindbladian:
    """The driven dissipative two-level model for the given parameters."""
    terms = (
        (params.delta / 2 * SIGMA_Z, ConstantProfile()),
        (SIGMA_X, CosineProfile(params.E, params.omega, params.phi)),
    )
    jumps = (math.sqrt(params.gamma) * SIGMA_MINUS,)
    return TimePeriodicLindbladian(
        hdim=2, hamiltonian_terms=terms, jumps=jumps, period=params.period
    )

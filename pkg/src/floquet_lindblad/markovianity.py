"""Existence test for a time-independent Lindbladian generating the one-cycle
map, distance-from-Markovianity measures, and extraction of the effective
Hamiltonian and jump operators.

A trace-preserving map P admits a time-independent Lindbladian generator iff
some logarithm branch S_x (i) preserves Hermiticity and (ii) is conditionally
completely positive. Condition (i) is a property of the spectrum alone; for
(ii) the Choi matrices of all branches, projected off the maximally entangled
state, form a pencil V_0 + sum_c x_c V_c whose positive semidefiniteness at
integer x decides existence.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    ExtractionResidual,
    NotHermiticityPreserving,
    NotLindbladian,
    NotPositive,
    UnpairedNegativeEigenvalue,
)
from .superop import (
    SpectralDecomposition,
    annihilates_trace,
    branch_generator,
    choi,
    is_ccp,
    is_trace_preserving,
    kraus_vectors_from_choi,
    lindbladian_matrix,
    maximally_entangled_vector,
    omega_complement_basis,
    spectral_decompose,
)

__all__ = [
    "BranchIndex",
    "SpectrahedronProblem",
    "MarkovReport",
    "log_preserves_hermiticity",
    "build_spectrahedron",
    "branch_indices",
    "mu_min",
    "find_floquet_lindbladian",
    "d_rhp",
    "extract_hamiltonian_jumps",
]

BranchIndex = tuple[int, ...]

PSD_TOL = 1e-9
D_RHP_FLOOR = 1e-7


def log_preserves_hermiticity(dec: SpectralDecomposition) -> bool:
    """True iff every negative real eigenvalue was absorbed into a degenerate
    +/- pi pair, so that some logarithm branch can preserve Hermiticity."""
    return not dec.unpaired_negative


@dataclass(frozen=True)
class SpectrahedronProblem:
    """Pencil V(x) = v0 + sum_c x_c vcs[c] on the complement of |Omega>.

    v0 is the projected Choi matrix of the principal branch generator and
    vcs[c] that of (2 pi i / T)(M_c - M_cbar); V(x) then equals the projected
    Choi matrix of the branch-x generator for every integer x.
    """

    v0: np.ndarray
    vcs: tuple[np.ndarray, ...]

    @property
    def n_c(self) -> int:
        return len(self.vcs)

    def value(self, x: Sequence[int | float]) -> np.ndarray:
        v = self.v0.copy()
        for xc, vc in zip(x, self.vcs):
            v += xc * vc
        return v

    def min_eigenvalue(self, x: Sequence[int | float]) -> float:
        return float(np.linalg.eigvalsh(self.value(x))[0])


def _project(matrix: np.ndarray, basis: np.ndarray) -> np.ndarray:
    block = basis.conj().T @ matrix @ basis
    return (block + block.conj().T) / 2


def build_spectrahedron(dec: SpectralDecomposition, period: float) -> SpectrahedronProblem:
    """Hermitian pencil matrices from the spectral projectors of the map."""
    if dec.unpaired_negative:
        raise UnpairedNegativeEigenvalue(
            "spectrum has an unpaired negative eigenvalue; no branch preserves Hermiticity"
        )
    basis = omega_complement_basis(dec.hdim)
    s0 = branch_generator(dec, [0] * dec.n_c, period)
    v0 = _project(choi(s0), basis)
    vcs = []
    for c, cb in dec.pairs:
        shift = (2j * math.pi / period) * (dec.projectors[c] - dec.projectors[cb])
        vcs.append(_project(choi(shift), basis))
    return SpectrahedronProblem(v0=v0, vcs=tuple(vcs))


def branch_indices(n_c: int, x_max: int):
    """Integer branch labels |x_c| <= x_max ordered by max-norm, then
    lexicographically (the tie-break order for branch selection)."""
    if n_c == 0:
        yield ()
        return
    box = sorted(range(-x_max, x_max + 1), key=lambda v: (abs(v), v))
    for x in sorted(itertools.product(box, repeat=n_c), key=lambda x: (max(map(abs, x)), x)):
        yield x


def _mu_of_min_eig(min_eig: float, hdim: int, psd_tol: float) -> float:
    """Depolarizing strength needed to lift the projected Choi block to PSD.

    The projected Choi matrix of the depolarizing generator is 1/N^2 times
    the identity, so mu = N^2 max(0, -lambda_min), snapped to zero inside
    the feasibility tolerance.
    """
    if min_eig >= -psd_tol:
        return 0.0
    return -(hdim**2) * min_eig


def mu_min(
    dec: SpectralDecomposition,
    period: float,
    x_max: int = 20,
    psd_tol: float = PSD_TOL,
) -> tuple[float, BranchIndex]:
    """Minimal depolarizing noise strength over all branches |x_c| <= x_max,
    and the branch attaining it. Zero iff a Floquet Lindbladian exists
    within the same bound."""
    problem = build_spectrahedron(dec, period)
    best_mu, best_x = math.inf, None
    for x in branch_indices(problem.n_c, x_max):
        mu = _mu_of_min_eig(problem.min_eigenvalue(x), dec.hdim, psd_tol)
        if mu < best_mu:
            best_mu, best_x = mu, x
    return best_mu, best_x


def _neville_at_zero(xs: Sequence[float], ys: Sequence[float]) -> float:
    vals = list(ys)
    n = len(vals)
    for j in range(1, n):
        for i in range(n - j):
            vals[i] = (xs[i + j] * vals[i] - xs[i] * vals[i + 1]) / (xs[i + j] - xs[i])
    return vals[0]


def d_rhp(s: np.ndarray, eps_ladder: Sequence[float] = (1e-3, 1e-4, 1e-5)) -> float:
    """Distance from Markovianity as the first-order growth rate of the
    trace norm of the Choi matrix of 1 + eps*S, extrapolated to eps -> 0.

    Values below 1e-7 are reported as exactly zero (below that scale the
    limit is numerically unreliable).
    """
    c = choi(s)
    if np.linalg.norm(c - c.conj().T) > 1e-9 * max(np.linalg.norm(c), 1e-300):
        raise NotHermiticityPreserving("d_rhp requires a Hermiticity-preserving generator")
    m = s.shape[0]
    c_id = choi(np.eye(m))
    values = []
    for eps in eps_ladder:
        w = np.linalg.eigvalsh(c_id + eps * ((c + c.conj().T) / 2))
        values.append((np.sum(np.abs(w)) - 1.0) / eps)
    result = _neville_at_zero(list(eps_ladder), values)
    return 0.0 if result < D_RHP_FLOOR else float(result)


@dataclass(frozen=True)
class MarkovReport:
    """Outcome of the Floquet-Lindbladian existence test for one map."""

    hermiticity_ok: bool
    exists: bool
    best_branch: BranchIndex | None
    mu_min: float
    d_rhp: float
    floquet_lindbladian: np.ndarray | None
    h_f: np.ndarray | None
    jumps_f: tuple[np.ndarray, ...] | None
    n_c: int
    negative_pair: bool
    x_max: int
    bound_hit: bool


def find_floquet_lindbladian(
    p: np.ndarray,
    period: float,
    x_max: int = 20,
    psd_tol: float = PSD_TOL,
    pair_tol: float = 1e-8,
) -> MarkovReport:
    """Search the logarithm branches of a one-cycle map for a valid
    time-independent Lindbladian generator.

    All integer branches with |x_c| <= x_max are scanned; ties among feasible
    branches are broken by smallest max-norm, then lexicographic order. When
    no branch is feasible the report carries the minimal depolarizing noise
    mu_min, the trace-norm measure d_rhp of the best branch, and a flag
    noting whether the scan argmin sat on the search boundary.
    """
    if not is_trace_preserving(p, tol=1e-6):
        raise ValueError("map is not trace preserving; not a one-cycle Lindblad map")
    try:
        dec = spectral_decompose(p, pair_tol=pair_tol)
    except UnpairedNegativeEigenvalue:
        return MarkovReport(
            hermiticity_ok=False, exists=False, best_branch=None,
            mu_min=math.inf, d_rhp=math.inf, floquet_lindbladian=None,
            h_f=None, jumps_f=None, n_c=0, negative_pair=False,
            x_max=x_max, bound_hit=False,
        )
    # a degenerate negative real pair (logarithm angles +/- pi), not just any
    # pair living in the left half plane
    negative_pair = any(
        dec.eigenvalues[c].imag == 0.0 and dec.eigenvalues[c].real < 0 for c, _ in dec.pairs
    )
    if not log_preserves_hermiticity(dec):
        return MarkovReport(
            hermiticity_ok=False, exists=False, best_branch=None,
            mu_min=math.inf, d_rhp=math.inf, floquet_lindbladian=None,
            h_f=None, jumps_f=None, n_c=dec.n_c, negative_pair=negative_pair,
            x_max=x_max, bound_hit=False,
        )

    problem = build_spectrahedron(dec, period)
    feasible_x = None
    best_mu, best_x = math.inf, None
    for x in branch_indices(dec.n_c, x_max):
        min_eig = problem.min_eigenvalue(x)
        if feasible_x is None and min_eig >= -psd_tol:
            feasible_x = x
        mu = _mu_of_min_eig(min_eig, dec.hdim, psd_tol)
        if mu < best_mu:
            best_mu, best_x = mu, x

    if feasible_x is not None:
        generator = branch_generator(dec, feasible_x, period)
        h_f, jumps = extract_hamiltonian_jumps(generator)
        return MarkovReport(
            hermiticity_ok=True, exists=True, best_branch=feasible_x,
            mu_min=0.0, d_rhp=d_rhp(generator), floquet_lindbladian=generator,
            h_f=h_f, jumps_f=tuple(jumps), n_c=dec.n_c, negative_pair=negative_pair,
            x_max=x_max, bound_hit=False,
        )

    bound_hit = dec.n_c > 0 and any(abs(xc) >= x_max for xc in best_x)
    return MarkovReport(
        hermiticity_ok=True, exists=False, best_branch=best_x,
        mu_min=best_mu, d_rhp=d_rhp(branch_generator(dec, best_x, period)),
        floquet_lindbladian=None, h_f=None, jumps_f=None,
        n_c=dec.n_c, negative_pair=negative_pair, x_max=x_max, bound_hit=bound_hit,
    )


def extract_hamiltonian_jumps(
    generator: np.ndarray, tol: float = 1e-9
) -> tuple[np.ndarray, list[np.ndarray]]:
    """Effective Hamiltonian and jump operators of a valid Lindbladian.

    In any orthonormal basis whose first vector is |Omega>, the Choi matrix
    of a Lindbladian splits into a PSD block vanishing on the first row and
    column (the jump part, in the traceless-jump gauge) plus a rank-two
    border term fixed by kappa = i H + (sum_i A_i^dag A_i)/2. The returned
    Hamiltonian is traceless; reassembling the pieces reproduces the
    generator within 1e-8.
    """
    generator = np.asarray(generator, dtype=complex)
    n = math.isqrt(generator.shape[0])
    if not annihilates_trace(generator, tol=1e-7):
        raise NotLindbladian("generator does not annihilate the trace")
    try:
        ok, min_eig = is_ccp(generator, tol=tol)
    except NotHermiticityPreserving as exc:
        raise NotLindbladian(str(exc)) from exc
    if not ok:
        raise NotLindbladian(
            f"generator is not conditionally completely positive (min eig {min_eig:.3e})"
        )

    omega = maximally_entangled_vector(n).astype(complex)
    basis = np.hstack([omega[:, None], omega_complement_basis(n)])
    c_b = basis.conj().T @ choi(generator) @ basis

    # border term -> kappa; the Omega component's imaginary part is the
    # energy-shift gauge, fixed to zero so the Hamiltonian comes out traceless
    v = -0.5 * c_b[0, 0].real * omega - omega_complement_basis(n) @ c_b[1:, 0]
    kappa = math.sqrt(n) * v.reshape(n, n)
    h_f = (kappa - kappa.conj().T) / 2j
    h_f -= np.trace(h_f) / n * np.eye(n)

    phi_b = c_b.copy()
    phi_b[0, :] = 0.0
    phi_b[:, 0] = 0.0
    phi = basis @ phi_b @ basis.conj().T
    try:
        jumps = kraus_vectors_from_choi(phi, tol=max(tol, 1e-9))
    except NotPositive as exc:
        raise NotLindbladian(str(exc)) from exc

    rebuilt = lindbladian_matrix(h_f, jumps)
    residual = np.linalg.norm(rebuilt - generator) / max(np.linalg.norm(generator), 1e-300)
    if residual > 1e-6:
        raise ExtractionResidual(f"reassembly residual {residual:.3e} exceeds 1e-6")
    return h_f, jumps

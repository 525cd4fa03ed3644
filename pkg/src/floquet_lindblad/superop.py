"""Dense complex linear algebra for operators and superoperators.

Conventions used throughout the package:

* Operators on the N-dimensional Hilbert space are plain complex ``(N, N)``
  arrays.
* Superoperators are ``(N**2, N**2)`` complex arrays acting on
  column-stacked operators: ``vectorize(X)[j*N + i] = X[i, j]``, so that
  ``vec(A X B) = (B.T kron A) vec(X)``.
* Choi matrices live on the doubled space with plain Kronecker indexing
  (basis vector ``|a> kron |b>`` at index ``a*N + b``) and are built from the
  normalized maximally entangled state ``|Omega> = N**-0.5 sum_i |ii>``, so a
  completely positive trace-preserving map has a unit-trace Choi matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np
import scipy.linalg

from .errors import (
    DefectiveMap,
    DimensionMismatch,
    NonHermitianHamiltonian,
    NotHermiticityPreserving,
    NotPositive,
    UnpairedNegativeEigenvalue,
    ZeroEigenvalue,
)

__all__ = [
    "vectorize",
    "devectorize",
    "apply_superop",
    "adjoint_vector",
    "hermiticity_conjugate",
    "is_hermitian",
    "lindbladian_matrix",
    "maximally_entangled_vector",
    "omega_complement_basis",
    "choi",
    "depolarizing_generator",
    "kraus_vectors_from_choi",
    "matrix_exp",
    "is_trace_preserving",
    "is_completely_positive",
    "is_ccp",
    "annihilates_trace",
    "PositivityResult",
    "SpectralDecomposition",
    "spectral_decompose",
    "principal_log_eigenvalues",
    "branch_generator",
]

ZERO_EIGENVALUE_TOL = 1e-12


def vectorize(op: np.ndarray) -> np.ndarray:
    """Column-stack an operator: entry (i, j) lands at index j*N + i."""
    return np.asarray(op, dtype=complex).ravel(order="F")


def devectorize(vec: np.ndarray) -> np.ndarray:
    """Inverse of :func:`vectorize`."""
    vec = np.asarray(vec, dtype=complex)
    n = math.isqrt(vec.size)
    if n * n != vec.size:
        raise DimensionMismatch(f"vector of length {vec.size} is not a stacked square matrix")
    return vec.reshape((n, n), order="F")


def apply_superop(s: np.ndarray, op: np.ndarray) -> np.ndarray:
    """Apply a superoperator matrix to an operator."""
    return devectorize(s @ vectorize(op))


def adjoint_vector(vec: np.ndarray) -> np.ndarray:
    """Image of a column-stacked operator under X -> X^dagger (antilinear)."""
    return vectorize(devectorize(vec).conj().T)


def hermiticity_conjugate(s: np.ndarray) -> np.ndarray:
    """Conjugation S -> dagger o S o dagger; fixed points preserve Hermiticity."""
    s = np.asarray(s, dtype=complex)
    n = math.isqrt(s.shape[0])
    s4 = s.reshape(n, n, n, n)
    return s4.transpose(1, 0, 3, 2).conj().reshape(s.shape)


def is_hermitian(a: np.ndarray, tol: float = 1e-10) -> bool:
    a = np.asarray(a)
    return bool(np.max(np.abs(a - a.conj().T)) <= tol * max(1.0, np.max(np.abs(a))))


def lindbladian_matrix(hamiltonian: np.ndarray, jumps: Sequence[np.ndarray]) -> np.ndarray:
    """Superoperator matrix of rho -> -i[H, rho] + sum_i (A_i rho A_i^dag
    - {A_i^dag A_i, rho}/2) in the column-stacking convention."""
    h = np.asarray(hamiltonian, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise DimensionMismatch(f"Hamiltonian must be square, got shape {h.shape}")
    if not is_hermitian(h):
        raise NonHermitianHamiltonian("Hamiltonian fails the 1e-10 Hermiticity tolerance")
    n = h.shape[0]
    eye = np.eye(n)
    gen = -1j * (np.kron(eye, h) - np.kron(h.T, eye))
    for a in jumps:
        a = np.asarray(a, dtype=complex)
        if a.shape != (n, n):
            raise DimensionMismatch(f"jump operator shape {a.shape} does not match dim {n}")
        ada = a.conj().T @ a
        gen += np.kron(a.conj(), a)
        gen -= 0.5 * (np.kron(eye, ada) + np.kron(ada.T, eye))
    return gen


def maximally_entangled_vector(n: int) -> np.ndarray:
    """Normalized |Omega> = N**-0.5 sum_i |ii> in Kronecker indexing."""
    omega = np.zeros(n * n)
    omega[:: n + 1] = 1.0 / math.sqrt(n)
    return omega


@lru_cache(maxsize=None)
def omega_complement_basis(n: int) -> np.ndarray:
    """Orthonormal basis (columns) of the orthogonal complement of |Omega>.

    Built from the Householder reflector mapping e_0 to |Omega>, so the
    result is deterministic and real.
    """
    omega = maximally_entangled_vector(n)
    u = np.zeros(n * n)
    u[0] = 1.0
    u -= omega
    house = np.eye(n * n) - 2.0 * np.outer(u, u) / (u @ u)
    basis = house[:, 1:].astype(complex)
    basis.flags.writeable = False
    return basis


def choi(s: np.ndarray) -> np.ndarray:
    """Choi matrix (S kron id)|Omega><Omega| of a superoperator, normalized |Omega>."""
    s = np.asarray(s, dtype=complex)
    n = math.isqrt(s.shape[0])
    if n * n != s.shape[0] or s.shape[0] != s.shape[1]:
        raise DimensionMismatch(f"superoperator shape {s.shape} is not (N^2, N^2)")
    s4 = s.reshape(n, n, n, n)
    return s4.transpose(1, 3, 0, 2).reshape(n * n, n * n) / n


def depolarizing_generator(n: int) -> np.ndarray:
    """Generator of the depolarizing semigroup: rho -> tr(rho) 1/N - rho."""
    w = vectorize(np.eye(n))
    return np.outer(w, w.conj()) / n - np.eye(n * n)


def kraus_vectors_from_choi(c: np.ndarray, tol: float = 1e-9) -> list[np.ndarray]:
    """Kraus operators of the CP map with Choi matrix ``c``.

    Eigenvalues in [-tol, tol] are treated as numerically zero; anything
    below -tol raises :class:`NotPositive`. The number of operators equals
    the numerical rank of ``c``.
    """
    c = np.asarray(c, dtype=complex)
    n = math.isqrt(c.shape[0])
    if np.max(np.abs(c - c.conj().T)) > max(tol, tol * np.max(np.abs(c))):
        raise NotHermiticityPreserving("Choi matrix is not Hermitian")
    w, v = np.linalg.eigh((c + c.conj().T) / 2)
    if w[0] < -tol:
        raise NotPositive(f"Choi matrix has eigenvalue {w[0]:.3e} < -{tol:.1e}")
    ops = []
    for k in range(w.size - 1, -1, -1):
        if w[k] <= tol:
            break
        ops.append(math.sqrt(w[k] * n) * v[:, k].reshape(n, n))
    return ops


def matrix_exp(s: np.ndarray, t: float = 1.0) -> np.ndarray:
    """exp(t*S) by scaling and squaring."""
    return scipy.linalg.expm(t * np.asarray(s, dtype=complex))


def is_trace_preserving(p: np.ndarray, tol: float = 1e-9) -> bool:
    """True iff the dual fixed point vec(1)^dag P = vec(1)^dag holds within tol."""
    p = np.asarray(p, dtype=complex)
    n = math.isqrt(p.shape[0])
    w = vectorize(np.eye(n))
    return bool(np.max(np.abs(w.conj() @ p - w.conj())) <= tol)


def annihilates_trace(s: np.ndarray, tol: float = 1e-8) -> bool:
    """True iff vec(1)^dag S = 0 within tol (generators of trace-preserving maps)."""
    s = np.asarray(s, dtype=complex)
    n = math.isqrt(s.shape[0])
    w = vectorize(np.eye(n))
    return bool(np.max(np.abs(w.conj() @ s)) <= tol * max(1.0, np.max(np.abs(s))))


class PositivityResult(NamedTuple):
    ok: bool
    min_eigenvalue: float


def is_completely_positive(p: np.ndarray, tol: float = 1e-9) -> PositivityResult:
    """Complete positivity via the Choi eigenvalues; also reports the smallest one."""
    c = choi(p)
    w = np.linalg.eigvalsh((c + c.conj().T) / 2)
    return PositivityResult(bool(w[0] >= -tol), float(w[0]))


def is_ccp(s: np.ndarray, tol: float = 1e-9) -> PositivityResult:
    """Conditional complete positivity: Pi choi(S) Pi >= 0 on the complement of |Omega>.

    Returns the smallest eigenvalue of the projected block. Raises
    :class:`NotHermiticityPreserving` when choi(S) is not Hermitian within
    tol * ||choi(S)||.
    """
    c = choi(s)
    herm_defect = np.linalg.norm(c - c.conj().T)
    if herm_defect > tol * np.linalg.norm(c):
        raise NotHermiticityPreserving(
            f"choi(S) Hermiticity defect {herm_defect:.3e} exceeds tolerance"
        )
    n = math.isqrt(s.shape[0])
    basis = omega_complement_basis(n)
    block = basis.conj().T @ c @ basis
    w = np.linalg.eigvalsh((block + block.conj().T) / 2)
    return PositivityResult(bool(w[0] >= -tol), float(w[0]))


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues and biorthonormal spectral projectors of a diagonalizable map.

    ``tags[a]`` is one of ``"unit"`` (eigenvalue 1), ``"real"`` or ``"pair"``;
    conjugate pairs are listed in ``pairs`` as ``(c, cbar)`` with the
    positive-angle member first. Degenerate negative real eigenvalues are
    absorbed into a pair at angles +/- pi; negative reals that could not be
    paired are recorded in ``unpaired_negative``.
    """

    hdim: int
    eigenvalues: np.ndarray
    projectors: np.ndarray
    tags: tuple[str, ...]
    pairs: tuple[tuple[int, int], ...]
    unpaired_negative: tuple[int, ...] = ()
    residual: float = field(default=0.0, compare=False)

    @property
    def n_c(self) -> int:
        return len(self.pairs)

    def unit_indices(self) -> tuple[int, ...]:
        return tuple(i for i, t in enumerate(self.tags) if t == "unit")

    def reconstruct(self) -> np.ndarray:
        return np.einsum("a,aij->ij", self.eigenvalues, self.projectors)


def _sigma_fixed_split(v1: np.ndarray, v2: np.ndarray) -> tuple[np.ndarray, np.ndarray] | None:
    """Basis (u, sigma(u)) of span{v1, v2} built from fixed points of the
    adjoint involution; None when no independent fixed pair is found."""
    candidates = []
    for v in (v1, v2):
        sv = adjoint_vector(v)
        candidates.append(v + sv)
        candidates.append(1j * (v - sv))
    candidates.sort(key=np.linalg.norm, reverse=True)
    f1 = candidates[0]
    norm1 = np.linalg.norm(f1)
    if norm1 < 1e-12:
        return None
    f1 = f1 / norm1
    best, best_norm = None, 0.0
    for f in candidates[1:]:
        rej = f - np.real(np.vdot(f1, f)) * f1
        norm = np.linalg.norm(rej)
        if norm > best_norm:
            best, best_norm = rej, norm
    if best is None or best_norm < 1e-10:
        return None
    f2 = best / best_norm
    u = f1 + 1j * f2
    u = u / np.linalg.norm(u)
    return u, adjoint_vector(u)


def spectral_decompose(
    p: np.ndarray,
    pair_tol: float = 1e-8,
    require_pairing: bool = False,
    cond_max: float = 1e8,
) -> SpectralDecomposition:
    """Eigenvalues, biorthonormal projectors M_a = |r_a><l_a| and the
    real / conjugate-pair classification of a diagonalizable superoperator.

    Complex eigenvalues are matched into conjugate pairs within ``pair_tol``
    (scaled by the spectral radius). Negative real eigenvalues agreeing
    within the same tolerance are grouped as a degenerate pair at angles
    +/- pi, with the eigenbasis re-chosen so the two projectors are images
    of each other under the adjoint involution. A leftover negative real
    eigenvalue is recorded (and raised when ``require_pairing`` is set),
    since no logarithm branch of such a map preserves Hermiticity.
    """
    p = np.asarray(p, dtype=complex)
    m = p.shape[0]
    n = math.isqrt(m)
    lam, rvecs = scipy.linalg.eig(p)
    lam = lam.astype(complex)
    rvecs = rvecs.astype(complex)
    scale = max(1.0, float(np.max(np.abs(lam))))
    tol = pair_tol * scale

    pos = [i for i in range(m) if lam[i].imag > tol]
    neg = [i for i in range(m) if lam[i].imag < -tol]
    real_idx = [i for i in range(m) if abs(lam[i].imag) <= tol]

    pairs: list[tuple[int, int]] = []
    used = set()
    for c in sorted(pos, key=lambda i: (-abs(lam[i]), i)):
        best_j, best_d = None, np.inf
        for j in neg:
            if j in used:
                continue
            d = abs(lam[j] - lam[c].conjugate())
            if d < best_d:
                best_j, best_d = j, d
        if best_j is None or best_d > 2 * tol:
            raise UnpairedNegativeEigenvalue(
                f"complex eigenvalue {lam[c]:.6g} has no conjugate partner"
            )
        used.add(best_j)
        pairs.append((c, best_j))
    leftover_neg_complex = [j for j in neg if j not in used]
    if leftover_neg_complex:
        raise UnpairedNegativeEigenvalue(
            f"complex eigenvalue {lam[leftover_neg_complex[0]]:.6g} has no conjugate partner"
        )

    tags = [""] * m
    for c, cb in pairs:
        tags[c] = tags[cb] = "pair"

    negative_real = sorted(
        (i for i in real_idx if lam[i].real < -tol), key=lambda i: (lam[i].real, i)
    )
    unpaired: list[int] = []
    k = 0
    while k < len(negative_real):
        i = negative_real[k]
        if (
            k + 1 < len(negative_real)
            and abs(lam[negative_real[k + 1]].real - lam[i].real) <= tol
        ):
            j = negative_real[k + 1]
            split = _sigma_fixed_split(rvecs[:, i], rvecs[:, j])
            if split is not None:
                rvecs[:, i], rvecs[:, j] = split
                mean = 0.5 * (lam[i].real + lam[j].real)
                lam[i] = lam[j] = complex(mean)
                tags[i] = tags[j] = "pair"
                pairs.append((i, j))
                k += 2
                continue
        unpaired.append(i)
        tags[i] = "real"
        k += 1

    for i in real_idx:
        if tags[i]:
            continue
        lam[i] = complex(lam[i].real)
        tags[i] = "unit" if abs(lam[i] - 1.0) <= tol else "real"

    if unpaired and require_pairing:
        raise UnpairedNegativeEigenvalue(
            f"negative real eigenvalue {lam[unpaired[0]].real:.6g} has no partner within pair_tol"
        )

    cond = np.linalg.cond(rvecs)
    if not np.isfinite(cond) or cond > cond_max:
        raise DefectiveMap(f"right-eigenvector condition number {cond:.3e} exceeds {cond_max:.1e}")
    lvecs = scipy.linalg.inv(rvecs)
    projectors = np.einsum("ia,aj->aij", rvecs, lvecs)
    # for a Hermiticity-preserving map the projector of a real eigenvalue is a
    # fixed point of the adjoint involution and conjugate pairs are mutual
    # images; enforcing this removes eigensolver asymmetry that the logarithm
    # would otherwise amplify
    if np.linalg.norm(hermiticity_conjugate(p) - p) <= 1e-8 * max(np.linalg.norm(p), 1e-300):
        for a in range(m):
            if tags[a] != "pair":
                projectors[a] = (projectors[a] + hermiticity_conjugate(projectors[a])) / 2
        for c, cb in pairs:
            projectors[cb] = hermiticity_conjugate(projectors[c])

    residual = float(
        np.linalg.norm(np.einsum("a,aij->ij", lam, projectors) - p)
        / max(np.linalg.norm(p), 1e-300)
    )
    if residual > 1e-6:
        raise DefectiveMap(f"spectral reconstruction residual {residual:.3e}")
    return SpectralDecomposition(
        hdim=n,
        eigenvalues=lam,
        projectors=projectors,
        tags=tuple(tags),
        pairs=tuple(pairs),
        unpaired_negative=tuple(unpaired),
        residual=residual,
    )


def principal_log_eigenvalues(dec: SpectralDecomposition) -> np.ndarray:
    """Principal scalar logarithm of each eigenvalue, applied so paired
    eigenvalues receive conjugate values (+i pi / -i pi on a degenerate
    negative pair)."""
    lam = dec.eigenvalues
    if np.min(np.abs(lam)) < ZERO_EIGENVALUE_TOL:
        raise ZeroEigenvalue("map has a numerically zero eigenvalue; log undefined")
    logs = np.empty(lam.shape, dtype=complex)
    in_pair = {i for pair in dec.pairs for i in pair}
    for a in range(lam.size):
        if a in in_pair:
            continue
        x = lam[a].real
        logs[a] = math.log(abs(x)) + (1j * math.pi if x < 0 else 0.0)
    for c, cb in dec.pairs:
        logs[c] = math.log(abs(lam[c])) + 1j * np.angle(lam[c])
        logs[cb] = logs[c].conjugate()
    return logs


def branch_generator(
    dec: SpectralDecomposition, x: Sequence[int], period: float
) -> np.ndarray:
    """Logarithm branch S_x = (1/T)[sum_a Log(lambda_a) M_a
    + sum_c 2 pi i x_c (M_c - M_cbar)]; exp(T S_x) returns the source map."""
    if len(x) != dec.n_c:
        raise DimensionMismatch(f"branch index length {len(x)} != n_c = {dec.n_c}")
    if period <= 0:
        raise ValueError("period must be positive")
    logs = principal_log_eigenvalues(dec)
    for (c, cb), xc in zip(dec.pairs, x):
        logs[c] += 2j * math.pi * xc
        logs[cb] -= 2j * math.pi * xc
    return np.einsum("a,aij->ij", logs, dec.projectors) / period

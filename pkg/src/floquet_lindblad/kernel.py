"""Effective time-homogeneous master equation with an exponential memory kernel.

The sought evolution obeys d/dt rho(t) = int_0^t exp((s-t)/tau_mem) L_K rho(s) ds
with a Lindbladian L_K sharing the spectral projectors of the one-cycle map:
L_K = sum_a lambda^K_a M_a. Each spectral component then evolves with a scalar
characteristic decay function

    h(t) = exp(-t/(2 tau)) [cosh(G t) + sinh(G t) / (2 G tau)],
    G = sqrt(1/(4 tau^2) + lambda^K),

and matching the one-cycle map pins h(T) = lambda_a, which fixes the kernel
eigenvalues as a function of the memory time. Candidate eigenvalues come from
a truncated power-series polynomial (stable against the spurious distant
branches a direct root finder can fall into), Newton-polished on the closed
form. Note lambda^K carries units of 1/time^2: the integral of the kernel,
tau * L_K, is what tends to the Markovian generator as tau -> 0.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.integrate import quad

from .errors import DefectiveDecomposition, NoConvergedRoot, NotHermiticityPreserving, NoValidKernelInRange
from .propagator import MapTrajectory
from .superop import SpectralDecomposition, annihilates_trace, is_ccp

__all__ = [
    "decay_function",
    "decay_function_derivative",
    "verify_decay_function",
    "solve_kernel_eigenvalues",
    "KernelSpec",
    "KernelReport",
    "build_kernel_lindbladian",
    "default_tau_grid",
    "minimal_memory_time",
    "kernel_evolution",
]

RESIDUAL_TOL = 1e-8


def _sinhc(z: complex) -> complex:
    if abs(z) < 1e-4:
        z2 = z * z
        return 1.0 + z2 / 6.0 + z2 * z2 / 120.0
    return cmath.sinh(z) / z


def _cexp(z: complex) -> complex:
    """exp saturated at |Re z| = 700 so stray root-polishing iterates stay
    finite (the huge residual then rejects them)."""
    x = z.real
    if x > 700.0:
        x = 700.0
    elif x < -700.0:
        return 0.0 + 0.0j
    return cmath.exp(complex(x, z.imag))


def _stable_parts(lambda_k: complex, gamma: float, t: float):
    """exp(-gamma t/2) * (cosh, sinhc) of G t without overflowing cosh."""
    g_a = cmath.sqrt(gamma * gamma / 4.0 + lambda_k)
    z = g_a * t
    if abs(z) < 0.35:
        damp = math.exp(-gamma * t / 2.0) if gamma * t < 1400 else 0.0
        return g_a, damp * cmath.cosh(z), damp * _sinhc(z)
    e1 = _cexp((g_a - gamma / 2.0) * t)
    e2 = _cexp(-(g_a + gamma / 2.0) * t)
    return g_a, (e1 + e2) / 2.0, (e1 - e2) / (2.0 * z)


def decay_function(lambda_k: complex, tau_mem: float, t: float) -> complex:
    """Characteristic decay function h(t) of one spectral component.

    Satisfies h(0) = 1, h'(0) = 0 and the memory-kernel equation
    h'(t) = int_0^t exp((s-t)/tau_mem) lambda_k h(s) ds.
    """
    if tau_mem <= 0:
        raise ValueError("tau_mem must be positive")
    gamma = 1.0 / tau_mem
    _, cosh_part, sinhc_part = _stable_parts(lambda_k, gamma, t)
    return cosh_part + (gamma * t / 2.0) * sinhc_part


def decay_function_derivative(lambda_k: complex, tau_mem: float, t: float) -> complex:
    """Analytic d h / d t; equals lambda_k * t * sinhc(G t) * exp(-t/(2 tau))."""
    gamma = 1.0 / tau_mem
    _, _, sinhc_part = _stable_parts(lambda_k, gamma, t)
    return lambda_k * t * sinhc_part


def _decay_function_dlambda(lambda_k: complex, tau_mem: float, t: float) -> complex:
    """Analytic d h / d lambda_k (h is entire in lambda_k)."""
    gamma = 1.0 / tau_mem
    g_a, cosh_part, sinhc_part = _stable_parts(lambda_k, gamma, t)
    z2 = (g_a * t) ** 2
    if abs(z2) < 1e-3:
        damp = math.exp(-gamma * t / 2.0) if gamma * t < 1400 else 0.0
        dsinhc_dz2 = damp * (1.0 / 6.0 + z2 / 60.0 + z2 * z2 / 2520.0)
    else:
        dsinhc_dz2 = (cosh_part - sinhc_part) / (2.0 * z2)
    return t * t * (sinhc_part / 2.0 + (gamma * t / 2.0) * dsinhc_dz2)


def verify_decay_function(
    lambda_k: complex, tau_mem: float, grid: Sequence[float]
) -> float:
    """Max residual of the memory-kernel integro-differential equation for the
    closed-form h, with the right-hand side evaluated by quadrature."""
    gamma = 1.0 / tau_mem
    residual = 0.0
    for t in grid:
        lhs = decay_function_derivative(lambda_k, tau_mem, t)
        if t == 0.0:
            rhs = 0.0 + 0.0j
        else:
            def integrand_re(s, t=t):
                return (math.exp(gamma * (s - t)) * lambda_k * decay_function(lambda_k, tau_mem, s)).real

            def integrand_im(s, t=t):
                return (math.exp(gamma * (s - t)) * lambda_k * decay_function(lambda_k, tau_mem, s)).imag

            re, _ = quad(integrand_re, 0.0, t, epsabs=1e-12, epsrel=1e-12, limit=200)
            im, _ = quad(integrand_im, 0.0, t, epsabs=1e-12, epsrel=1e-12, limit=200)
            rhs = re + 1j * im
        residual = max(residual, abs(lhs - rhs))
    return residual


def solve_kernel_eigenvalues(
    lambda_a: complex,
    tau_mem: float,
    period: float,
    n0: int = 60,
    residual_tol: float = RESIDUAL_TOL,
) -> list[complex]:
    """All kernel eigenvalues with h(T) = lambda_a reachable by the truncated
    power series, sorted by ascending |Im|.

    The constraint is rewritten as a degree-n0 polynomial in the dimensionless
    variable w = (G_a T)^2; only roots inside the truncation's trust region
    are kept, each is Newton-polished on the closed form, and every returned
    candidate satisfies |h(T) - lambda_a| <= residual_tol.
    """
    if tau_mem <= 0 or period <= 0:
        raise ValueError("tau_mem and period must be positive")
    if not 2 <= n0 <= 80:
        raise ValueError("series cutoff n0 must lie in [2, 80]")
    if abs(lambda_a) < 1e-14:
        raise NoConvergedRoot("zero map eigenvalue has no finite kernel eigenvalue")
    gamma = 1.0 / tau_mem
    half_gt = gamma * period / 2.0
    t2 = period * period

    if half_gt <= 52.0:
        rhs = lambda_a * math.exp(half_gt)
        coeffs = np.empty(n0 + 1, dtype=complex)
        for n in range(n0 + 1):
            coeffs[n0 - n] = 1.0 / math.factorial(2 * n) + half_gt / math.factorial(2 * n + 1)
        coeffs[n0] -= rhs
        trust = 0.5 * (2 * n0 + 1) * (2 * n0 + 2)
        raw = [w / t2 - gamma * gamma / 4.0 for w in np.roots(coeffs) if abs(w) <= trust]
    else:
        # deep Markovian regime: the series cannot reach (G T)^2/4, but the
        # second exponential of h is negligible there, so Newton from the
        # logarithm-branch seeds lambda^K ~ G log(lambda_a)/T converges fast
        log_principal = cmath.log(lambda_a)
        raw = [
            gamma * (log_principal + 2j * math.pi * k) / period for k in range(-4, 5)
        ]

    seen: list[complex] = []
    for lam_k in raw:
        for _ in range(12):
            f = decay_function(lam_k, tau_mem, period) - lambda_a
            if abs(f) <= 1e-13 * max(1.0, abs(lambda_a)):
                break
            df = _decay_function_dlambda(lam_k, tau_mem, period)
            if df == 0 or not np.isfinite(abs(df)):
                break
            step = f / df
            if not np.isfinite(abs(step)):
                break
            lam_k = lam_k - step
        if abs(decay_function(lam_k, tau_mem, period) - lambda_a) > residual_tol:
            continue
        if any(abs(lam_k - other) <= 1e-8 * max(1.0, abs(lam_k)) for other in seen):
            continue
        seen.append(complex(lam_k))
    if not seen:
        raise NoConvergedRoot(
            f"no candidate satisfies the h(T) residual check for lambda_a = {lambda_a}"
        )
    seen.sort(key=lambda z: (abs(z.imag), abs(z), z.real))
    return seen


@dataclass(frozen=True)
class KernelSpec:
    """A valid kernel generator at one memory time.

    ``kernel_eigenvalues`` is aligned with the spectral decomposition it was
    built from (zero on the unit-eigenvalue index, conjugate on pair
    partners); ``generator`` is L_K = sum_a lambda^K_a M_a.
    """

    tau_mem: float
    kernel_eigenvalues: np.ndarray
    generator: np.ndarray


@dataclass(frozen=True)
class KernelReport:
    """Result of the minimal-memory-time search."""

    tau_min: float
    spec_at_tau_min: KernelSpec | None
    scan: tuple[tuple[float, bool], ...]
    resolution_floor: float
    cap_hit: bool = False


def _candidate_lists(
    dec: SpectralDecomposition, tau_mem: float, period: float, cap: int, n0: int
) -> tuple[list[list[complex]], list[int], bool]:
    """Per-coordinate kernel-eigenvalue candidates: one list per non-pair index
    plus one per conjugate pair (the partner is fixed by conjugation)."""
    slots: list[list[complex]] = []
    slot_index: list[int] = []
    truncated = False
    in_pair = {i for pair in dec.pairs for i in pair}
    for a in range(dec.eigenvalues.size):
        if a in in_pair:
            continue
        slot_index.append(a)
        if dec.tags[a] == "unit":
            slots.append([0.0 + 0.0j])
            continue
        roots = solve_kernel_eigenvalues(dec.eigenvalues[a].real, tau_mem, period, n0=n0)
        real_roots = [z.real + 0.0j for z in roots if abs(z.imag) <= 1e-10 * max(1.0, abs(z))]
        if not real_roots:
            raise NoConvergedRoot(
                f"no real kernel eigenvalue for real map eigenvalue {dec.eigenvalues[a].real:.6g}"
            )
        truncated |= len(real_roots) > cap
        slots.append(real_roots[:cap])
    for c, _ in dec.pairs:
        slot_index.append(c)
        roots = solve_kernel_eigenvalues(dec.eigenvalues[c], tau_mem, period, n0=n0)
        truncated |= len(roots) > cap
        slots.append(roots[:cap])
    return slots, slot_index, truncated


def _build_kernel(
    dec: SpectralDecomposition,
    tau_mem: float,
    period: float,
    cap: int,
    n0: int,
) -> tuple[KernelSpec | None, bool]:
    if np.linalg.norm(dec.projectors.sum(axis=0) - np.eye(dec.hdim**2)) > 1e-6:
        raise DefectiveDecomposition("spectral projectors do not sum to the identity")
    try:
        slots, slot_index, truncated = _candidate_lists(dec, tau_mem, period, cap, n0)
    except NoConvergedRoot:
        return None, False
    partner = dict(dec.pairs)
    combos = sorted(
        itertools.product(*[range(len(s)) for s in slots]),
        key=lambda idx: sum(abs(slots[k][i].imag) for k, i in enumerate(idx)),
    )
    m = dec.eigenvalues.size
    for idx in combos:
        lam_k = np.zeros(m, dtype=complex)
        for k, i in enumerate(idx):
            a = slot_index[k]
            lam_k[a] = slots[k][i]
            if a in partner:
                lam_k[partner[a]] = slots[k][i].conjugate()
        generator = np.einsum("a,aij->ij", lam_k, dec.projectors)
        if not annihilates_trace(generator, tol=1e-8):
            continue
        try:
            ok, _ = is_ccp(generator, tol=1e-9 * max(1.0, np.linalg.norm(generator)))
        except NotHermiticityPreserving:
            continue
        if ok:
            return KernelSpec(tau_mem=tau_mem, kernel_eigenvalues=lam_k, generator=generator), truncated
    return None, truncated


def build_kernel_lindbladian(
    dec: SpectralDecomposition,
    tau_mem: float,
    period: float,
    candidates_per_eigenvalue: int = 3,
    n0: int = 60,
) -> KernelSpec | None:
    """Kernel generator of Lindblad form matching the one-cycle map at the
    given memory time, or None when no candidate combination is valid.

    The unit eigenvalue gets kernel eigenvalue zero, real map eigenvalues
    real roots, conjugate pairs conjugate roots; combinations are tried in
    order of ascending total |Im lambda^K| up to the per-coordinate cap.
    """
    spec, _ = _build_kernel(dec, tau_mem, period, candidates_per_eigenvalue, n0)
    return spec


def default_tau_grid(period: float, points: int = 40,
                     lo_factor: float = 1e-2, hi_factor: float = 10.0) -> np.ndarray:
    """Geometric memory-time grid from lo_factor*T to hi_factor*T."""
    return np.geomspace(lo_factor * period, hi_factor * period, points)


def evolution_choi_floor(
    spec: KernelSpec, dec: SpectralDecomposition, period: float, samples: int = 65
) -> float:
    """Smallest Choi eigenvalue of the kernel evolution sampled over one
    period (with stroboscopic memory erasure, complete positivity on [0, T]
    extends to all later times by composition)."""
    from .superop import choi

    floor = 0.0
    for s in np.linspace(0.0, period, samples):
        h = np.array(
            [decay_function(lk, spec.tau_mem, s) for lk in spec.kernel_eigenvalues]
        )
        p = np.einsum("a,aij->ij", h, dec.projectors)
        c = choi(p)
        floor = min(floor, float(np.linalg.eigvalsh((c + c.conj().T) / 2)[0]))
    return floor


def minimal_memory_time(
    dec: SpectralDecomposition,
    period: float,
    tau_grid: np.ndarray | None = None,
    refine_tol: float | None = None,
    candidates_per_eigenvalue: int = 3,
    n0: int = 60,
) -> KernelReport:
    """Shortest memory time admitting a valid kernel evolution.

    A memory time counts as valid when a generator of Lindblad form exists
    (:func:`build_kernel_lindbladian`) AND the evolution it generates stays
    completely positive over one period; the second requirement is not
    implied by the first and is what the designed evolution must satisfy.
    The grid is walked upward until the first valid point; validity at the
    smallest grid point reports tau_min = 0 (below the resolution floor of
    1e-2 T), otherwise the boundary is refined by bisection against the last
    invalid point. The scan table records every memory time evaluated.
    """
    if tau_grid is None:
        tau_grid = default_tau_grid(period)
    tau_grid = np.sort(np.asarray(tau_grid, dtype=float))
    floor = 1e-2 * period
    if refine_tol is None:
        refine_tol = 1e-2 * period

    def probe(tau: float) -> tuple[KernelSpec | None, bool]:
        spec, truncated = _build_kernel(dec, tau, period, candidates_per_eigenvalue, n0)
        if spec is not None and evolution_choi_floor(spec, dec, period) < -1e-7:
            spec = None
        return spec, truncated

    scan: list[tuple[float, bool]] = []
    cap_hit = False
    first_valid = None
    first_valid_spec = None
    for i, tau in enumerate(tau_grid):
        spec, truncated = probe(float(tau))
        valid = spec is not None
        cap_hit |= truncated and not valid
        scan.append((float(tau), valid))
        if valid:
            first_valid, first_valid_spec = i, spec
            break
    if first_valid is None:
        raise NoValidKernelInRange(
            f"no memory time in [{tau_grid[0]:.3g}, {tau_grid[-1]:.3g}] admits a valid kernel"
        )
    if first_valid == 0:
        return KernelReport(
            tau_min=0.0, spec_at_tau_min=first_valid_spec,
            scan=tuple(scan), resolution_floor=floor, cap_hit=cap_hit,
        )

    lo = float(tau_grid[first_valid - 1])
    hi = float(tau_grid[first_valid])
    spec_hi = first_valid_spec
    while hi - lo > refine_tol:
        mid = 0.5 * (lo + hi)
        spec, truncated = probe(mid)
        valid = spec is not None
        cap_hit |= truncated and not valid
        scan.append((mid, valid))
        if valid:
            hi, spec_hi = mid, spec
        else:
            lo = mid
    return KernelReport(
        tau_min=hi, spec_at_tau_min=spec_hi,
        scan=tuple(scan), resolution_floor=floor, cap_hit=cap_hit,
    )


def kernel_evolution(
    spec: KernelSpec,
    dec: SpectralDecomposition,
    period: float,
    t_end: float,
    samples: int,
) -> MapTrajectory:
    """Evolution generated by the kernel: within one period
    P(t) = sum_a h_a(t) M_a; across periods the memory is erased
    stroboscopically, so P(n T + s) = P(s) P(T)^n."""
    if samples < 2:
        raise ValueError("need at least two samples")
    times = np.linspace(0.0, float(t_end), samples)
    m = dec.eigenvalues.size

    def within_period(s: float) -> np.ndarray:
        h = np.array(
            [decay_function(spec.kernel_eigenvalues[a], spec.tau_mem, s) for a in range(m)]
        )
        return np.einsum("a,aij->ij", h, dec.projectors)

    p_period = within_period(period)
    powers: dict[int, np.ndarray] = {0: np.eye(m, dtype=complex)}

    def period_power(n: int) -> np.ndarray:
        if n not in powers:
            powers[n] = p_period @ period_power(n - 1)
        return powers[n]

    maps = np.empty((samples, m, m), dtype=complex)
    for k, t in enumerate(times):
        n, s = divmod(t, period)
        n = int(n)
        # landing exactly on a stroboscopic time belongs to the finished period
        if s < 1e-12 * period and n > 0:
            n, s = n - 1, period
        maps[k] = within_period(s) @ period_power(n)
    return MapTrajectory(times=times, maps=maps)

"""Markovianity analysis of periodically driven Lindblad dynamics.

Decides whether the one-cycle evolution map of a time-periodic Lindblad
master equation admits a time-independent Lindbladian generator, quantifies
the distance from Markovianity when it does not, and constructs an effective
time-homogeneous master equation with an exponential memory kernel.
"""

from .errors import FloquetLindbladError
from .kernel import (
    KernelReport,
    KernelSpec,
    build_kernel_lindbladian,
    decay_function,
    kernel_evolution,
    minimal_memory_time,
    solve_kernel_eigenvalues,
    verify_decay_function,
)
from .markovianity import (
    MarkovReport,
    SpectrahedronProblem,
    build_spectrahedron,
    d_rhp,
    extract_hamiltonian_jumps,
    find_floquet_lindbladian,
    log_preserves_hermiticity,
    mu_min,
)
from .model import (
    DriveParams,
    TimePeriodicLindbladian,
    build_two_level_model,
    generator_at,
)
from .propagator import (
    IntegratorConfig,
    MapTrajectory,
    choi_eigenvalue_trajectory,
    floquet_map,
    propagate_trajectory,
)
from .superop import (
    SpectralDecomposition,
    branch_generator,
    choi,
    is_ccp,
    is_completely_positive,
    is_trace_preserving,
    kraus_vectors_from_choi,
    lindbladian_matrix,
    matrix_exp,
    spectral_decompose,
    vectorize,
)

__version__ = "0.1.0"

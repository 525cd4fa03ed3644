"""Exception types shared across the package."""


class FloquetLindbladError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(FloquetLindbladError):
    """Operators of incompatible Hilbert-space dimensions were combined."""


class NonHermitianHamiltonian(FloquetLindbladError):
    """A Hamiltonian argument fails the Hermiticity tolerance."""


class NotPositive(FloquetLindbladError):
    """A matrix required to be positive semidefinite has a negative eigenvalue
    beyond tolerance."""


class DefectiveMap(FloquetLindbladError):
    """Eigendecomposition rejected: right-eigenvector matrix too ill-conditioned."""


class UnpairedNegativeEigenvalue(FloquetLindbladError):
    """The spectrum is not invariant under complex conjugation: a negative real
    eigenvalue has no partner (or a complex eigenvalue has no conjugate)."""


class ZeroEigenvalue(FloquetLindbladError):
    """Logarithm of a map with a (numerically) zero eigenvalue is undefined."""


class NotHermiticityPreserving(FloquetLindbladError):
    """A superoperator required to preserve Hermiticity does not (its Choi
    matrix is not Hermitian within tolerance)."""


class InvalidParams(FloquetLindbladError):
    """Model parameters violate their constraints."""


class IntegratorDiverged(FloquetLindbladError):
    """The ODE integration exceeded its step budget or underflowed."""


class AccuracyLoss(FloquetLindbladError):
    """The integrated map violates trace preservation beyond the safety bound."""


class NotLindbladian(FloquetLindbladError):
    """Generator fails one of the Lindblad-form conditions (Hermiticity
    preservation, trace annihilation, conditional complete positivity)."""


class ExtractionResidual(FloquetLindbladError):
    """Reassembling the extracted Hamiltonian and jump operators does not
    reproduce the generator within tolerance."""


class NoConvergedRoot(FloquetLindbladError):
    """Polynomial root finding produced no candidate passing the residual check."""


class DefectiveDecomposition(FloquetLindbladError):
    """A spectral decomposition failed its completeness check."""


class NoValidKernelInRange(FloquetLindbladError):
    """No memory time in the scanned range admits a valid kernel generator."""


class EmptyPhase(FloquetLindbladError):
    """A sweep contains no non-Lindbladian grid points to measure."""

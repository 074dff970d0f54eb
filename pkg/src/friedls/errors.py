"""Exception types shared across the package."""


class FriedlsError(Exception):
    """Base class for all package errors."""


class ConfigError(FriedlsError):
    """Invalid configuration: bad geometry, bad coefficients, bad key/value."""


class ClassificationError(FriedlsError):
    """Boundary classification failed (sign change of n.beta inside a facet)."""


class ResolutionError(FriedlsError):
    """Mesh too coarse to resolve a requested oscillatory mode."""


class SolverError(FriedlsError):
    """Linear solver failure: non-SPD matrix, breakdown, or iteration cap."""


class EigenConvergenceError(FriedlsError):
    """Smallest-eigenvalue iteration did not reach the requested residual."""

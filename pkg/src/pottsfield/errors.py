"""Exception hierarchy shared across the package."""


class PottsError(Exception):
    """Base class for all package-specific errors."""


class OutOfDomainError(PottsError, ValueError):
    """Moment/probability input lies outside the physical domain.

    Carries the index of the offending probability component when known.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class SingularDomainError(OutOfDomainError):
    """Input sits on the domain boundary where a logarithm diverges."""


class InfiniteFieldError(PottsError, ValueError):
    """Field-plane image is at infinity (logarithmic singularity of the map)."""


class SizeError(PottsError, ValueError):
    """System size N outside the supported enumeration range."""


class SolverFailureError(PottsError, RuntimeError):
    """Root search produced an empty branch set."""


class DegenerateBranchSetError(PottsError, RuntimeError):
    """Branch set contains no free-energy maximum to select."""

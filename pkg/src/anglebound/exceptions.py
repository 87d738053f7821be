"""Exception types shared across the package."""


class AngleBoundError(Exception):
    """Base class for all anglebound errors."""


class ZeroVector(AngleBoundError):
    """A vector (or function sample) with no usable norm was supplied."""


class DimensionMismatch(AngleBoundError):
    """Operands have incompatible lengths or dimensions."""


class NotSymmetric(AngleBoundError):
    """A matrix expected to be symmetric is not, beyond tolerance."""


class ZeroMatrix(AngleBoundError):
    """A covariance matrix with no positive eigenvalue was supplied."""


class LinkDomain(AngleBoundError):
    """The linear link received an index outside [-1/2, 1/2]."""


class InvalidBetaStar(AngleBoundError):
    """The target direction is incompatible with the feature law support."""


class DegenerateDesign(AngleBoundError):
    """The empirical covariance of the design is identically zero."""


class NoConvergence(AngleBoundError):
    """An iterative routine failed to converge or bracket its target."""


class DomainError(AngleBoundError):
    """A scalar argument fell outside its mathematical domain."""

"""Exception hierarchy shared by all solver modules."""


class GPBoundError(Exception):
    """Base class for every error raised by gpbound."""


class DomainError(GPBoundError, ValueError):
    """An argument lies outside the domain of the function."""


class DivergenceError(DomainError):
    """The requested quantity is infinite (e.g. K(m) at m = 1)."""


class WrongBranchError(DomainError):
    """Parameters belong to a different solution family than the one requested."""


class NoBoundStateError(GPBoundError):
    """No decaying solution exists for the given parameters."""


class ImaginaryAmplitudeError(NoBoundStateError):
    """The amplitude at the defect would be imaginary."""


class NoTurningPointError(NoBoundStateError):
    """The interior quasi-energy polynomial has no real turning points."""


class BoundaryAmplitudeError(NoBoundStateError):
    """The wall amplitude exceeds the interior oscillation amplitude."""


class AmplitudeExceedsPeakError(NoBoundStateError):
    """The wall amplitude exceeds the peak of the exterior soliton tail."""


class InvalidTurningPointError(DomainError):
    """A quadrature radicand is non-positive inside the integration interval."""


class BoundStateRegimeError(DomainError):
    """The energy is not below the exterior potential floor."""


class PotentialSchemaError(GPBoundError, ValueError):
    """A potential document is malformed."""

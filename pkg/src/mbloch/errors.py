"""Exception types shared across the package."""


class MaxwellBlochError(Exception):
    """Base class for all library-specific errors."""


class InvalidParameterError(MaxwellBlochError, ValueError):
    """A system or search parameter is out of its admissible range
    (most commonly a tuning parameter k >= 0)."""


class InvalidStateError(MaxwellBlochError, ValueError):
    """A phase-space point contains non-finite coordinates."""


class InvalidSpanError(MaxwellBlochError, ValueError):
    """An integration span (t0, t1) with t1 <= t0 was requested."""


class ToleranceOutOfRangeError(MaxwellBlochError, ValueError):
    """An integration tolerance outside [1e-14, 1e-2] was requested."""


class DomainExceededError(MaxwellBlochError, ValueError):
    """A curve parametrization was evaluated outside its time domain."""


class PoleProximityError(MaxwellBlochError, ValueError):
    """An evaluation point lies within 1e-8 of a pole of the function."""


class NoReturnError(MaxwellBlochError, RuntimeError):
    """A trajectory failed to return to the Poincare section within the
    allotted time window."""


class SeedOffSurfaceError(MaxwellBlochError, ValueError):
    """A periodic-orbit seed does not satisfy its integral-surface
    equation."""

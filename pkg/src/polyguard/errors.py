"""Exception types shared across the package."""


class PolyguardError(Exception):
    """Base class for all polyguard errors."""


class InvalidInputError(PolyguardError):
    """Raised for malformed instances, parameters out of range, or guards
    outside the polygon.  Maps to CLI exit code 2."""


class InternalInvariantError(PolyguardError):
    """Raised when an internal certified invariant fails (rounding claims,
    iteration caps, partition identities).  Indicates a bug, never bad user
    input.  Maps to CLI exit code 3."""

"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Raised when inputs violate a documented precondition or invariant."""


class NumericalError(RuntimeError):
    """Raised when a computation fails numerically (ill-conditioning,
    integrator breakdown, monitor violations, overflow)."""

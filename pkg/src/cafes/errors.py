"""Exception hierarchy shared by all modules."""


class CafeError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(CafeError):
    """A configuration document does not match the schema."""

    def __init__(self, key, message):
        self.key = key
        super().__init__(f"{key}: {message}")


class ValidationError(CafeError, ValueError):
    """A value violates a type invariant."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class DomainError(CafeError, ValueError):
    """An argument lies outside the domain of an operation."""


class CommandConflictError(CafeError):
    """A clamp command collides with a switch in progress or an existing plan."""


class OutOfRangeError(CafeError):
    """A platform would leave the span (it would hit an anchor)."""


class DegenerateGeometryError(CafeError):
    """Two chain nodes share the same along-span position."""


class NumericalInstabilityError(CafeError):
    """The integrator produced a non-finite state."""


class NonConvergenceError(CafeError):
    """An iterative solve hit its iteration cap."""

    def __init__(self, message, residual):
        self.residual = residual
        super().__init__(f"{message} (residual {residual:.3e})")


class InfeasibleError(CafeError):
    """A design target cannot be met within the allowed tension."""

    def __init__(self, message, cap):
        self.cap = cap
        super().__init__(f"{message} (cap {cap:.6g} N)")

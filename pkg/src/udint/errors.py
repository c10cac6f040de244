"""Exception types shared across udint."""


class UdintError(Exception):
    """Base class for all udint errors."""


class InvalidArgument(UdintError, ValueError):
    """An argument violates an operation's precondition."""


class MissingOracleError(UdintError):
    """An operation needs an exact value (integral, mean, ...) the object lacks."""


class SingularEvaluationError(UdintError, ArithmeticError):
    """An integrand was evaluated at a point where it is undefined."""

    def __init__(self, index, point, name=None):
        self.index = index
        self.point = point
        self.name = name
        what = f"integrand {name!r}" if name else "integrand"
        super().__init__(f"{what} undefined at sequence index n={index}, x_n={point!r}")


class GeneratorBoundaryError(UdintError, ArithmeticError):
    """A deterministic generator produced 0.0 or 1.0 after rounding."""


class IntegrityError(UdintError):
    """Internal consistency check failed (malformed input object)."""

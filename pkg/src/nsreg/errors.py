"""Exception types shared across the package."""


class NsregError(Exception):
    """Base class for all package errors."""


class ValidationError(NsregError):
    """Invalid argument or violated invariant."""


class FormatError(NsregError):
    """Malformed NSF1 file. Carries the name of the offending field."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"NSF1 format error in field '{field}': {message}")


class WindowError(NsregError):
    """Empty time window for a parabolic cylinder evaluation."""


class ConvergenceError(NsregError):
    """Iterative solve failed to reach tolerance.

    Carries the best value found so far, the final relative residual and
    the number of iterations spent.
    """

    def __init__(self, message, value, residual, iterations):
        self.value = value
        self.residual = residual
        self.iterations = iterations
        super().__init__(
            f"{message} (best value {value:.6e}, residual {residual:.3e}, "
            f"{iterations} iterations)"
        )


class SolverError(NsregError):
    """Time stepper aborted (CFL violation or non-finite state)."""

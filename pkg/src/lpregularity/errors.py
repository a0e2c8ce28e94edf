"""Exception types shared by every module.

The CLI maps :class:`ParameterError` (and its subclasses) to exit code 2 and
every other :class:`LPError` to exit code 3.
"""


class LPError(Exception):
    """Base class for all errors raised by the package."""


class ParameterError(LPError, ValueError):
    """A parameter is outside its admissible range."""


class InvalidInputError(LPError, ValueError):
    """Input data is malformed (non-finite samples, negative entries, ...)."""


class PreconditionError(LPError):
    """An operation's precondition on its data does not hold."""


class UndefinedRatioError(LPError, ZeroDivisionError):
    """A ratio was requested for a zero field."""


class InsufficientDataError(LPError):
    """Too few usable bands or points to fit a slope or constant."""


class DegenerateError(LPError):
    """The requested quantity is degenerate (zero denominator, vanishing solution)."""


class IterationLimitError(LPError):
    """An iteration did not converge within its budget."""

    def __init__(self, message, residual):
        super().__init__(f"{message} (last residual {residual:.3e})")
        self.residual = residual

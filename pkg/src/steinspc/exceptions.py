"""Exception hierarchy shared by every module of the package."""


class SteinSPCError(Exception):
    """Base class for all package errors."""


class ParameterError(SteinSPCError, ValueError):
    """A distribution or chart parameter lies outside its domain."""


class TruncationError(SteinSPCError, ArithmeticError):
    """A truncated series could not reach the requested tail tolerance."""


class SpecError(SteinSPCError, ValueError):
    """A chart design is invalid (e.g. lambda=1 for a Stein chart)."""


class EstimationError(SteinSPCError, ArithmeticError):
    """A Monte Carlo estimate could not be formed (all runs censored or discarded)."""


class BracketError(SteinSPCError, ValueError):
    """The calibration bracket does not enclose the target ARL."""


class CalibrationError(SteinSPCError, ArithmeticError):
    """Calibration failed to converge; ``best`` holds the last iterate."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class DegenerateDataError(SteinSPCError, ValueError):
    """Data carry no information for the requested statistic."""


class InputDataError(SteinSPCError, ValueError):
    """Malformed user data; ``line`` is the 1-based offending line if known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line

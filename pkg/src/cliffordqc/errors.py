"""Exception hierarchy shared by every module."""


class CliffordQCError(Exception):
    """Base class for all package errors."""


class ConfigError(CliffordQCError, ValueError):
    """Invalid user input: geometry, basis selection, run configuration."""


class DistanceSingularityError(CliffordQCError, ValueError):
    """Two point charges sit at (numerically) zero distance."""


class BasisParseError(ConfigError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DomainError(CliffordQCError, ValueError):
    """Special function called outside its domain."""


class QuadratureError(CliffordQCError, RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance.

    The best available estimate is kept on the exception so callers can
    decide whether to accept it.
    """

    def __init__(self, message, value=float("nan"), error=float("inf")):
        super().__init__(message)
        self.value = value
        self.error = error


class IntegralError(CliffordQCError, RuntimeError):
    """Failure while computing an integral class (wraps QuadratureError)."""


class ExperimentalPathError(IntegralError):
    """Requested a code path that is gated behind the experimental flag."""


class OrthogonalizationError(CliffordQCError, ArithmeticError):
    """Overlap matrix is numerically singular."""


class ConvergenceError(CliffordQCError, RuntimeError):
    """An iterative procedure failed to converge."""


class ExportError(CliffordQCError, ValueError):
    """Refused to serialize a record (e.g. non-finite value)."""


class FormatError(ConfigError):
    """Malformed input file (FCIDUMP, scan CSV)."""

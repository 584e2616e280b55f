"""Exception hierarchy shared by all modules."""


class QuditSimError(Exception):
    """Base class for every error raised by qudit_sim."""


class NumericalError(QuditSimError):
    """Base class for failures of a numerical method (CLI exit code 3)."""


class SamplingError(NumericalError):
    """A grid does not resolve a chirp or cannot hold the propagated field."""


class GridTooNarrow(NumericalError):
    """Projection onto the slit basis lost too much weight outside the grid."""

    def __init__(self, message, leakage=None):
        super().__init__(message)
        self.leakage = leakage


class WindowError(NumericalError):
    """A detector aperture extends beyond the sampled window."""


class WindowTooNarrow(NumericalError):
    """A visibility window holds less than one fringe period."""


class DomainError(QuditSimError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class GridMismatch(QuditSimError, ValueError):
    """Two sampled objects do not live on the same grid."""


class DimensionMismatch(QuditSimError, ValueError):
    """Two qudit states have different dimensions."""


class ConfigError(QuditSimError):
    """Base class for configuration problems (CLI exit code 2)."""


class ParseError(ConfigError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ValidationError(ConfigError, ValueError):
    """A configuration or geometry violates a stated invariant."""

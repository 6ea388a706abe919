class GstLabError(Exception):
    """Base class for every error raised by gst_lab."""


class ConfigurationError(GstLabError, ValueError):
    """Invalid configuration, detected before any compute starts."""


class DensityDomainError(GstLabError, ValueError):
    """A Levy density was evaluated outside its domain (z = 0)."""


class NumericalError(GstLabError, ArithmeticError):
    """A quadrature or an eigensolver failed to converge."""

    def __init__(self, message: str, diagnostic: str = ""):
        super().__init__(f"{message} ({diagnostic})" if diagnostic else message)
        self.diagnostic = diagnostic


class PrecisionError(NumericalError):
    """Tabulated data is too coarse for the requested numeric estimate."""


class AssumptionViolationError(GstLabError):
    """A modelling assumption does not hold numerically."""


class ConsistencyError(GstLabError, AssertionError):
    """An internal invariant of the simulator was broken."""


class EvaluationRefusedError(GstLabError, ValueError):
    """The generator was evaluated too close to the grid boundary."""

"""Exception types shared across the package."""

from .law import ValidationError, WeightError

__all__ = [
    "ValidationError",
    "WeightError",
    "NumericalError",
    "RootNotConverged",
    "DegenerateDerivative",
    "TruncationTooSmall",
    "NegativeCoefficient",
    "SimulationError",
    "NoExtinctPaths",
    "NoSurvivingPaths",
    "ConfigurationMismatch",
]


class NumericalError(ArithmeticError):
    """Base class for numeric degeneracies (CLI exit code 2)."""


class RootNotConverged(NumericalError):
    pass


class DegenerateDerivative(NumericalError):
    pass


class TruncationTooSmall(NumericalError, ValueError):
    pass


class NegativeCoefficient(NumericalError):
    """A series coefficient came out below the rounding-noise floor."""


class SimulationError(RuntimeError):
    pass


class NoExtinctPaths(SimulationError):
    pass


class NoSurvivingPaths(SimulationError):
    pass


class ConfigurationMismatch(ValueError):
    pass

"""Exception types raised across the package."""


class ChapgasError(Exception):
    """Base class for all package errors."""


class NonPositiveDensity(ChapgasError, ValueError):
    pass


class NonPositivePressureWarning(UserWarning):
    """Pressure evaluated to a non-positive value; reported, not fatal."""


class WrongKind(ChapgasError, ValueError):
    pass


class EnthalpyOutOfRange(ChapgasError, ValueError):
    """Bernoulli inversion impossible (h >= 1/2 is the vacuum limit)."""


class InvalidModel(ChapgasError, ValueError):
    pass


class TooCoarse(ChapgasError, ValueError):
    pass


class VacuumInit(ChapgasError, ValueError):
    pass


class StateInvalid(ChapgasError, RuntimeError):
    """Positivity or finiteness lost during integration."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class TimestepTooLarge(ChapgasError, ValueError):
    pass


class GridMismatch(ChapgasError, ValueError):
    pass


class NeedsTwoSnapshots(ChapgasError, ValueError):
    pass


class WordTooLong(ChapgasError, ValueError):
    pass


class InsufficientSamples(ChapgasError, ValueError):
    pass


class NonPositiveValues(ChapgasError, ValueError):
    pass


class ZeroDenominator(ChapgasError, ZeroDivisionError):
    pass


class NotCompactlySupported(ChapgasError, ValueError):
    pass


class SymmetryViolation(ChapgasError, ValueError):
    pass


class ConfigError(ChapgasError, ValueError):
    pass


class InsufficientPoints(ChapgasError, ValueError):
    pass


class ResolutionMismatch(ChapgasError, ValueError):
    pass

"""Exception types raised by the toolkit."""


class IonthermError(Exception):
    """Base class for all toolkit errors."""


class InvalidConfigError(IonthermError, ValueError):
    """A configuration or parameter violates its physical domain."""


class InvalidTransitionError(IonthermError, ValueError):
    """Red sideband requested below the motional ground state (n + m < 0)."""


class TruncationInsufficientError(IonthermError, RuntimeError):
    """The truncated Fock ladder is too short for the requested state."""


class MethodRangeError(IonthermError, ValueError):
    """Measured data lies outside the validity range of the chosen method."""


class UndefinedRatioError(IonthermError, ZeroDivisionError):
    """Sideband ratio is undefined (blue sideband excitation is zero)."""


class InsufficientDataError(IonthermError, ValueError):
    """Not enough data points (or visible structure) to run the fit."""


class UnconstrainedFitError(IonthermError, RuntimeError):
    """The spectrum carries no usable structure (all amplitudes equal within noise)."""


class FitFailedError(IonthermError, RuntimeError):
    """The optimizer did not converge; carries the best grid point found."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class NumericalAccuracyError(IonthermError, RuntimeError):
    """A numerical result failed its internal accuracy check."""


class SpectrumParseError(IonthermError, ValueError):
    """A data file failed validation; message names the offending row."""

    def __init__(self, message, line=None):
        super().__init__(message)
        self.line = line

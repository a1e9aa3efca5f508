"""Exception hierarchy shared by the engine, the service and the CLI."""


class SuperhedgeError(Exception):
    """Base class for all errors raised by this package."""


class ParameterViolation(SuperhedgeError):
    """Market or payoff parameters admit arbitrage or are degenerate."""


class ScaleExceeded(SuperhedgeError):
    """An exhaustive computation was requested beyond its supported size."""


class DimensionMismatch(SuperhedgeError):
    """Inputs disagree on the number of assets, steps or atoms."""


class StepMismatch(SuperhedgeError):
    """A state of the world has the wrong number of recorded moves."""


class StepOutOfRange(SuperhedgeError):
    """A time index lies outside the horizon of the model."""


class VerificationFailure(SuperhedgeError):
    """A cross-check that must hold mathematically failed beyond tolerance."""


class InputError(SuperhedgeError):
    """A user-supplied file or request could not be understood."""

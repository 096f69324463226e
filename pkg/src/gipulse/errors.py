"""Exception types shared across the package."""


class GiPulseError(Exception):
    """Base class for all errors raised by gipulse."""


class InvalidInputError(GiPulseError, ValueError):
    """An argument violates a documented precondition."""


class DegenerateSignalError(GiPulseError, ValueError):
    """The signal carries no usable variation (zero power, constant, all zeros)."""


class EmptyReportError(GiPulseError):
    """An aggregate was requested over an empty set of valid trials."""

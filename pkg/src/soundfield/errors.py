"""Exception hierarchy shared by all soundfield modules."""


class SoundFieldError(Exception):
    """Base class for all errors raised by this package."""


class InvalidArgument(SoundFieldError, ValueError):
    """An argument violates a documented precondition."""


class DegenerateInput(SoundFieldError, ValueError):
    """Input is degenerate (zero vector, coincident source/receiver, ...)."""


class DomainError(SoundFieldError, ValueError):
    """Argument outside the mathematical domain of the operation."""


class DegenerateReference(SoundFieldError, ValueError):
    """Reference signal carries no usable information (all zero / all silent)."""


class OrderTooHigh(SoundFieldError, ValueError):
    """Requested harmonic order exceeds what the microphone count supports."""


class FormatError(SoundFieldError, ValueError):
    """A file does not conform to its expected on-disk format."""


class UnsupportedFormat(SoundFieldError, ValueError):
    """A file is well-formed but uses an encoding this package does not read."""


class ConfigError(SoundFieldError, ValueError):
    """A configuration file is missing fields or holds invalid values."""

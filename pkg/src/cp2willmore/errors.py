"""Exception types raised by the toolkit."""


class DomainError(ValueError):
    """An input lies outside the domain of an operation."""


class ConfigError(ValueError):
    """Invalid parameters, resolutions or configuration values."""


class ImmersionError(ArithmeticError):
    """The map is not an immersion at some point (zero vector or rank < 2)."""

    def __init__(self, message, location=None):
        super().__init__(message if location is None else f"{message} at {location}")
        self.location = location


class NumericalDegeneracyError(ArithmeticError):
    """A numerical construction became ill-conditioned."""

"""Exception types shared across the package."""


class OdesaError(Exception):
    """Base class for all errors raised by this package."""


class OutOfOrderError(OdesaError):
    """An event or read time went backwards relative to recorded state."""


class NoContextError(OdesaError):
    """A context was requested from an all-zero surface."""


class ContractError(OdesaError):
    """A label spike violated the label/input coincidence contract."""


class FormatError(OdesaError):
    """A spike file or manifest could not be parsed."""


class ConfigError(OdesaError):
    """An experiment or network configuration is invalid."""


class DegenerateRangeError(OdesaError):
    """A feature range collapsed to a single point during encoder fitting."""

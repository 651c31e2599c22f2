"""Package-wide exception types."""

__all__ = [
    "GridsimError",
    "ConfigurationError",
    "ScenarioFormatError",
    "DomainError",
    "DegenerateRunError",
    "FitError",
]


class GridsimError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(GridsimError, ValueError):
    """A configuration value is outside its documented domain."""


class ScenarioFormatError(ConfigurationError):
    """A scenario file is malformed or fails validation.

    The message always names the offending key or section.
    """


class DomainError(GridsimError, ValueError):
    """A numeric argument is outside the mathematical domain of an operation."""


class DegenerateRunError(GridsimError, ValueError):
    """A metric is undefined for this run (e.g. no successful CPU at all)."""


class FitError(GridsimError, RuntimeError):
    """A distribution fit cannot proceed (bad data or failed convergence)."""

"""Exception hierarchy.

``DomainError`` and its subclasses map to CLI exit code 3, ``ConfigError``
to exit code 2.
"""


class PlasmonOAMError(Exception):
    """Base class for all package errors."""


class DomainError(PlasmonOAMError, ValueError):
    """An argument is outside the domain of the operation."""


class ZeroNormError(DomainError):
    pass


class DimensionMismatchError(DomainError):
    pass


class DegenerateCurveError(DomainError):
    pass


class UnreachableError(DomainError):
    pass


class BoundaryMinimumError(DomainError):
    pass


class ConfigError(PlasmonOAMError):
    """Invalid, missing or unparseable configuration."""

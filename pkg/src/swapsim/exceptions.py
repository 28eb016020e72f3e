"""Exception hierarchy.

``ModelError`` subclasses signal a failure of the physical model at runtime
(CLI exit code 1); ``ConfigError`` signals an invalid configuration document
(CLI exit code 2).
"""


class SwapsimError(Exception):
    """Base class for all package errors."""


class ModelError(SwapsimError):
    """Runtime failure of the physical model."""


class NeverHeraldsError(ModelError):
    """Heralding probability is zero (or below the underflow guard)."""


class PhysicalityError(ModelError):
    """A state or probability violates a physicality bound."""


class IllConditionedError(ModelError):
    """Matrix inversion rejected by the condition-number guard."""


class ConfigError(SwapsimError):
    """Invalid run configuration."""

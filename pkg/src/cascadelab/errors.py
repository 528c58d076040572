"""Exception hierarchy shared across the package.

The CLI maps these onto its exit-code contract: configuration syntax
problems exit with 2, semantic validation failures with 3, and numerical
failures (divergent integrals, solver breakdown) with 4.
"""


class CascadeLabError(Exception):
    """Base class for all package errors."""


class ConfigError(CascadeLabError):
    """Configuration file cannot be parsed (missing file, unknown key, bad type)."""


class ValidationError(CascadeLabError):
    """Inputs parse but violate a documented invariant or precondition."""


class NumericalError(CascadeLabError):
    """A numerical routine failed (non-finite values, solver underflow, divergence)."""

"""Exception hierarchy.

Argument-type errors (bad input, bad configuration) derive from
``ArgumentError``; failures of the numerics themselves derive from
``NumericalError``. The CLI maps the two families to exit codes 2 and 3.
"""


class PndmError(Exception):
    """Base class for all errors raised by this package."""


class ArgumentError(PndmError, ValueError):
    """An argument is malformed or inconsistent."""


class ConfigError(ArgumentError):
    """A sampler specification or run configuration is invalid."""


class DomainError(ArgumentError):
    """A time lies outside the schedule's domain."""


class BoundaryError(DomainError):
    """A finite-difference stencil would leave the schedule's domain."""


class WarmupError(ArgumentError):
    """A multistep update was called without enough history."""


class NumericalError(PndmError, ArithmeticError):
    """A computation produced an undefined or non-finite result."""


class SingularTimeError(NumericalError):
    """An expression is singular at the requested time (e.g. alpha_bar = 1)."""


class InsufficientDataError(NumericalError):
    """Too few usable points remain for a fit."""

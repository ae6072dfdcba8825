"""Exception types shared across the package.

All recoverable failures raise one of these, so callers (and the CLI) can
distinguish bad input from numerical trouble without string matching.
"""

from __future__ import annotations


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class PoleError(DomainError):
    """Evaluation was requested at (or too close to) a pole."""


class UnsupportedSpectrumError(ValueError):
    """The spectrum's family mix is not supported by this operation."""


class NumericError(ArithmeticError):
    """A numerical routine failed to certify its result."""


class FitConditionError(NumericError):
    """A least-squares fit was too ill-conditioned to trust."""

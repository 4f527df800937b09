"""Exception types shared across the package."""

from __future__ import annotations


class NotAGroup(ValueError):
    """A multiplication table violates a group axiom (the message names it)."""


class TooLargeForExact(RuntimeError):
    """An exact computation was requested beyond the configured size caps."""


class StrategyDimensionMismatch(ValueError):
    """A prover strategy does not match the configured register layout."""


class IdentityOrder(ValueError):
    """The order-dependent factor is undefined for the identity element."""


class DegenerateDenominator(ValueError):
    """The pass bound denominator 1 - |S|/2^(2n) is not positive."""


class ZeroPassProbability(ValueError):
    """The reserved-register bound needs a positive overall pass probability."""


class InfeasibleInstance(ValueError):
    """Constraint values (b, l) admit no real vector on the cyclic manifold."""


class ConstraintProjectionFailure(RuntimeError):
    """No optimizer start could be projected onto the constraint manifold."""


class EmptyRange(ValueError):
    """An optimization or sweep range contains no candidates."""

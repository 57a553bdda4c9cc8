"""Exception hierarchy mapped to CLI exit codes."""
from __future__ import annotations


class TorusDynError(Exception):
    """Base class for package errors."""

    exit_code = 3


class InputError(TorusDynError):
    """Malformed or inconsistent user input."""

    exit_code = 1


class OutOfHypothesesError(TorusDynError):
    """Input falls outside the supported hypotheses (e.g. not ergodic)."""

    exit_code = 2


class NotErgodicError(OutOfHypothesesError):
    """Some eigenvalue is a root of unity."""


class InvariantError(TorusDynError):
    """A verified invariant failed; signals an upstream bug or bad data."""

    exit_code = 3


class BudgetError(TorusDynError):
    """A search or iteration budget was exhausted."""

    exit_code = 4


class NumericsError(TorusDynError):
    """A numerical solve failed to converge."""

    exit_code = 3

"""Exception hierarchy.

Domain errors (bad user input) are kept apart from numerical failures so
callers such as the CLI can map them to different exit codes.
"""


class BiheunError(Exception):
    """Base class for all package errors."""


class ParameterError(BiheunError, ValueError):
    """Invalid equation parameters (e.g. gamma a non-positive integer)."""


class DomainError(BiheunError, ValueError):
    """Argument outside the domain of a formula."""


class ForbiddenStateError(DomainError):
    """Energy maps to a negative radicand, so no relativistic bound state exists."""


class ReductionError(BiheunError):
    """A potential could not be matched onto the bi-confluent Heun equation."""

    def __init__(self, message, family=None, slot=None):
        super().__init__(message)
        self.family = family
        self.slot = slot


class TrivialFamilyError(ReductionError):
    """All non-constant potential slots vanish; there is nothing to reduce."""


class ConvergenceError(BiheunError, ArithmeticError):
    """A series or iteration failed to converge.

    Attributes
    ----------
    partial_sum : float or None
        Last partial sum reached before giving up.
    terms : int or None
        Number of terms summed.
    """

    def __init__(self, message, partial_sum=None, terms=None):
        super().__init__(message)
        self.partial_sum = partial_sum
        self.terms = terms


class EvaluationError(BiheunError):
    """Evaluation failed at a specific grid point."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class SolverConfigError(BiheunError):
    """The shooting solver configuration is inadequate (bracket, box size)."""

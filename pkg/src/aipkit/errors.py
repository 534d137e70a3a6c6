"""Exception hierarchy.

Everything raised deliberately by the package derives from
:class:`AipError`, so callers can separate our failures from numpy's.
"""


class AipError(Exception):
    """Base class for all errors raised by aipkit."""


class InvalidInput(AipError, ValueError):
    """An argument has the wrong shape or violates a stated precondition."""


class DomainError(AipError, ValueError):
    """A point lies outside the domain where the object is defined."""

    def __init__(self, msg, point=None):
        super().__init__(msg)
        self.point = point


class PoleError(DomainError):
    """Evaluation was attempted at a pole of a rational function."""


class PencilSingular(DomainError):
    """``M - lambda N`` is not invertible at the requested point."""


class UnsupportedPoleStructure(AipError):
    """A pole (or zero) is not simple, or zeros of a product repeat."""


class NotGeneralizedSchur(AipError):
    """Peeling disk poles did not leave a contractive function."""


class NumericalRankFailure(AipError):
    """A numerically computed dimension disagrees with its exact value."""


class KLConsistencyError(AipError):
    """The left and right Krein-Langer data do not fit together."""


class NotSimple(AipError):
    """A colligation has a nontrivial reducing subspace."""


class DeterminateCase(AipError):
    """The Pick matrix of the interpolation data is singular."""


class ExtensionInfeasible(AipError):
    """No unitary extension exists with the requested enlargement."""

    def __init__(self, msg, required_enlargement=None):
        super().__init__(msg)
        self.required_enlargement = required_enlargement


class ParseError(AipError):
    """An input document is malformed."""

    def __init__(self, msg, location=None):
        if location:
            msg = f"{location}: {msg}"
        super().__init__(msg)
        self.location = location


class ValidationError(AipError):
    """Problem data failed one or more of the standing assumptions."""

    def __init__(self, msg, codes=()):
        super().__init__(msg)
        self.codes = tuple(codes)

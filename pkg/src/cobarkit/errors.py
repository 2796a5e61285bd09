"""Exception types shared across the package."""

from __future__ import annotations


class CobarKitError(Exception):
    """Base class for every error raised by cobarkit."""


class SourceTargetMismatch(CobarKitError):
    pass


class DegreeMismatch(CobarKitError):
    pass


class NotAChainComplex(CobarKitError):
    pass


class NotAContraction(CobarKitError):
    pass


class ArityMismatch(CobarKitError):
    pass


class SlotOutOfRange(CobarKitError):
    pass


class TruncationExceeded(CobarKitError):
    pass


class InvalidCooperad(CobarKitError):
    pass


class NotEquivariant(CobarKitError):
    pass


class NotMaurerCartan(CobarKitError):
    pass


class NotAOneCell(CobarKitError):
    pass


class DegreeBoundExceeded(CobarKitError):
    """A polynomial in t grew past the declared degree bound."""


class ObstructionAtArity(CobarKitError):
    def __init__(self, arity: int, message: str = ""):
        self.arity = arity
        super().__init__(message or f"linear solve infeasible at arity {arity}")


class TransferInternalError(CobarKitError):
    pass


class ManifestError(CobarKitError):
    """Input file could not be parsed or failed validation."""

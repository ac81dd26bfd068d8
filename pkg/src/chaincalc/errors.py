"""Shared error taxonomy.

Every domain failure raises a subclass of ChainCalcError carrying enough
structured data (``payload``) to serialize a witness; the CLI maps these to
exit status 3 and parse problems to status 2.
"""

from __future__ import annotations

from typing import Any


class ChainCalcError(Exception):
    """Base class for all domain errors raised by this package."""

    def __init__(self, message: str, payload: dict[str, Any] | None = None):
        super().__init__(message)
        self.payload = payload or {}


class UnsupportedDimensionError(ChainCalcError):
    pass


class DimensionMismatchError(ChainCalcError):
    pass


class ArityMismatchError(ChainCalcError):
    pass


class TransversalityError(ChainCalcError):
    """Raised when an operation requires a transversal input and the check
    fails; payload carries the witnessing face tuple and the deficient rank."""


class PerturbationError(ChainCalcError):
    pass


class BraneMismatchError(ChainCalcError):
    pass


class InvalidChainError(ChainCalcError):
    pass


class InvalidConfigurationError(ChainCalcError):
    """A disc/arc configuration violates containment or disjointness; the
    payload names the constraint and the offending disc indices."""


class GluingError(ChainCalcError):
    pass

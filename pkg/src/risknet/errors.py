"""Exception types shared across the package."""

from __future__ import annotations


class RisknetError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(RisknetError, ValueError):
    """Input data violates a structural invariant (bad price, bad shape, ...)."""


class ParseError(RisknetError, ValueError):
    """A file could not be parsed; carries the offending row when known."""

    def __init__(self, message: str, row: int | None = None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


class ConfigError(RisknetError, ValueError):
    """Invalid run configuration or calendar definition."""


class DomainError(RisknetError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class NumericalError(RisknetError, ArithmeticError):
    """A recursion or solver produced a non-finite or impossible value."""

    def __init__(self, message: str, index: int | None = None):
        if index is not None:
            message = f"{message} (at index {index})"
        super().__init__(message)
        self.index = index


class EstimationError(RisknetError, RuntimeError):
    """An optimizer failed to converge.

    Carries the best parameter vector seen so far plus a diagnostics dict so
    callers can inspect or salvage a partial fit.
    """

    def __init__(self, message: str, best_params=None, diagnostics: dict | None = None):
        super().__init__(message)
        self.best_params = best_params
        self.diagnostics = diagnostics or {}


class SolverError(RisknetError, RuntimeError):
    """A root search failed to bracket or converge; carries diagnostics."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}

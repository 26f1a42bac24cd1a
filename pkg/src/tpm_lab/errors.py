"""Exception types shared across the package."""

from __future__ import annotations


class ValidationError(ValueError):
    """An object violates one of its construction invariants.

    Carries the name of the violated invariant and the numerical residual
    so callers (and error messages) can report exactly what failed.
    """

    def __init__(self, message: str, *, invariant: str | None = None,
                 residual: float | None = None):
        super().__init__(message)
        self.invariant = invariant
        self.residual = residual


class ConfigError(ValueError):
    """A scenario file cannot be parsed or fails schema validation."""

    def __init__(self, message: str, *, field: str | None = None):
        super().__init__(message)
        self.field = field

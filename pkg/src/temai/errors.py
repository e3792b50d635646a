"""Exception hierarchy shared by all engine modules.

Every error raised on a bad input derives from ValidationError so callers
(and the CLI / HTTP layers) can map error classes to exit codes and status
codes without string matching.
"""

from __future__ import annotations


class TemaiError(Exception):
    """Base class for all engine errors."""

    code = "error"


class ValidationError(TemaiError, ValueError):
    """Invalid input: shape, range, completeness, or structural violation."""

    code = "validation"

    def __init__(self, message: str, field_path: str | None = None):
        super().__init__(message)
        self.field_path = field_path


class AliasLookupError(ValidationError):
    """Unknown criterion name; carries nearest-candidate suggestions."""

    code = "alias_lookup"

    def __init__(self, message: str, candidates: list[str] | None = None):
        super().__init__(message)
        self.candidates = candidates or []


class NumericsError(TemaiError, RuntimeError):
    """Numerical procedure failed to converge or is outside supported range."""

    code = "numerics"

    def __init__(self, message: str, iterations: int | None = None):
        super().__init__(message)
        self.iterations = iterations


class SchemaError(TemaiError, ValueError):
    """Document schema version or structure not supported."""

    code = "schema"

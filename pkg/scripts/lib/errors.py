"""Exception hierarchy for the optical Thomas rotation library."""

from typing import Optional


class ThomasError(Exception):
    """Base class for all library errors."""


class DomainError(ThomasError, ValueError):
    """An operation was called outside its domain (zero state, antipodal points, ...)."""


class ClosureError(ThomasError):
    """A product that should fix the starting four-velocity does not."""

    def __init__(self, message: str, residual_rapidity: Optional[float] = None):
        super().__init__(message)
        self.residual_rapidity = residual_rapidity

    def to_dict(self) -> dict:
        """Convert to dictionary for JSON serialization."""
        return {
            "error": str(self),
            "kind": "closure",
            "residual_rapidity": self.residual_rapidity,
        }


class DegenerateSequenceError(ThomasError):
    """All non-trivial element axes are parallel; the invariant set is a whole great circle."""


class ScenarioError(ThomasError, ValueError):
    """A scenario file could not be read or failed schema validation."""

    def __init__(self, path: str, field: str, message: str):
        super().__init__(f"{path}: {field}: {message}")
        self.path = path
        self.field = field

    def to_dict(self) -> dict:
        """Convert to dictionary for JSON serialization."""
        return {
            "error": str(self),
            "kind": "scenario",
            "path": self.path,
            "field": self.field,
        }


class ConsistencyError(ThomasError):
    """Two routes to the same quantity disagree beyond tolerance."""

    def __init__(self, message: str, discrepancy: Optional[float] = None):
        super().__init__(message)
        self.discrepancy = discrepancy

    def to_dict(self) -> dict:
        """Convert to dictionary for JSON serialization."""
        return {
            "error": str(self),
            "kind": "consistency",
            "discrepancy": self.discrepancy,
        }

"""
Exception hierarchy for ConflictLab.

All errors derive from ValueError so callers that guard on invalid input keep working.
"""

from typing import List, Optional


class ConflictLabError(ValueError):
    """Base class for ConflictLab errors."""


class ConfigInvalidError(ConflictLabError):
    """Scenario configuration failed to parse or validate."""

    def __init__(self, message: str, errors: Optional[List[str]] = None):
        super().__init__(message)
        self.errors = errors or []


class DuplicateXAppError(ConflictLabError):
    """An xApp with the same id is already registered."""


class UnknownXAppError(ConflictLabError):
    """A handle or xApp id does not refer to a registered xApp."""


class UnknownParameterError(ConflictLabError):
    """A parameter id is not present in the parameter registry."""


class TooManyXAppsError(ConflictLabError):
    """Priority learning was asked to enumerate too many orderings."""


class InsufficientHistoryError(ConflictLabError):
    """Not enough KPI windows are available for lagged correlation."""


class MissingArtifactError(ConflictLabError):
    """A run directory lacks an expected artifact."""

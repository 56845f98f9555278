"""Exception hierarchy shared by all modules.

The CLI maps ``InputError`` to exit code 2 and every other ``VsheetError``
to exit code 1.
"""


class VsheetError(Exception):
    """Base class for all library errors."""


class InputError(VsheetError, ValueError):
    """Malformed or out-of-domain input supplied by the caller."""


class DomainError(VsheetError, ValueError):
    """A Green-function query that is mathematically undefined (x = y)."""


class StateError(VsheetError):
    """A sheet configuration that violates its validity invariants."""


class ConsistencyError(VsheetError):
    """A residual that fails the mode-1 compatibility required by L0^{-1}."""


class NumericalFailure(VsheetError):
    """An iteration that diverged or stalled."""

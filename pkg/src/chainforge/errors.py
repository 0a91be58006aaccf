"""Exception types shared across the package.

Everything raised on purpose derives from ChainforgeError so callers can
catch one base class. The split below mirrors how the service maps
failures to HTTP statuses: bad inputs, blown resource guards, and
lookups of configurations a table never keyed.
"""
from __future__ import annotations


class ChainforgeError(Exception):
    """Base class for all errors raised deliberately by this package."""


class ModelError(ChainforgeError):
    """Invalid input or an operation that the model does not define."""


class GuardExceeded(ChainforgeError):
    """A computation was refused because it would breach a resource guard."""


class UnknownConfiguration(ChainforgeError):
    """A configuration was queried against a table that does not key it."""

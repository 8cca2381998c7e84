"""Exception types shared across the package."""


class TableQAError(Exception):
    """Base class for all package errors."""


class ParseError(TableQAError):
    """A dataset file could not be decoded."""


class TableValidationError(TableQAError):
    """A table or question record violates a structural invariant."""


class CheckpointError(TableQAError):
    """A model or index file is malformed, truncated, or incompatible."""


class StaleIndexError(TableQAError):
    """An embedding index was built from a different model checkpoint."""


class NotFoundError(TableQAError):
    """A referenced table or resource does not exist."""


class UnanswerableError(TableQAError):
    """An aggregation could not produce a value from the selected cells."""

"""Exception hierarchy shared by every part of the package."""


class TripIndexError(Exception):
    """Base class for all package errors."""


class RangeError(TripIndexError, IndexError):
    """A position lies outside the valid range of a structure."""


class NotFoundError(TripIndexError, LookupError):
    """A select-style lookup asked for an occurrence that does not exist."""


class UsageError(TripIndexError, ValueError):
    """Invalid arguments to a query or command."""


class ParseError(TripIndexError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class BuildError(TripIndexError):
    """The input cannot be turned into an index."""


class ConfigurationError(TripIndexError, ValueError):
    pass


class IntegrityError(TripIndexError):
    """A serialized index is corrupt or of an unknown format."""

class GapforgeError(Exception):
    """Base class for errors raised by gapforge."""


class DomainError(GapforgeError, ValueError):
    """An argument lies outside the domain of the operation (e.g. gamma <= 1)."""


class UnrealizablePrefixError(GapforgeError, ValueError):
    """No gamma produces the requested increments."""


class UnsortedOutputError(GapforgeError, RuntimeError):
    """A benchmark sort produced unsorted output; its counts are meaningless."""


class SearchError(GapforgeError, RuntimeError):
    """A search step could not produce a ranking or a consensus prefix."""

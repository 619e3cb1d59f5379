"""Exception hierarchy shared by every module."""


class AnchorVoteError(Exception):
    """Base class for all library errors."""


class InvalidInputError(AnchorVoteError, ValueError):
    pass


class UnsupportedError(AnchorVoteError):
    """Requested rule/dimension combination has no implementation."""


class ResourceLimitError(AnchorVoteError):
    """An enumeration would exceed the configured budget."""

    def __init__(self, message, count=None, budget=None):
        super().__init__(message)
        self.count = count
        self.budget = budget

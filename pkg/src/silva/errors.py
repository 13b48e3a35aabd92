"""Exception hierarchy shared across the package."""


class SilvaError(ValueError):
    pass


class ValidationError(SilvaError):
    """A discourse tree violates a structural invariant.

    ``span`` is the (start, end) span of the offending node when known.
    """

    def __init__(self, message, span=None):
        super().__init__(message)
        self.span = span


class LeafCountMismatch(ValidationError):
    pass


class NonContiguousSpan(ValidationError):
    pass


class DuplicateLeaf(ValidationError):
    pass


class DegenerateAttention(SilvaError):
    pass


class EmptyDocument(SilvaError):
    pass


class TooLarge(SilvaError):
    pass


class OutOfRange(SilvaError):
    pass


class InvalidRange(SilvaError):
    pass


class MissingScores(SilvaError):
    pass


class TreeSyntaxError(SilvaError):
    def __init__(self, message, offset):
        super().__init__(f"{message} at byte offset {offset}")
        self.offset = offset


class FileFormatError(SilvaError):
    def __init__(self, message, line):
        super().__init__(f"line {line}: {message}")
        self.line = line


class CorpusMismatch(SilvaError):
    pass


class EduCountMismatch(SilvaError):
    pass

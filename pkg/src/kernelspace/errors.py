"""Host-level error types shared across modules."""


class UsageError(Exception):
    """A host API precondition was violated (not an in-language exception)."""


class ParseError(Exception):
    """Source text could not be parsed or desugared."""

    def __init__(self, msg, line=None, col=None):
        self.line = line
        self.col = col
        where = f" at {line}:{col}" if line is not None else ""
        super().__init__(msg + where)

"""Exception hierarchy shared by all solvers and I/O routines."""


class MRFGCError(Exception):
    """Base class for every error raised by this package."""


class GraphError(MRFGCError, ValueError):
    pass


class ConfigurationError(MRFGCError, ValueError):
    pass


class PreconditionError(MRFGCError, ValueError):
    """An operation was called with arguments violating its precondition."""


class InfeasibleInstance(MRFGCError):
    """No valid traversal exists for the instance."""


class BudgetExceeded(MRFGCError):
    """A search or table construction hit its configured state/time budget."""


class NonCollapsibleError(MRFGCError):
    """The formation library is not collapsible but the caller requires it."""


class ParseError(MRFGCError):
    """Syntax error in a document, located by line and column."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)


class SemanticError(MRFGCError):
    """A well-formed document describes an invalid object; ``path`` locates it."""

    def __init__(self, message, path=""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)

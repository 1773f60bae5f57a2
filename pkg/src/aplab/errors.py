"""Shared exception types."""


class BudgetExceededError(RuntimeError):
    """A configured resource budget (cells, nodes, samples, translates) ran out.

    Distinct from a negative mathematical answer: callers that exhaust a budget
    learn nothing about existence.
    """


class FormatError(ValueError):
    """A data file does not match its documented format."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)

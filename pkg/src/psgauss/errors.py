"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class PsgaussError(Exception):
    """Base class for all package errors."""


class DegenerateSpan(PsgaussError):
    """No admissible pivot: the spanned subspace is degenerate within tolerance."""


class DegenerateMetric(PsgaussError):
    """The induced metric is (numerically) degenerate at some sample."""


class SignatureMismatch(PsgaussError, ValueError):
    pass


class GradeError(PsgaussError, ValueError):
    pass


class JetDomainError(PsgaussError, ValueError):
    """An elementary function was applied outside its real domain."""


class DomainError(PsgaussError, ValueError):
    """A chart point lies outside the declared domain or on an excluded line."""


class ParseError(PsgaussError, ValueError):
    """Lexical, syntax or semantic error in a surface/curve source.

    ``line`` and ``column`` are 1-based; ``expected`` is the set of token
    descriptions that would have been accepted at that position.
    """

    def __init__(self, message, line=1, column=1, expected=()):
        self.line = line
        self.column = column
        self.expected = frozenset(expected)
        where = f"line {line}, column {column}"
        if self.expected:
            message = f"{message} (expected one of: {', '.join(sorted(self.expected))})"
        super().__init__(f"{where}: {message}")


class ValidationError(PsgaussError, ValueError):
    """Structured input failed a precondition check."""


class LiouvilleNonConvergence(PsgaussError):
    def __init__(self, message, history):
        self.history = list(history)
        super().__init__(f"{message}; update history: {self.history}")


class LiouvilleResidualError(PsgaussError):
    """A supplied conformal factor does not satisfy Liouville's equation."""


class IntegrationUnstable(PsgaussError):
    pass


class CatalogError(PsgaussError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "unknown catalog entry"

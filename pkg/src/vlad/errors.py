"""Exception hierarchy shared by the parser, the evaluators and the AD operators."""

from __future__ import annotations


class VladError(Exception):
    """Base class. ``step`` is filled in by the CPS machine when an error escapes it."""

    step: int | None = None


class ParseError(VladError):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        self.line = line
        self.col = col
        super().__init__(f"{msg} at line {line}, column {col}")


class UnbalancedParens(ParseError):
    pass


class UnknownForm(ParseError):
    pass


class ArityMismatch(ParseError):
    pass


class MalformedBinding(ParseError):
    pass


class UnboundVariable(VladError):
    pass


class VladTypeError(VladError):
    pass


class DomainError(VladError):
    pass


class ShapeMismatch(VladError):
    pass


class NotABundle(VladError):
    pass


class ClosureInCotangentPosition(VladError):
    pass


class ComputationCompletedBeforeLimit(VladError):
    """A ``checkpoint`` call asked for at least as many steps as the computation takes."""

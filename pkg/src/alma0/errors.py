"""Exception hierarchy shared by every stage of the pipeline."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int
    length: int = 1

    def __post_init__(self):
        if self.line < 1 or self.column < 1 or self.length < 1:
            raise ValueError(f"invalid span {self.line}:{self.column}+{self.length}")

    def __str__(self):
        return f"{self.line}:{self.column}"


class AlmaError(Exception):
    """Base class. ``span`` is None when no source position applies."""

    kind = "error"

    def __init__(self, message: str, span: SourceSpan | None = None):
        super().__init__(message)
        self.message = message
        self.span = span

    def __str__(self):
        if self.span is None:
            return f"{self.kind}: {self.message}"
        return f"{self.span}: {self.kind}: {self.message}"


class LexError(AlmaError):
    kind = "lexical error"


class ParseError(AlmaError):
    kind = "syntax error"


class ResolveError(AlmaError):
    kind = "semantic error"


class AlmaRuntimeError(AlmaError):
    kind = "runtime error"


class UninitializedError(AlmaRuntimeError):
    pass


class LimitExceeded(AlmaRuntimeError):
    kind = "limit exceeded"


class StepLimitExceeded(LimitExceeded):
    pass


class ChoicePointLimitExceeded(LimitExceeded):
    pass


class InternalError(AlmaError):
    """An engine invariant was broken; never caused by user programs."""

    kind = "internal error"

from __future__ import annotations

from enum import Enum
from typing import TYPE_CHECKING, Iterable

if TYPE_CHECKING:
    from scade2b.models.scade_ast import SourcePos


class DiagnosticKind(str, Enum):
    RANGE_ERROR = "RangeError"
    DIVISION_BY_ZERO = "DivisionByZero"
    INDEX_OUT_OF_BOUNDS = "IndexOutOfBounds"
    MISSING_INPUT = "MissingInput"
    PRE_VIOLATION = "PreViolation"
    INVARIANT_VIOLATION = "InvariantViolation"
    VARIANT_NON_DECREASE = "VariantNonDecrease"
    NON_DISJOINT_PARALLEL = "NonDisjointParallel"
    EVALUATION_ERROR = "EvaluationError"


class Scade2BError(Exception):
    def __init__(self, message: str, pos: SourcePos | None = None, filename: str | None = None):
        super().__init__(message)
        self.message = message
        self.pos = pos
        self.filename = filename

    def __str__(self) -> str:
        if self.pos is not None:
            return f"{self.filename or '<input>'}:{self.pos.line}:{self.pos.col}: {self.message}"
        if self.filename:
            return f"{self.filename}: {self.message}"
        return self.message


class FrontendError(Scade2BError):
    pass


class ScadeSyntaxError(FrontendError):
    def __init__(
        self,
        message: str,
        pos: SourcePos | None = None,
        filename: str | None = None,
        expected: Iterable[str] = (),
    ):
        self.expected = frozenset(expected)
        if self.expected:
            message = f"{message}; expected one of: {', '.join(sorted(self.expected))}"
        super().__init__(message, pos, filename)


class ScadeNameError(FrontendError):
    pass


class ScadeTypeError(FrontendError):
    pass


class CausalityError(FrontendError):
    def __init__(self, variables: Iterable[str], pos: SourcePos | None = None, filename: str | None = None):
        self.variables = tuple(variables)
        cycle = " -> ".join(self.variables + self.variables[:1])
        super().__init__(f"instantaneous dependency cycle: {cycle}", pos, filename)


class TranslationError(Scade2BError):
    pass


class BSyntaxError(TranslationError):
    """Malformed B text, e.g. an invariant pragma."""


class ConfigurationError(Scade2BError):
    pass


class RuntimeFault(Scade2BError):
    def __init__(self, kind: DiagnosticKind, message: str, index: int | None = None):
        super().__init__(message)
        self.kind = kind
        self.index = index

    def __str__(self) -> str:
        suffix = f" (iteration {self.index})" if self.index is not None else ""
        return f"{self.kind.value}: {self.message}{suffix}"


class ScadeRuntimeError(RuntimeFault):
    pass


class BRuntimeError(RuntimeFault):
    pass


class BInitialisationError(Scade2BError):
    pass

"""
Diagnostic records shared by every pass.

A Diagnostic is a plain pydantic record: the text renderer produces the
`file:line:col: error[CODE]: message` lines, the JSON renderer one record per
line for tooling.
"""

from __future__ import annotations

from enum import StrEnum

from pydantic import BaseModel, Field


class Kind(StrEnum):
    # ─── Front end ───
    SYNTAX_ERROR = "SyntaxError"
    TYPE_MISMATCH = "TypeMismatch"
    UNKNOWN_NAME = "UnknownName"
    NON_EXHAUSTIVE_MATCH = "NonExhaustiveMatch"
    ARITY_MISMATCH = "ArityMismatch"
    MUTABILITY_ERROR = "MutabilityError"
    MISSING_LIFETIME = "MissingLifetime"
    NOT_A_PLACE = "NotAPlace"
    MISSING_RETURN = "MissingReturn"
    INVALID_TYPE_DEFINITION = "InvalidTypeDefinition"

    # ─── Move check ───
    USE_AFTER_MOVE = "UseAfterMove"
    BORROW_AFTER_MOVE = "BorrowAfterMove"
    CANNOT_MOVE_OUT_OF_REFERENCE = "CannotMoveOutOfReference"
    USE_OF_UNINITIALIZED = "UseOfUninitialized"

    # ─── Borrow check ───
    MUTABLE_BORROW_WHILE_BORROWED = "MutableBorrowWhileBorrowed"
    USE_WHILE_MUTABLY_BORROWED = "UseWhileMutablyBorrowed"
    ASSIGN_WHILE_BORROWED = "AssignWhileBorrowed"
    MOVE_WHILE_BORROWED = "MoveWhileBorrowed"
    UNIVERSAL_REGION_VIOLATION = "UniversalRegionViolation"
    RETURN_LOCAL_REFERENCE = "ReturnLocalReference"
    STORAGE_DEAD_WHILE_BORROWED = "StorageDeadWhileBorrowed"


CODES: dict[Kind, str] = {
    Kind.SYNTAX_ERROR: "RL0001",
    Kind.TYPE_MISMATCH: "RL0002",
    Kind.UNKNOWN_NAME: "RL0003",
    Kind.NON_EXHAUSTIVE_MATCH: "RL0004",
    Kind.ARITY_MISMATCH: "RL0005",
    Kind.MUTABILITY_ERROR: "RL0006",
    Kind.MISSING_LIFETIME: "RL0007",
    Kind.NOT_A_PLACE: "RL0008",
    Kind.MISSING_RETURN: "RL0009",
    Kind.INVALID_TYPE_DEFINITION: "RL0010",
    Kind.USE_AFTER_MOVE: "RL0101",
    Kind.BORROW_AFTER_MOVE: "RL0102",
    Kind.CANNOT_MOVE_OUT_OF_REFERENCE: "RL0103",
    Kind.USE_OF_UNINITIALIZED: "RL0104",
    Kind.MUTABLE_BORROW_WHILE_BORROWED: "RL0201",
    Kind.USE_WHILE_MUTABLY_BORROWED: "RL0202",
    Kind.ASSIGN_WHILE_BORROWED: "RL0203",
    Kind.MOVE_WHILE_BORROWED: "RL0204",
    Kind.UNIVERSAL_REGION_VIOLATION: "RL0205",
    Kind.RETURN_LOCAL_REFERENCE: "RL0206",
    Kind.STORAGE_DEAD_WHILE_BORROWED: "RL0207",
}


class Span(BaseModel):
    """1-based source position."""

    line: int = 0
    col: int = 0

    model_config = {"frozen": True}


class Diagnostic(BaseModel):
    """One structured error emitted by any checking pass."""

    kind: Kind
    message: str
    span: Span = Field(default_factory=Span)
    function: str = ""             # enclosing function, "" for item-level errors
    function_index: int = 0        # declaration order, used for sorting
    node: int | None = None        # RustIR node for IR-level passes
    place: str = ""                # accessed place, rendered
    loan: int | None = None        # conflicting loan id

    model_config = {"frozen": True}

    @property
    def code(self) -> str:
        return CODES[self.kind]

    def sort_key(self) -> tuple[int, int, int, int, int, str]:
        return (
            self.function_index,
            -1 if self.node is None else self.node,
            -1 if self.loan is None else self.loan,
            self.span.line,
            self.span.col,
            self.code,
        )

    def render(self, filename: str) -> str:
        return f"{filename}:{self.span.line}:{self.span.col}: error[{self.code}]: {self.message}"

    def to_json(self, filename: str) -> str:
        record = self.model_dump(mode="json")
        record["code"] = self.code
        record["file"] = filename
        return DiagnosticRecord(**record).model_dump_json()


class DiagnosticRecord(BaseModel):
    """Machine-readable form written by `--diagnostics-format=json`."""

    file: str
    code: str
    kind: str
    message: str
    span: Span
    function: str
    node: int | None
    place: str
    loan: int | None


def make(kind: Kind, message: str, span: Span | None = None, **extra: object) -> Diagnostic:
    """Factory function to create a Diagnostic."""
    return Diagnostic(kind=kind, message=message, span=span or Span(), **extra)


def sort_diagnostics(diagnostics: list[Diagnostic]) -> list[Diagnostic]:
    return sorted(diagnostics, key=lambda d: d.sort_key())

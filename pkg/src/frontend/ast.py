"""
Rustlight abstract syntax tree.

Nodes are frozen dataclasses. Spans and expression ids never take part in
equality, so two parses of the same program compare equal regardless of
layout, which is what the printer round-trip relies on.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from src.core.diagnostics import Span
from src.frontend.types import RlType

_expr_ids = itertools.count(1)


def next_eid() -> int:
    return next(_expr_ids)


def _span() -> Span:
    return field(default_factory=Span, compare=False, repr=False)


def _eid() -> int:
    return field(default_factory=next_eid, compare=False, repr=False)


# ─── Expressions ───


@dataclass(frozen=True, slots=True)
class IntLit:
    value: int
    span: Span = _span()
    eid: int = _eid()


@dataclass(frozen=True, slots=True)
class BoolLit:
    value: bool
    span: Span = _span()
    eid: int = _eid()


@dataclass(frozen=True, slots=True)
class UnitLit:
    span: Span = _span()
    eid: int = _eid()


@dataclass(frozen=True, slots=True)
class Var:
    name: str
    span: Span = _span()
    eid: int = _eid()


@dataclass(frozen=True, slots=True)
class FieldAccess:
    base: Expr
    name: str
    span: Span = _span()
    eid: int = _eid()


@dataclass(frozen=True, slots=True)
class Deref:
    operand: Expr
    span: Span = _span()
    eid: int = _eid()


@dataclass(frozen=True, slots=True)
class Borrow:
    mutable: bool
    operand: Expr
    span: Span = _span()
    eid: int = _eid()


@dataclass(frozen=True, slots=True)
class BoxNew:
    operand: Expr
    span: Span = _span()
    eid: int = _eid()


@dataclass(frozen=True, slots=True)
class Binary:
    op: str
    lhs: Expr
    rhs: Expr
    span: Span = _span()
    eid: int = _eid()


@dataclass(frozen=True, slots=True)
class Unary:
    op: str  # "-" | "!"
    operand: Expr
    span: Span = _span()
    eid: int = _eid()


@dataclass(frozen=True, slots=True)
class Call:
    func: str
    args: tuple[Expr, ...]
    span: Span = _span()
    eid: int = _eid()


@dataclass(frozen=True, slots=True)
class StructLit:
    name: str
    fields: tuple[tuple[str, Expr], ...]
    span: Span = _span()
    eid: int = _eid()


@dataclass(frozen=True, slots=True)
class EnumLit:
    enum: str
    variant: str
    args: tuple[Expr, ...]
    span: Span = _span()
    eid: int = _eid()


Expr = (
    IntLit | BoolLit | UnitLit | Var | FieldAccess | Deref | Borrow | BoxNew
    | Binary | Unary | Call | StructLit | EnumLit
)

PLACE_EXPRS = (Var, FieldAccess, Deref)


def is_place_expr(expr: Expr) -> bool:
    if isinstance(expr, Var):
        return True
    if isinstance(expr, FieldAccess):
        return is_place_expr(expr.base)
    if isinstance(expr, Deref):
        return True  # `*e` names memory even when e is a temporary
    return False


# ─── Statements ───


@dataclass(frozen=True, slots=True)
class Block:
    stmts: tuple[Stmt, ...]
    tail: Expr | None = None
    span: Span = _span()


@dataclass(frozen=True, slots=True)
class Let:
    name: str
    mutable: bool
    ty: RlType | None
    init: Expr | None
    span: Span = _span()


@dataclass(frozen=True, slots=True)
class Assign:
    target: Expr
    value: Expr
    span: Span = _span()


@dataclass(frozen=True, slots=True)
class ExprStmt:
    expr: Expr
    span: Span = _span()


@dataclass(frozen=True, slots=True)
class If:
    cond: Expr
    then: Block
    orelse: Block | None = None
    span: Span = _span()


@dataclass(frozen=True, slots=True)
class While:
    cond: Expr
    body: Block
    span: Span = _span()


@dataclass(frozen=True, slots=True)
class Binding:
    """One sub-pattern of a variant pattern; name None is `_`."""

    name: str | None
    by_ref: bool = False
    mutable: bool = False


@dataclass(frozen=True, slots=True)
class Arm:
    enum: str | None          # None for the `_` arm
    variant: str | None
    bindings: tuple[Binding, ...]
    body: Block
    span: Span = _span()

    @property
    def is_wildcard(self) -> bool:
        return self.variant is None


@dataclass(frozen=True, slots=True)
class Match:
    scrutinee: Expr
    arms: tuple[Arm, ...]
    span: Span = _span()


@dataclass(frozen=True, slots=True)
class Return:
    value: Expr | None
    span: Span = _span()


@dataclass(frozen=True, slots=True)
class BlockStmt:
    block: Block
    span: Span = _span()


Stmt = Let | Assign | ExprStmt | If | While | Match | Return | BlockStmt


# ─── Items ───


@dataclass(frozen=True, slots=True)
class StructDecl:
    name: str
    fields: tuple[tuple[str, RlType], ...]
    span: Span = _span()


@dataclass(frozen=True, slots=True)
class VariantDecl:
    name: str
    payload: tuple[RlType, ...]


@dataclass(frozen=True, slots=True)
class EnumDecl:
    name: str
    variants: tuple[VariantDecl, ...]
    span: Span = _span()


@dataclass(frozen=True, slots=True)
class LifetimeParam:
    name: str
    outlives: tuple[str, ...] = ()


@dataclass(frozen=True, slots=True)
class Param:
    name: str
    mutable: bool
    ty: RlType


@dataclass(frozen=True, slots=True)
class FnDecl:
    name: str
    lifetimes: tuple[LifetimeParam, ...]
    params: tuple[Param, ...]
    ret: RlType
    body: Block
    span: Span = _span()


Item = StructDecl | EnumDecl | FnDecl


@dataclass(frozen=True, slots=True)
class RlModule:
    items: tuple[Item, ...]

    @property
    def functions(self) -> list[FnDecl]:
        return [i for i in self.items if isinstance(i, FnDecl)]

    @property
    def structs(self) -> list[StructDecl]:
        return [i for i in self.items if isinstance(i, StructDecl)]

    @property
    def enums(self) -> list[EnumDecl]:
        return [i for i in self.items if isinstance(i, EnumDecl)]

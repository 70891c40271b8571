"""
Rustlight type checker.

Resolves names, checks every expression against the Rustlight typing rules and
records the (region-erased) type of each expression by expression id. Beyond
plain typing it enforces binding mutability, ADT well-formedness, signature
lifetimes with the first elision rule, match exhaustiveness and that non-unit
functions return on every path.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from src.core.diagnostics import Diagnostic, Kind, Span, make
from src.core.errors import CompileError
from src.core.log import get_logger
from src.frontend import ast
from src.frontend.types import (
    BOOL,
    I32,
    UNIT,
    AdtTy,
    BoolTy,
    BoxTy,
    I32Ty,
    RefTy,
    RlType,
    UnitTy,
    coercible,
    erase_regions,
    map_regions,
)

logger = get_logger("typecheck")

I32_LITERAL_LIMIT = 2**31

ARITH_OPS = {"+", "-", "*", "/", "%"}
ORDER_OPS = {"<", "<=", ">", ">="}
EQ_OPS = {"==", "!="}
LOGIC_OPS = {"&&", "||"}


@dataclass(frozen=True)
class FnSig:
    """A function signature with every lifetime named (elided ones get fresh names)."""

    name: str
    lifetimes: tuple[str, ...]
    outlives: tuple[tuple[str, str], ...]  # ('a, 'b) means 'a: 'b
    params: tuple[RlType, ...]
    ret: RlType
    index: int


@dataclass
class TypedModule:
    module: ast.RlModule
    structs: dict[str, ast.StructDecl]
    enums: dict[str, ast.EnumDecl]
    signatures: dict[str, FnSig]
    expr_types: dict[int, RlType] = field(default_factory=dict)
    # FieldAccess eid -> (automatic derefs applied to the base, field index)
    field_access: dict[int, tuple[int, int]] = field(default_factory=dict)

    def type_of(self, expr: ast.Expr) -> RlType:
        return self.expr_types[expr.eid]

    def struct_field(self, name: str, fname: str) -> tuple[int, RlType] | None:
        decl = self.structs.get(name)
        if decl is None:
            return None
        for i, (n, ty) in enumerate(decl.fields):
            if n == fname:
                return i, ty
        return None

    def variant_index(self, enum: str, variant: str) -> int | None:
        decl = self.enums.get(enum)
        if decl is None:
            return None
        for i, v in enumerate(decl.variants):
            if v.name == variant:
                return i
        return None


@dataclass
class _Local:
    ty: RlType
    mutable: bool
    deferred: bool = False


class _Checker:
    def __init__(self, module: ast.RlModule) -> None:
        self.module = module
        self.diags: list[Diagnostic] = []
        self.tm = TypedModule(module=module, structs={}, enums={}, signatures={})
        self.scopes: list[dict[str, _Local]] = []
        self.current: FnSig | None = None
        self.fn_index = 0
        # literals written as the operand of unary minus may reach 2^31
        self.negated_literals: set[int] = set()

    # ─── Helpers ───

    def error(self, kind: Kind, message: str, span: Span) -> None:
        fn = self.current.name if self.current else ""
        self.diags.append(
            make(kind, message, span, function=fn, function_index=self.fn_index)
        )

    def lookup(self, name: str) -> _Local | None:
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        return None

    def check_type(self, ty: RlType, span: Span, lifetimes: set[str] | None) -> bool:
        """Validate ADT names and lifetime names; lifetimes None means a body type."""
        if isinstance(ty, AdtTy):
            if ty.name not in self.tm.structs and ty.name not in self.tm.enums:
                self.error(Kind.UNKNOWN_NAME, f"cannot find type `{ty.name}`", span)
                return False
            return True
        if isinstance(ty, BoxTy):
            return self.check_type(ty.inner, span, lifetimes)
        if isinstance(ty, RefTy):
            if ty.region is not None:
                if lifetimes is None:
                    self.error(
                        Kind.MISSING_LIFETIME,
                        f"named lifetime `'{ty.region}` is only allowed in signatures",
                        span,
                    )
                    return False
                if ty.region not in lifetimes:
                    self.error(
                        Kind.UNKNOWN_NAME, f"use of undeclared lifetime `'{ty.region}`", span
                    )
                    return False
            return self.check_type(ty.inner, span, lifetimes)
        return True

    # ─── Items ───

    def collect_items(self) -> None:
        seen: set[str] = set()
        for item in self.module.items:
            if item.name in seen:
                self.error(
                    Kind.INVALID_TYPE_DEFINITION, f"`{item.name}` is defined twice", item.span
                )
                continue
            seen.add(item.name)
            if isinstance(item, ast.StructDecl):
                self.tm.structs[item.name] = item
            elif isinstance(item, ast.EnumDecl):
                self.tm.enums[item.name] = item

        for decl in [*self.tm.structs.values(), *self.tm.enums.values()]:
            for ty in _adt_field_types(decl):
                if _mentions_ref(ty):
                    self.error(
                        Kind.INVALID_TYPE_DEFINITION,
                        f"`{decl.name}` may not contain references",
                        decl.span,
                    )
                self.check_type(ty, decl.span, None)
            if self._contains_by_value(decl.name, decl.name, set()):
                self.error(
                    Kind.INVALID_TYPE_DEFINITION,
                    f"recursive type `{decl.name}` has infinite size (use Box)",
                    decl.span,
                )

        index = 0
        for item in self.module.items:
            if isinstance(item, ast.FnDecl) and item.name not in self.tm.signatures:
                sig = self.signature(item, index)
                if sig is not None:
                    self.tm.signatures[item.name] = sig
                index += 1

    def _contains_by_value(self, root: str, name: str, visiting: set[str]) -> bool:
        decl = self.tm.structs.get(name) or self.tm.enums.get(name)
        if decl is None or name in visiting:
            return False
        visiting = visiting | {name}
        for ty in _adt_field_types(decl):
            if isinstance(ty, AdtTy):
                if ty.name == root or self._contains_by_value(root, ty.name, visiting):
                    return True
        return False

    def signature(self, fn: ast.FnDecl, index: int) -> FnSig | None:
        declared = {lt.name for lt in fn.lifetimes}
        ok = True
        outlives: list[tuple[str, str]] = []
        for lt in fn.lifetimes:
            for longer_than in lt.outlives:
                if longer_than not in declared:
                    self.error(
                        Kind.UNKNOWN_NAME, f"use of undeclared lifetime `'{longer_than}`", fn.span
                    )
                    ok = False
                outlives.append((lt.name, longer_than))

        counter = iter(range(10_000))
        anon: list[str] = []

        def fresh(region: str | int | None) -> str | int | None:
            if region is not None:
                return region
            name = f"_{next(counter)}"
            anon.append(name)
            return name

        params = []
        for p in fn.params:
            ok &= self.check_type(p.ty, fn.span, declared)
            params.append(map_regions(p.ty, fresh))

        input_lifetimes = [r for ty in params for r in _region_names(ty)]
        ok &= self.check_type(fn.ret, fn.span, declared)
        ret = fn.ret
        if _has_elided(ret):
            if len(input_lifetimes) == 1:
                ret = map_regions(ret, lambda r: input_lifetimes[0] if r is None else r)
            elif not input_lifetimes:
                ret = map_regions(ret, lambda r: "_ret" if r is None else r)
                if "_ret" not in anon:
                    anon.append("_ret")
            else:
                self.error(
                    Kind.MISSING_LIFETIME,
                    f"missing lifetime specifier in the return type of `{fn.name}`",
                    fn.span,
                )
                ok = False
        if not ok:
            return None
        return FnSig(
            name=fn.name,
            lifetimes=tuple([lt.name for lt in fn.lifetimes] + anon),
            outlives=tuple(outlives),
            params=tuple(params),
            ret=ret,
            index=index,
        )

    # ─── Functions ───

    def check_function(self, fn: ast.FnDecl) -> None:
        sig = self.tm.signatures.get(fn.name)
        if sig is None or self.tm.module.functions[sig.index] is not fn:
            return
        self.current = sig
        self.fn_index = sig.index
        self.scopes = [{}]
        for p, ty in zip(fn.params, sig.params):
            self.scopes[0][p.name] = _Local(ty=erase_regions(ty), mutable=p.mutable)
        ret = erase_regions(sig.ret)

        self.block(fn.body, new_scope=True)
        if fn.body.tail is not None:
            tail_ty = self.tm.expr_types.get(fn.body.tail.eid)
            if tail_ty is not None and not coercible(tail_ty, ret):
                self.error(
                    Kind.TYPE_MISMATCH,
                    f"expected `{ret}`, found `{tail_ty}`",
                    fn.body.tail.span,
                )
        elif not isinstance(ret, UnitTy) and not _diverges(fn.body):
            self.error(
                Kind.MISSING_RETURN,
                f"function `{fn.name}` may finish without returning a `{ret}`",
                fn.span,
            )
        self.current = None

    def block(self, block: ast.Block, new_scope: bool = True) -> None:
        if new_scope:
            self.scopes.append({})
        for stmt in block.stmts:
            self.stmt(stmt)
        if block.tail is not None:
            self.expr(block.tail)
        if new_scope:
            self.scopes.pop()

    def stmt(self, stmt: ast.Stmt) -> None:
        match stmt:
            case ast.Let():
                self.let(stmt)
            case ast.Assign(target=target, value=value):
                value_ty = self.expr(value)
                if not ast.is_place_expr(target):
                    self.error(Kind.NOT_A_PLACE, "invalid left-hand side of assignment", stmt.span)
                    return
                target_ty = self.expr(target)
                if target_ty is not None and value_ty is not None and not coercible(value_ty, target_ty):
                    self.error(
                        Kind.TYPE_MISMATCH, f"expected `{target_ty}`, found `{value_ty}`", stmt.span
                    )
                if self.place_mutable(target, assigning=True) is False:
                    self.error(
                        Kind.MUTABILITY_ERROR, "cannot assign to an immutable place", stmt.span
                    )
            case ast.ExprStmt(expr=e):
                self.expr(e)
            case ast.If(cond=c, then=then, orelse=orelse):
                self.expect(c, BOOL)
                self.block(then)
                if orelse is not None:
                    self.block(orelse)
            case ast.While(cond=c, body=body):
                self.expect(c, BOOL)
                self.block(body)
            case ast.Match():
                self.match(stmt)
            case ast.Return(value=v):
                assert self.current is not None
                ret = erase_regions(self.current.ret)
                if v is None:
                    if not isinstance(ret, UnitTy):
                        self.error(Kind.TYPE_MISMATCH, f"expected `{ret}`, found `()`", stmt.span)
                else:
                    ty = self.expr(v)
                    if ty is not None and not coercible(ty, ret):
                        self.error(Kind.TYPE_MISMATCH, f"expected `{ret}`, found `{ty}`", v.span)
            case ast.BlockStmt(block=b):
                self.block(b)

    def let(self, stmt: ast.Let) -> None:
        declared: RlType | None = None
        if stmt.ty is not None and self.check_type(stmt.ty, stmt.span, None):
            declared = stmt.ty
        init_ty = self.expr(stmt.init) if stmt.init is not None else None
        if declared is not None and init_ty is not None and not coercible(init_ty, declared):
            self.error(
                Kind.TYPE_MISMATCH, f"expected `{declared}`, found `{init_ty}`", stmt.init.span
            )
        ty = declared or init_ty
        if ty is None:
            if stmt.ty is None and stmt.init is None:
                self.error(Kind.TYPE_MISMATCH, f"type annotations needed for `{stmt.name}`", stmt.span)
            ty = UNIT
        self.scopes[-1][stmt.name] = _Local(
            ty=ty, mutable=stmt.mutable, deferred=stmt.init is None
        )

    def match(self, stmt: ast.Match) -> None:
        scrut_ty = self.expr(stmt.scrutinee)
        if scrut_ty is None:
            return
        if not isinstance(scrut_ty, AdtTy) or scrut_ty.name not in self.tm.enums:
            self.error(Kind.TYPE_MISMATCH, f"cannot match on `{scrut_ty}`", stmt.scrutinee.span)
            return
        enum = self.tm.enums[scrut_ty.name]
        covered: set[str] = set()
        wildcard = False
        for arm in stmt.arms:
            self.scopes.append({})
            if arm.is_wildcard:
                wildcard = True
            elif arm.enum != enum.name:
                self.error(
                    Kind.TYPE_MISMATCH, f"expected a `{enum.name}` pattern, found `{arm.enum}`", arm.span
                )
            else:
                idx = self.tm.variant_index(enum.name, arm.variant)
                if idx is None:
                    self.error(
                        Kind.UNKNOWN_NAME, f"no variant `{arm.variant}` in `{enum.name}`", arm.span
                    )
                else:
                    covered.add(arm.variant)
                    self.bind_arm(stmt, arm, enum.variants[idx])
            self.block(arm.body, new_scope=False)
            self.scopes.pop()
        missing = [v.name for v in enum.variants if v.name not in covered]
        if missing and not wildcard:
            self.error(
                Kind.NON_EXHAUSTIVE_MATCH,
                f"non-exhaustive patterns: {', '.join(f'{enum.name}::{m}' for m in missing)} not covered",
                stmt.span,
            )

    def bind_arm(self, stmt: ast.Match, arm: ast.Arm, variant: ast.VariantDecl) -> None:
        if arm.bindings and len(arm.bindings) != len(variant.payload):
            self.error(
                Kind.ARITY_MISMATCH,
                f"`{arm.enum}::{arm.variant}` has {len(variant.payload)} fields, "
                f"pattern has {len(arm.bindings)}",
                arm.span,
            )
            return
        if not arm.bindings and variant.payload:
            self.error(
                Kind.ARITY_MISMATCH,
                f"`{arm.enum}::{arm.variant}` has {len(variant.payload)} fields, pattern has 0",
                arm.span,
            )
            return
        for binding, ty in zip(arm.bindings, variant.payload):
            if binding.name is None:
                continue
            if binding.by_ref:
                if binding.mutable and self.place_mutable(stmt.scrutinee) is False:
                    self.error(
                        Kind.MUTABILITY_ERROR,
                        "cannot borrow an immutable place as mutable",
                        arm.span,
                    )
                self.scopes[-1][binding.name] = _Local(
                    ty=RefTy(None, binding.mutable, ty), mutable=False
                )
            else:
                self.scopes[-1][binding.name] = _Local(ty=ty, mutable=binding.mutable)

    # ─── Expressions ───

    def expect(self, expr: ast.Expr, ty: RlType) -> None:
        actual = self.expr(expr)
        if actual is not None and not coercible(actual, ty):
            self.error(Kind.TYPE_MISMATCH, f"expected `{ty}`, found `{actual}`", expr.span)

    def expr(self, expr: ast.Expr) -> RlType | None:
        ty = self._expr(expr)
        if ty is not None:
            self.tm.expr_types[expr.eid] = erase_regions(ty)
        return ty

    def _expr(self, expr: ast.Expr) -> RlType | None:
        match expr:
            case ast.IntLit(value=v):
                limit = I32_LITERAL_LIMIT if expr.eid in self.negated_literals else I32_LITERAL_LIMIT - 1
                if v > limit:
                    self.error(Kind.TYPE_MISMATCH, f"literal `{v}` out of range for `i32`", expr.span)
                return I32
            case ast.BoolLit():
                return BOOL
            case ast.UnitLit():
                return UNIT
            case ast.Var(name=n):
                local = self.lookup(n)
                if local is None:
                    self.error(Kind.UNKNOWN_NAME, f"cannot find value `{n}` in this scope", expr.span)
                    return None
                return local.ty
            case ast.FieldAccess():
                return self.field_access(expr)
            case ast.Deref(operand=o):
                ty = self.expr(o)
                if ty is None:
                    return None
                if isinstance(ty, (BoxTy, RefTy)):
                    return ty.inner
                self.error(Kind.TYPE_MISMATCH, f"type `{ty}` cannot be dereferenced", expr.span)
                return None
            case ast.Borrow(mutable=m, operand=o):
                if not ast.is_place_expr(o):
                    self.error(Kind.NOT_A_PLACE, "can only borrow a place expression", expr.span)
                    return None
                ty = self.expr(o)
                if ty is None:
                    return None
                if m and self.place_mutable(o) is False:
                    self.error(
                        Kind.MUTABILITY_ERROR, "cannot borrow an immutable place as mutable", expr.span
                    )
                return RefTy(None, m, ty)
            case ast.BoxNew(operand=o):
                ty = self.expr(o)
                return BoxTy(ty) if ty is not None else None
            case ast.Binary():
                return self.binary(expr)
            case ast.Unary(op=op, operand=o):
                if op == "-" and isinstance(o, ast.IntLit):
                    self.negated_literals.add(o.eid)
                want = I32 if op == "-" else BOOL
                self.expect(o, want)
                return want
            case ast.Call():
                return self.call(expr)
            case ast.StructLit():
                return self.struct_lit(expr)
            case ast.EnumLit():
                return self.enum_lit(expr)
        raise TypeError(f"unknown expression {expr!r}")

    def field_access(self, expr: ast.FieldAccess) -> RlType | None:
        base_ty = self.expr(expr.base)
        if base_ty is None:
            return None
        derefs = 0
        ty = base_ty
        while isinstance(ty, (BoxTy, RefTy)):
            ty = ty.inner
            derefs += 1
        if isinstance(ty, AdtTy):
            found = self.tm.struct_field(ty.name, expr.name)
            if found is not None:
                index, field_ty = found
                self.tm.field_access[expr.eid] = (derefs, index)
                return field_ty
        self.error(Kind.UNKNOWN_NAME, f"no field `{expr.name}` on type `{base_ty}`", expr.span)
        return None

    def binary(self, expr: ast.Binary) -> RlType | None:
        lhs = self.expr(expr.lhs)
        rhs = self.expr(expr.rhs)
        if lhs is None or rhs is None:
            return None
        op = expr.op
        if op in ARITH_OPS or op in ORDER_OPS:
            if not (isinstance(lhs, I32Ty) and isinstance(rhs, I32Ty)):
                self.error(
                    Kind.TYPE_MISMATCH, f"cannot apply `{op}` to `{lhs}` and `{rhs}`", expr.span
                )
            return I32 if op in ARITH_OPS else BOOL
        if op in EQ_OPS:
            if lhs != rhs or not isinstance(lhs, (I32Ty, BoolTy, UnitTy)):
                self.error(
                    Kind.TYPE_MISMATCH, f"cannot compare `{lhs}` with `{rhs}`", expr.span
                )
            return BOOL
        if not (isinstance(lhs, BoolTy) and isinstance(rhs, BoolTy)):
            self.error(Kind.TYPE_MISMATCH, f"cannot apply `{op}` to `{lhs}` and `{rhs}`", expr.span)
        return BOOL

    def call(self, expr: ast.Call) -> RlType | None:
        sig = self.tm.signatures.get(expr.func)
        arg_types = [self.expr(a) for a in expr.args]
        if sig is None:
            self.error(Kind.UNKNOWN_NAME, f"cannot find function `{expr.func}`", expr.span)
            return None
        if len(expr.args) != len(sig.params):
            self.error(
                Kind.ARITY_MISMATCH,
                f"`{expr.func}` takes {len(sig.params)} arguments but {len(expr.args)} were supplied",
                expr.span,
            )
            return erase_regions(sig.ret)
        for arg, actual, param in zip(expr.args, arg_types, sig.params):
            if actual is not None and not coercible(actual, erase_regions(param)):
                self.error(
                    Kind.TYPE_MISMATCH, f"expected `{erase_regions(param)}`, found `{actual}`", arg.span
                )
        return erase_regions(sig.ret)

    def struct_lit(self, expr: ast.StructLit) -> RlType | None:
        decl = self.tm.structs.get(expr.name)
        for _, value in expr.fields:
            self.expr(value)
        if decl is None:
            self.error(Kind.UNKNOWN_NAME, f"cannot find struct `{expr.name}`", expr.span)
            return None
        given = [n for n, _ in expr.fields]
        wanted = [n for n, _ in decl.fields]
        if sorted(given) != sorted(wanted) or len(set(given)) != len(given):
            self.error(
                Kind.ARITY_MISMATCH,
                f"struct `{expr.name}` expects fields {wanted}, got {given}",
                expr.span,
            )
            return AdtTy(expr.name)
        types = dict(decl.fields)
        for name, value in expr.fields:
            actual = self.tm.expr_types.get(value.eid)
            if actual is not None and not coercible(actual, types[name]):
                self.error(
                    Kind.TYPE_MISMATCH, f"expected `{types[name]}`, found `{actual}`", value.span
                )
        return AdtTy(expr.name)

    def enum_lit(self, expr: ast.EnumLit) -> RlType | None:
        arg_types = [self.expr(a) for a in expr.args]
        if expr.enum not in self.tm.enums:
            self.error(Kind.UNKNOWN_NAME, f"cannot find enum `{expr.enum}`", expr.span)
            return None
        idx = self.tm.variant_index(expr.enum, expr.variant)
        if idx is None:
            self.error(Kind.UNKNOWN_NAME, f"no variant `{expr.variant}` in `{expr.enum}`", expr.span)
            return None
        payload = self.tm.enums[expr.enum].variants[idx].payload
        if len(payload) != len(expr.args):
            self.error(
                Kind.ARITY_MISMATCH,
                f"`{expr.enum}::{expr.variant}` takes {len(payload)} fields but {len(expr.args)} were supplied",
                expr.span,
            )
            return AdtTy(expr.enum)
        for arg, actual, want in zip(expr.args, arg_types, payload):
            if actual is not None and not coercible(actual, want):
                self.error(Kind.TYPE_MISMATCH, f"expected `{want}`, found `{actual}`", arg.span)
        return AdtTy(expr.enum)

    # ─── Mutability ───

    def place_mutable(self, expr: ast.Expr, assigning: bool = False) -> bool | None:
        """Whether the place may be written; None when unknown (already reported)."""
        match expr:
            case ast.Var(name=n):
                local = self.lookup(n)
                if local is None:
                    return None
                return local.mutable or (assigning and local.deferred)
            case ast.FieldAccess(base=base):
                steps = self.tm.field_access.get(expr.eid)
                if steps is None:
                    return None
                ty = self.tm.expr_types.get(base.eid)
                for _ in range(steps[0]):
                    if isinstance(ty, RefTy):
                        return ty.mutable
                    ty = ty.inner if isinstance(ty, BoxTy) else ty
                return self.place_mutable(base) if ast.is_place_expr(base) else True
            case ast.Deref(operand=o):
                ty = self.tm.expr_types.get(o.eid)
                if isinstance(ty, RefTy):
                    return ty.mutable
                if isinstance(ty, BoxTy):
                    return self.place_mutable(o) if ast.is_place_expr(o) else True
                return None
        return True


def _adt_field_types(decl: ast.StructDecl | ast.EnumDecl) -> list[RlType]:
    if isinstance(decl, ast.StructDecl):
        return [ty for _, ty in decl.fields]
    return [ty for v in decl.variants for ty in v.payload]


def _mentions_ref(ty: RlType) -> bool:
    if isinstance(ty, RefTy):
        return True
    if isinstance(ty, BoxTy):
        return _mentions_ref(ty.inner)
    return False


def _has_elided(ty: RlType) -> bool:
    if isinstance(ty, RefTy):
        return ty.region is None or _has_elided(ty.inner)
    if isinstance(ty, BoxTy):
        return _has_elided(ty.inner)
    return False


def _region_names(ty: RlType) -> list[str]:
    if isinstance(ty, RefTy):
        return [ty.region, *_region_names(ty.inner)]
    if isinstance(ty, BoxTy):
        return _region_names(ty.inner)
    return []


def _diverges(block: ast.Block) -> bool:
    for stmt in block.stmts:
        if _stmt_diverges(stmt):
            return True
    return False


def _stmt_diverges(stmt: ast.Stmt) -> bool:
    match stmt:
        case ast.Return():
            return True
        case ast.If(then=then, orelse=orelse):
            return orelse is not None and _diverges(then) and _diverges(orelse)
        case ast.Match(arms=arms):
            return bool(arms) and all(_diverges(a.body) for a in arms)
        case ast.BlockStmt(block=b):
            return _diverges(b)
    return False


def typecheck(module: ast.RlModule) -> TypedModule:
    """Type-check a parsed module; raises CompileError when diagnostics exist."""
    checker = _Checker(module)
    checker.collect_items()
    for fn in module.functions:
        checker.check_function(fn)
    if checker.diags:
        raise CompileError(checker.diags)
    logger.debug("typechecked", functions=len(checker.tm.signatures))
    return checker.tm

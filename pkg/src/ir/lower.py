"""
Lowering from the typed AST to RustIR.

Expressions are flattened into three-address form with temporaries, evaluated
left to right. Every reference type occurrence in a body local gets a fresh
existential region, every `&`/`&mut` rvalue gets its own region and every call
instantiates the callee's universal regions with fresh caller regions.

Nodes are allocated as holes and filled once their successors are known, so
branch targets can be patched after both arms are built. Unreachable holes are
pruned at the end and the survivors renumbered in creation order.
"""

from __future__ import annotations

from collections.abc import Callable

from src.core.diagnostics import Span
from src.core.errors import InternalCompilerError
from src.core.log import get_logger
from src.frontend import ast
from src.frontend.typecheck import FnSig, TypedModule
from src.frontend.types import (
    BOOL,
    I32,
    UNIT,
    AdtTy,
    BoxTy,
    RefTy,
    RlType,
    is_copy,
    map_regions,
)
from src.ir import rustir as ir

logger = get_logger("lower")

COMPARISONS = {"==", "!=", "<", "<=", ">", ">="}


def build_adt_table(tm: TypedModule) -> ir.AdtTable:
    table = ir.AdtTable()
    for name, decl in tm.structs.items():
        table.structs[name] = tuple(ty for _, ty in decl.fields)
        table.struct_field_names[name] = tuple(n for n, _ in decl.fields)
    for name, decl in tm.enums.items():
        table.enums[name] = tuple(v.payload for v in decl.variants)
        table.variant_names[name] = tuple(v.name for v in decl.variants)
    return table


class FunctionLowerer:
    def __init__(self, tm: TypedModule, adts: ir.AdtTable, fn: ast.FnDecl, sig: FnSig) -> None:
        self.tm = tm
        self.adts = adts
        self.fn = fn
        self.sig = sig
        self.nodes: dict[int, ir.Instr | None] = {}
        self.cur: int | None = None
        self.locals: list[ir.LocalDecl] = []
        self.regions: list[ir.RegionDecl] = []
        self.scopes: list[list[int]] = []
        self.names: list[dict[str, int]] = []
        self.stmt_temps: list[int] = []
        self.outer_temps: list[list[int]] = []
        self.span = fn.span

    # ─── Node allocation ───

    def alloc(self) -> int:
        node = len(self.nodes)
        self.nodes[node] = None
        return node

    def ensure(self) -> int:
        """The current hole; after a terminator, a fresh (unreachable) one."""
        if self.cur is None:
            self.cur = self.alloc()
        return self.cur

    def emit(self, make: Callable[[int], ir.Instr]) -> None:
        slot = self.ensure()
        nxt = self.alloc()
        self.nodes[slot] = make(nxt)
        self.cur = nxt

    def fill(self, slot: int, instr: ir.Instr) -> None:
        self.nodes[slot] = instr

    def terminate(self, instr: ir.Instr) -> None:
        self.fill(self.ensure(), instr)
        self.cur = None

    def goto_from(self, ends: list[int | None], target: int) -> None:
        for end in ends:
            if end is not None:
                self.fill(end, ir.Goto(target, span=self.span))

    # ─── Locals and regions ───

    def fresh_region(self) -> int:
        region = len(self.regions)
        self.regions.append(ir.RegionDecl(region, ir.RegionKind.EXISTENTIAL))
        return region

    def instantiate(self, ty: RlType) -> RlType:
        return map_regions(ty, lambda _: self.fresh_region())

    def new_local(self, name: str, ty: RlType, mutable: bool, kind: ir.LocalKind) -> int:
        self.locals.append(ir.LocalDecl(name=name, ty=ty, mutable=mutable, kind=kind))
        return len(self.locals) - 1

    def temp(self, ty: RlType) -> int:
        return self.new_local(f"tmp{len(self.locals)}", ty, True, ir.LocalKind.TEMP)

    def declare(self, name: str, local: int) -> None:
        self.scopes[-1].append(local)
        self.names[-1][name] = local

    def lookup(self, name: str) -> int:
        for names in reversed(self.names):
            if name in names:
                return names[name]
        raise InternalCompilerError(f"unresolved name {name} after typecheck")

    def place_type(self, place: ir.Place) -> RlType:
        return self.adts.place_type(self.locals[place.local].ty, place.projections)

    def operand_type(self, op: ir.Operand) -> RlType:
        if isinstance(op, ir.Const):
            return op.ty
        return self.place_type(op.place)

    def rvalue_type(self, rv: ir.Rvalue) -> RlType:
        match rv:
            case ir.Use(operand=o):
                return self.operand_type(o)
            case ir.Ref(region=r, mutable=m, place=p):
                return RefTy(r, m, self.place_type(p))
            case ir.BinaryOp(op=op):
                return BOOL if op in COMPARISONS else I32
            case ir.UnaryOp(op=op):
                return I32 if op == "-" else BOOL
            case ir.BoxNew(operand=o):
                return BoxTy(self.operand_type(o))
            case ir.Aggregate(adt=name):
                return AdtTy(name)
        raise InternalCompilerError(f"unknown rvalue {rv!r}")

    def read(self, place: ir.Place) -> ir.Operand:
        return ir.Copy(place) if is_copy(self.place_type(place)) else ir.Move(place)

    # ─── Scopes ───

    def push_scope(self) -> None:
        self.scopes.append([])
        self.names.append({})
        self.outer_temps.append(self.stmt_temps)
        self.stmt_temps = []

    def exit_scope(self, locals_: list[int]) -> None:
        """Drop markers and StorageDead for a scope, in reverse declaration order."""
        for local in reversed(locals_):
            decl = self.locals[local]
            if not isinstance(decl.ty, RefTy):
                self.emit(lambda n, local=local: ir.Drop(ir.Place(local), n, span=self.span))
            if decl.kind is not ir.LocalKind.PARAM:
                self.emit(lambda n, local=local: ir.StorageDead(local, n, span=self.span))

    def pop_scope(self) -> None:
        locals_ = self.scopes.pop()
        self.names.pop()
        if self.cur is not None:
            self.exit_scope(locals_)
        self.stmt_temps = self.outer_temps.pop()

    def drop_temps(self, temps: list[int]) -> None:
        if self.cur is None:
            return
        for local in reversed(temps):
            if not isinstance(self.locals[local].ty, RefTy):
                self.emit(lambda n, local=local: ir.Drop(ir.Place(local), n, span=self.span))
            self.emit(lambda n, local=local: ir.StorageDead(local, n, span=self.span))

    def drop_stmt_temps(self) -> None:
        """Temporaries of the finished statement die at its end."""
        temps, self.stmt_temps = self.stmt_temps, []
        self.drop_temps(temps)

    def settle(self, cond: ir.Operand) -> ir.Operand:
        """Copy a condition out of statement temporaries so they can die before the branch."""
        if self.stmt_temps and not isinstance(cond, ir.Const):
            c = self.temp(BOOL)
            self.emit(lambda n: ir.Assign(ir.Place(c), ir.Use(cond), n, span=self.span))
            cond = ir.Copy(ir.Place(c))
        self.drop_stmt_temps()
        return cond

    # ─── Entry ───

    def lower(self) -> ir.RirFunction:
        universal = {}
        for name in self.sig.lifetimes:
            universal[name] = len(self.regions)
            self.regions.append(ir.RegionDecl(len(self.regions), ir.RegionKind.UNIVERSAL, name))

        self.new_local("ret", map_regions(self.sig.ret, universal.__getitem__), True, ir.LocalKind.RETURN)
        self.push_scope()
        for param, ty in zip(self.fn.params, self.sig.params):
            local = self.new_local(
                param.name, map_regions(ty, universal.__getitem__), param.mutable, ir.LocalKind.PARAM
            )
            self.declare(param.name, local)

        self.ensure()
        body = self.fn.body
        self.push_scope()
        for stmt in body.stmts:
            self.stmt(stmt)
        if body.tail is not None and self.cur is not None:
            self.span = body.tail.span
            self.lower_into(ir.Place(0), body.tail)
            self.drop_stmt_temps()
        self.span = self.fn.span
        self.pop_scope()
        self.pop_scope()
        if self.cur is not None:
            self.terminate(ir.Return(span=self.fn.span))

        outlives = tuple(
            (universal[a], universal[b]) for a, b in self.sig.outlives
        )
        nodes = self.prune()
        fn = ir.RirFunction(
            name=self.fn.name,
            locals=self.locals,
            param_count=len(self.fn.params),
            nodes=nodes,
            regions=self.regions,
            outlives=outlives,
            index=self.sig.index,
            span=self.fn.span,
        )
        ir.validate(fn)
        return fn

    def prune(self) -> dict[int, ir.Instr]:
        reachable: set[int] = set()
        stack = [0]
        while stack:
            node = stack.pop()
            if node in reachable:
                continue
            reachable.add(node)
            instr = self.nodes[node]
            if instr is None:
                raise InternalCompilerError(f"{self.fn.name}: unfilled reachable node {node}")
            stack.extend(ir.successors(instr))
        mapping = {old: new for new, old in enumerate(sorted(reachable))}
        return {
            mapping[old]: ir.retarget(self.nodes[old], mapping)  # type: ignore[arg-type]
            for old in sorted(reachable)
        }

    # ─── Statements ───

    def block(self, block: ast.Block) -> None:
        self.push_scope()
        for stmt in block.stmts:
            self.stmt(stmt)
        if block.tail is not None:
            self.expr_stmt(block.tail, block.tail.span)
        self.pop_scope()

    def stmt(self, stmt: ast.Stmt) -> None:
        self.span = stmt.span
        match stmt:
            case ast.Let():
                self.let(stmt)
            case ast.Assign(target=target, value=value):
                self.assign(target, value)
            case ast.ExprStmt(expr=e):
                self.expr_stmt(e, stmt.span)
                return
            case ast.If():
                self.if_(stmt)
            case ast.While():
                self.while_(stmt)
            case ast.Match():
                self.match(stmt)
            case ast.Return(value=v):
                self.return_(v)
                return
            case ast.BlockStmt(block=b):
                self.block(b)
        self.drop_stmt_temps()

    def let(self, stmt: ast.Let) -> None:
        ty = stmt.ty if stmt.ty is not None else self.tm.type_of(stmt.init)
        local = self.new_local(stmt.name, self.instantiate(ty), stmt.mutable, ir.LocalKind.USER)
        if stmt.init is not None:
            self.lower_into(ir.Place(local), stmt.init)
        # the binding is not in scope inside its own initializer
        self.declare(stmt.name, local)

    def assign(self, target: ast.Expr, value: ast.Expr) -> None:
        target_ty = self.tm.type_of(target)
        if not self.adts.needs_drop(target_ty):
            rv = self.rvalue(value)
            place = self.place(target)
            self.emit(lambda n: ir.Assign(place, rv, n, span=self.span))
            return
        # drop-before-write: the new value is fully built before the old one goes
        t = self.temp(self.instantiate(target_ty))
        self.lower_into(ir.Place(t), value)
        place = self.place(target)
        self.emit(lambda n: ir.Drop(place, n, span=self.span))
        self.emit(lambda n: ir.Assign(place, ir.Use(ir.Move(ir.Place(t))), n, span=self.span))

    def expr_stmt(self, expr: ast.Expr, span: Span) -> None:
        self.span = span
        ty = self.tm.type_of(expr)
        if isinstance(expr, ast.Call):
            t = self.call(expr).local
        else:
            rv = self.rvalue(expr)
            t = self.temp(self.rvalue_type(rv))
            self.emit(lambda n: ir.Assign(ir.Place(t), rv, n, span=span))
        if not is_copy(ty):
            self.stmt_temps.append(t)
        self.drop_stmt_temps()

    def if_(self, stmt: ast.If) -> None:
        cond = self.settle(self.operand(stmt.cond))
        if_slot = self.ensure()
        then_slot = self.alloc()
        self.cur = then_slot
        self.block(stmt.then)
        then_end = self.cur
        if stmt.orelse is None:
            join = self.alloc()
            self.goto_from([then_end], join)
            self.fill(if_slot, ir.If(cond, then_slot, join, span=stmt.span))
        else:
            else_slot = self.alloc()
            self.cur = else_slot
            self.block(stmt.orelse)
            else_end = self.cur
            join = self.alloc()
            self.goto_from([then_end, else_end], join)
            self.fill(if_slot, ir.If(cond, then_slot, else_slot, span=stmt.span))
        self.cur = join

    def while_(self, stmt: ast.While) -> None:
        head = self.ensure()
        cond = self.settle(self.operand(stmt.cond))
        if_slot = self.ensure()
        body_slot = self.alloc()
        self.cur = body_slot
        self.block(stmt.body)
        self.goto_from([self.cur], head)
        exit_slot = self.alloc()
        self.fill(if_slot, ir.If(cond, body_slot, exit_slot, span=stmt.span))
        self.cur = exit_slot

    def match(self, stmt: ast.Match) -> None:
        scrutinee = self.base_place(stmt.scrutinee)
        enum_ty = self.place_type(scrutinee)
        assert isinstance(enum_ty, AdtTy)
        switch_slot = self.ensure()
        covered: dict[int, int] = {}
        otherwise: int | None = None
        ends: list[int | None] = []
        n_variants = len(self.adts.enums[enum_ty.name])
        for arm in stmt.arms:
            slot = self.alloc()
            self.cur = slot
            self.span = arm.span
            if arm.is_wildcard:
                if otherwise is None and len(covered) < n_variants:
                    otherwise = slot
                self.block(arm.body)
            else:
                variant = self.tm.variant_index(arm.enum, arm.variant)
                assert variant is not None
                if variant not in covered and otherwise is None:
                    covered[variant] = slot
                self.arm(scrutinee.downcast(variant), arm)
            ends.append(self.cur)
        join = self.alloc()
        self.span = stmt.span
        self.goto_from(ends, join)
        self.fill(
            switch_slot,
            ir.Switch(scrutinee, tuple(sorted(covered.items())), otherwise, span=stmt.span),
        )
        self.cur = join

    def arm(self, variant_place: ir.Place, arm: ast.Arm) -> None:
        self.push_scope()
        for i, binding in enumerate(arm.bindings):
            if binding.name is None:
                continue
            field = variant_place.field(i)
            field_ty = self.place_type(field)
            if binding.by_ref:
                ty = RefTy(self.fresh_region(), binding.mutable, field_ty)
                local = self.new_local(binding.name, ty, False, ir.LocalKind.USER)
                rv: ir.Rvalue = ir.Ref(self.fresh_region(), binding.mutable, field)
            else:
                local = self.new_local(binding.name, field_ty, binding.mutable, ir.LocalKind.USER)
                rv = ir.Use(self.read(field))
            self.emit(lambda n, local=local, rv=rv: ir.Assign(ir.Place(local), rv, n, span=arm.span))
            self.declare(binding.name, local)
        for stmt in arm.body.stmts:
            self.stmt(stmt)
        if arm.body.tail is not None:
            self.expr_stmt(arm.body.tail, arm.body.tail.span)
        self.pop_scope()

    def return_(self, value: ast.Expr | None) -> None:
        if value is not None:
            self.lower_into(ir.Place(0), value)
        self.drop_stmt_temps()
        for locals_, temps in zip(reversed(self.scopes), reversed(self.outer_temps)):
            self.exit_scope(locals_)
            self.drop_temps(temps)
        self.terminate(ir.Return(span=self.span))

    # ─── Expressions ───

    def lower_into(self, dest: ir.Place, expr: ast.Expr) -> None:
        if isinstance(expr, ast.Call):
            self.call(expr, dest)
            return
        rv = self.rvalue(expr)
        span = self.span
        self.emit(lambda n: ir.Assign(dest, rv, n, span=span))

    def operand(self, expr: ast.Expr) -> ir.Operand:
        match expr:
            case ast.IntLit(value=v):
                return ir.Const(_wrap_i32(v), I32)
            case ast.BoolLit(value=v):
                return ir.Const(v, BOOL)
            case ast.UnitLit():
                return ir.Const(None, UNIT)
        if ast.is_place_expr(expr):
            return self.read(self.place(expr))
        if isinstance(expr, ast.Unary) and expr.op == "-" and isinstance(expr.operand, ast.IntLit):
            return ir.Const(_wrap_i32(-expr.operand.value), I32)
        if isinstance(expr, ast.Call):
            return self.read(self.call(expr))
        rv = self.rvalue(expr)
        t = self.temp(self.rvalue_type(rv))
        self.emit(lambda n: ir.Assign(ir.Place(t), rv, n, span=expr.span))
        return self.read(ir.Place(t))

    def rvalue(self, expr: ast.Expr) -> ir.Rvalue:
        match expr:
            case ast.Borrow(mutable=m, operand=o):
                place = self.place(o)
                return ir.Ref(self.fresh_region(), m, place)
            case ast.BoxNew(operand=o):
                return ir.BoxNew(self.operand(o))
            case ast.Binary(op="&&" | "||"):
                return ir.Use(self.short_circuit(expr))
            case ast.Binary(op=op, lhs=l, rhs=r):
                return ir.BinaryOp(op, self.operand(l), self.operand(r))
            case ast.Unary(op=op, operand=o):
                if op == "-" and isinstance(o, ast.IntLit):
                    return ir.Use(self.operand(expr))
                return ir.UnaryOp(op, self.operand(o))
            case ast.StructLit(name=name, fields=fields):
                values = {fname: self.operand(value) for fname, value in fields}
                order = self.adts.struct_field_names[name]
                return ir.Aggregate(name, None, tuple(values[f] for f in order))
            case ast.EnumLit(enum=e, variant=v, args=args):
                index = self.tm.variant_index(e, v)
                return ir.Aggregate(e, index, tuple(self.operand(a) for a in args))
            case ast.Call():
                return ir.Use(self.read(self.call(expr)))
        return ir.Use(self.operand(expr))

    def short_circuit(self, expr: ast.Binary) -> ir.Operand:
        t = self.temp(BOOL)
        lhs = self.operand(expr.lhs)
        if_slot = self.ensure()
        rhs_slot = self.alloc()
        self.cur = rhs_slot
        rhs = self.operand(expr.rhs)
        self.emit(lambda n: ir.Assign(ir.Place(t), ir.Use(rhs), n, span=expr.span))
        rhs_end = self.cur
        const_slot = self.alloc()
        self.cur = const_slot
        short = ir.Const(expr.op == "||", BOOL)
        self.emit(lambda n: ir.Assign(ir.Place(t), ir.Use(short), n, span=expr.span))
        const_end = self.cur
        join = self.alloc()
        self.goto_from([rhs_end, const_end], join)
        if expr.op == "&&":
            self.fill(if_slot, ir.If(lhs, rhs_slot, const_slot, span=expr.span))
        else:
            self.fill(if_slot, ir.If(lhs, const_slot, rhs_slot, span=expr.span))
        self.cur = join
        return ir.Copy(ir.Place(t))

    def place(self, expr: ast.Expr) -> ir.Place:
        match expr:
            case ast.Var(name=n):
                return ir.Place(self.lookup(n))
            case ast.FieldAccess(base=base):
                place = self.base_place(base)
                derefs, index = self.tm.field_access[expr.eid]
                for _ in range(derefs):
                    place = place.deref()
                return place.field(index)
            case ast.Deref(operand=o):
                return self.base_place(o).deref()
        raise InternalCompilerError(f"not a place expression: {expr!r}")

    def base_place(self, expr: ast.Expr) -> ir.Place:
        if ast.is_place_expr(expr):
            return self.place(expr)
        if isinstance(expr, ast.Call):
            t = self.call(expr).local
        else:
            rv = self.rvalue(expr)
            t = self.temp(self.rvalue_type(rv))
            self.emit(lambda n: ir.Assign(ir.Place(t), rv, n, span=expr.span))
        self.stmt_temps.append(t)
        return ir.Place(t)

    def call(self, expr: ast.Call, dest: ir.Place | None = None) -> ir.Place:
        """Emit a call; without a destination the result lands in a fresh temporary."""
        sig = self.tm.signatures[expr.func]
        args = tuple(self.argument(a) for a in expr.args)
        subst = tuple(self.fresh_region() for _ in sig.lifetimes)
        if dest is None:
            instantiated = dict(zip(sig.lifetimes, subst))
            dest = ir.Place(self.temp(map_regions(sig.ret, instantiated.__getitem__)))
        target = dest
        span = expr.span
        self.emit(lambda n: ir.Call(target, expr.func, args, n, subst, span=span))
        return dest

    def argument(self, expr: ast.Expr) -> ir.Operand:
        """Call arguments; a `&mut` place is implicitly reborrowed rather than moved."""
        if ast.is_place_expr(expr):
            place = self.place(expr)
            ty = self.place_type(place)
            if isinstance(ty, RefTy) and ty.mutable:
                inner = self.place_type(place.deref())
                region = self.fresh_region()
                t = self.temp(RefTy(region, True, inner))
                rv = ir.Ref(region, True, place.deref())
                self.emit(lambda n: ir.Assign(ir.Place(t), rv, n, span=expr.span))
                return ir.Move(ir.Place(t))
            return self.read(place)
        return self.operand(expr)


def _wrap_i32(value: int) -> int:
    return (value + 2**31) % 2**32 - 2**31


def lower(tm: TypedModule) -> ir.RirModule:
    """Lower every function of a typechecked module."""
    adts = build_adt_table(tm)
    functions = []
    for fn in tm.module.functions:
        sig = tm.signatures[fn.name]
        rir = FunctionLowerer(tm, adts, fn, sig).lower()
        logger.debug(
            "lowered", function=fn.name, nodes=len(rir.nodes), regions=len(rir.regions)
        )
        functions.append(rir)
    return ir.RirModule(functions=functions, adts=adts)

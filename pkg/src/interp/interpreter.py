"""
Reference interpreter for elaborated RustIR.

Runs a module from an entry function over the structured memory of
`src.interp.values`, trapping on every memory error (use after free, double
free, dangling reference, uninitialized read) as well as division by zero and
call-depth overflow. Frames live on an explicit stack, so deep recursion in
the interpreted program never recurses in Python.

Trace lines have a fixed format:

    call <fn>
    assign <place> at bb<N>
    alloc #<id> at bb<N>
    free #<id> at bb<N>
    return <fn>
"""

from __future__ import annotations

from dataclasses import dataclass, field

from src.config.settings import get_settings
from src.core.errors import InternalCompilerError, UsageError
from src.core.log import get_logger
from src.frontend.types import AdtTy, BoolTy, BoxTy, I32Ty, RlType, UnitTy
from src.interp.values import (
    UNINIT,
    UNIT_V,
    AllocLedger,
    BoolV,
    BoxV,
    EnumV,
    FieldStep,
    FrameRoot,
    HeapRoot,
    IntV,
    Outcome,
    RefV,
    Returned,
    Root,
    Step,
    StructV,
    SValue,
    Trap,
    TrapKind,
    TrapSignal,
    Uninit,
    VariantStep,
    read_path,
    wrap_i32,
    write_path,
)
from src.ir import rustir as ir

logger = get_logger("interp")


@dataclass
class Frame:
    fn: ir.RirFunction
    uid: int
    values: list[SValue]
    generation: list[int]
    node: int
    # caller place receiving the result, None for the entry frame
    dest: ir.Place | None = None


@dataclass
class Execution:
    outcome: Outcome
    trace: list[str] = field(default_factory=list)

    @property
    def allocs(self) -> int:
        return sum(1 for line in self.trace if line.startswith("alloc "))

    @property
    def frees(self) -> int:
        return sum(1 for line in self.trace if line.startswith("free "))


def _trunc_div(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def binary(op: str, lhs: SValue, rhs: SValue) -> SValue:
    if op in ("==", "!="):
        equal = lhs == rhs
        return BoolV(equal if op == "==" else not equal)
    if not isinstance(lhs, IntV) or not isinstance(rhs, IntV):
        raise InternalCompilerError(f"arithmetic on {lhs} {op} {rhs}")
    a, b = lhs.value, rhs.value
    match op:
        case "+":
            return IntV(wrap_i32(a + b))
        case "-":
            return IntV(wrap_i32(a - b))
        case "*":
            return IntV(wrap_i32(a * b))
        case "/" | "%":
            if b == 0:
                raise TrapSignal(TrapKind.DIV_BY_ZERO)
            q = _trunc_div(a, b)
            return IntV(wrap_i32(q if op == "/" else a - b * q))
        case "<":
            return BoolV(a < b)
        case "<=":
            return BoolV(a <= b)
        case ">":
            return BoolV(a > b)
        case ">=":
            return BoolV(a >= b)
    raise InternalCompilerError(f"unknown operator {op}")


class Interpreter:
    def __init__(self, module: ir.RirModule, depth_limit: int | None = None) -> None:
        self.module = module
        self.adts = module.adts
        self.functions = module.by_name
        self.depth_limit = depth_limit if depth_limit is not None else get_settings().call_depth_limit
        self.heap = AllocLedger()
        self.stack: list[Frame] = []
        self.live_frames: set[int] = set()
        self.next_uid = 0
        self.trace: list[str] = []

    # ─── Frames ───

    def push(self, fn: ir.RirFunction, args: list[SValue], dest: ir.Place | None) -> None:
        values: list[SValue] = [UNINIT] * len(fn.locals)
        if isinstance(fn.return_type, UnitTy):
            values[0] = UNIT_V
        for i, arg in enumerate(args, start=1):
            values[i] = arg
        frame = Frame(fn, self.next_uid, values, [0] * len(fn.locals), fn.entry, dest)
        self.next_uid += 1
        self.live_frames.add(frame.uid)
        self.stack.append(frame)
        self.trace.append(f"call {fn.name}")

    @property
    def frame(self) -> Frame:
        return self.stack[-1]

    # ─── Memory ───

    def root_value(self, root: Root) -> SValue:
        if isinstance(root, HeapRoot):
            return self.heap.get(root.alloc).value
        frame = self.frame_of(root)
        return frame.values[root.local]

    def frame_of(self, root: FrameRoot) -> Frame:
        if root.frame not in self.live_frames:
            raise TrapSignal(TrapKind.DANGLING_DEREF)
        for frame in reversed(self.stack):
            if frame.uid == root.frame:
                if frame.generation[root.local] != root.generation:
                    raise TrapSignal(TrapKind.DANGLING_DEREF)
                return frame
        raise TrapSignal(TrapKind.DANGLING_DEREF)

    def store_root(self, root: Root, value: SValue) -> None:
        if isinstance(root, HeapRoot):
            self.heap.get(root.alloc).value = value
        else:
            self.frame_of(root).values[root.local] = value

    def locate(self, place: ir.Place) -> tuple[Root, tuple[Step, ...]]:
        """Resolve a place to a root and a path of field/variant steps."""
        frame = self.frame
        root: Root = FrameRoot(frame.uid, place.local, frame.generation[place.local])
        path: tuple[Step, ...] = ()
        for proj in place.projections:
            if isinstance(proj, ir.Field):
                path = (*path, FieldStep(proj.index))
            elif isinstance(proj, ir.Downcast):
                path = (*path, VariantStep(proj.variant))
            else:
                pointer = read_path(self.root_value(root), path)
                if isinstance(pointer, BoxV):
                    self.heap.get(pointer.alloc)
                    root, path = HeapRoot(pointer.alloc), ()
                elif isinstance(pointer, RefV):
                    self.root_value(pointer.root)
                    root, path = pointer.root, pointer.path
                else:
                    raise TrapSignal(TrapKind.UNINIT_READ)
        return root, path

    def load(self, place: ir.Place) -> SValue:
        root, path = self.locate(place)
        return read_path(self.root_value(root), path)

    def store(self, place: ir.Place, value: SValue) -> None:
        root, path = self.locate(place)
        if not path:
            self.store_root(root, value)
            return
        self.store_root(root, write_path(self.root_value(root), path, value))

    # ─── Evaluation ───

    def operand(self, op: ir.Operand) -> SValue:
        if isinstance(op, ir.Const):
            if op.value is None:
                return UNIT_V
            if isinstance(op.value, bool):
                return BoolV(op.value)
            return IntV(op.value)
        value = self.load(op.place)
        if isinstance(value, Uninit):
            raise TrapSignal(TrapKind.UNINIT_READ)
        if isinstance(op, ir.Move):
            self.store(op.place, UNINIT)
        return value

    def rvalue(self, rv: ir.Rvalue, node: int) -> SValue:
        match rv:
            case ir.Use(operand=o):
                return self.operand(o)
            case ir.Ref(place=p):
                root, path = self.locate(p)
                return RefV(root, path)
            case ir.BinaryOp(op=op, lhs=lhs, rhs=rhs):
                a = self.operand(lhs)
                return binary(op, a, self.operand(rhs))
            case ir.UnaryOp(op=op, operand=o):
                v = self.operand(o)
                if op == "-":
                    assert isinstance(v, IntV)
                    return IntV(wrap_i32(-v.value))
                assert isinstance(v, BoolV)
                return BoolV(not v.value)
            case ir.BoxNew(operand=o):
                aid = self.heap.alloc(self.operand(o))
                self.trace.append(f"alloc #{aid} at bb{node}")
                return BoxV(aid)
            case ir.Aggregate(variant=v, operands=ops):
                values = tuple(self.operand(o) for o in ops)
                return StructV(values) if v is None else EnumV(v, values)
        raise InternalCompilerError(f"unknown rvalue {rv!r}")

    # ─── Drops ───

    def free(self, aid: int, node: int) -> None:
        self.heap.free(aid)
        self.trace.append(f"free #{aid} at bb{node}")

    def drop_value(self, ty: RlType, value: SValue, node: int) -> None:
        """Drop glue: boxes free their content first, ADT fields go in declaration order."""
        if not self.adts.needs_drop(ty):
            return
        if isinstance(value, Uninit):
            raise TrapSignal(TrapKind.UNINIT_READ)
        if isinstance(ty, BoxTy):
            assert isinstance(value, BoxV)
            content = self.heap.allocations.get(value.alloc)
            if content is None or not content.live:
                raise TrapSignal(TrapKind.DOUBLE_FREE)
            self.drop_value(ty.inner, content.value, node)
            self.free(value.alloc, node)
            return
        assert isinstance(ty, AdtTy)
        if isinstance(value, StructV):
            for fty, fv in zip(self.adts.structs[ty.name], value.fields):
                self.drop_value(fty, fv, node)
        elif isinstance(value, EnumV):
            for fty, fv in zip(self.adts.enums[ty.name][value.variant], value.payload):
                self.drop_value(fty, fv, node)

    def drop(self, place: ir.Place, shallow: bool, node: int) -> None:
        ty = self.frame.fn.place_type(place, self.adts)
        if not self.adts.needs_drop(ty):
            return
        value = self.load(place)
        if shallow:
            if not isinstance(value, BoxV):
                raise TrapSignal(TrapKind.UNINIT_READ)
            self.free(value.alloc, node)
        else:
            self.drop_value(ty, value, node)
        self.store(place, UNINIT)

    # ─── Stepping ───

    def step(self) -> Outcome | None:
        frame = self.frame
        node = frame.node
        instr = frame.fn.nodes[node]
        match instr:
            case ir.Assign(place=p, rvalue=rv, next=nxt):
                value = self.rvalue(rv, node)
                self.store(p, value)
                self.trace.append(f"assign {p} at bb{node}")
                frame.node = nxt
            case ir.StorageDead(local=local, next=nxt):
                frame.values[local] = UNINIT
                frame.generation[local] += 1
                frame.node = nxt
            case ir.Drop(place=p, shallow=sh, next=nxt):
                self.drop(p, sh, node)
                frame.node = nxt
            case ir.ConditionalDrop(place=p, flag=f, shallow=sh, next=nxt):
                flag = frame.values[f]
                if isinstance(flag, Uninit):
                    raise TrapSignal(TrapKind.UNINIT_READ)
                if flag == BoolV(True):
                    self.drop(p, sh, node)
                frame.node = nxt
            case ir.Nop(next=nxt):
                frame.node = nxt
            case ir.Goto(target=t):
                frame.node = t
            case ir.If(cond=c, then=t, orelse=e):
                cond = self.operand(c)
                frame.node = t if cond == BoolV(True) else e
            case ir.Switch(place=p, arms=arms, otherwise=other):
                value = self.load(p)
                if not isinstance(value, EnumV):
                    raise TrapSignal(TrapKind.UNINIT_READ)
                target = dict(arms).get(value.variant, other)
                if target is None:
                    raise InternalCompilerError(f"switch without arm for variant {value.variant}")
                frame.node = target
            case ir.Call(dest=d, func=name, args=args):
                values = [self.operand(a) for a in args]
                if len(self.stack) >= self.depth_limit:
                    raise TrapSignal(TrapKind.STACK_OVERFLOW)
                self.push(self.functions[name], values, d)
            case ir.Return():
                result = frame.values[0]
                if isinstance(result, Uninit):
                    raise TrapSignal(TrapKind.UNINIT_READ)
                self.stack.pop()
                self.live_frames.discard(frame.uid)
                self.trace.append(f"return {frame.fn.name}")
                if not self.stack:
                    return Returned(result)
                caller = self.frame
                assert frame.dest is not None
                self.store(frame.dest, result)
                call = caller.fn.nodes[caller.node]
                assert isinstance(call, ir.Call)
                caller.node = call.next
        return None

    def run(self, entry: str, args: list[SValue]) -> Execution:
        self.push(self.functions[entry], args, None)
        while True:
            try:
                outcome = self.step()
            except TrapSignal as trap:
                frame = self.frame
                outcome = Trap(trap.kind, frame.node, frame.fn.name)
            if outcome is not None:
                logger.debug(
                    "eval_finished",
                    entry=entry,
                    outcome=type(outcome).__name__,
                    events=len(self.trace),
                    live_allocations=self.heap.live_count(),
                )
                return Execution(outcome, self.trace)


def eval_module(
    module: ir.RirModule, entry: str = "main", args: list[SValue] | None = None, depth_limit: int | None = None
) -> Execution:
    """Run entry to completion or to the first trap."""
    return Interpreter(module, depth_limit).run(entry, list(args or []))


def parse_arg(text: str) -> SValue:
    """Command line argument: an i32 literal, `true` or `false`."""
    if text in ("true", "false"):
        return BoolV(text == "true")
    return IntV(wrap_i32(int(text)))


def bind_args(module: ir.RirModule, entry: str, texts: list[str]) -> list[SValue]:
    """Check the entry function and its command line arguments before running."""
    fn = module.by_name.get(entry)
    if fn is None:
        raise UsageError(f"no function `{entry}` to run")
    params = fn.param_types
    if len(texts) != len(params):
        raise UsageError(f"`{entry}` takes {len(params)} argument(s) but {len(texts)} were given")
    values: list[SValue] = []
    for i, (text, ty) in enumerate(zip(texts, params, strict=True), start=1):
        if not isinstance(ty, BoolTy | I32Ty):
            raise UsageError(f"parameter {i} of `{entry}` has type `{ty}`, which cannot come from the command line")
        try:
            value = parse_arg(text)
        except ValueError:
            raise UsageError(f"argument {i} `{text}` is neither an integer nor `true`/`false`") from None
        if isinstance(ty, BoolTy) != isinstance(value, BoolV):
            raise UsageError(f"argument {i} `{text}` does not fit parameter type `{ty}`")
        values.append(value)
    return values

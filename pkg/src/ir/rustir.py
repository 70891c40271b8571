"""
RustIR: a MIR-like control-flow graph with one instruction per node.

Nodes are numbered densely from the entry (node 0). Every non-terminator
carries its single successor in `next`; terminators name their successors
explicitly. Local `_0` is the return place and parameters are `_1.._n`.
Region ids are dense per function: universal regions (signature lifetimes)
first, then existential ones introduced by lowering.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import StrEnum

from src.core.diagnostics import Span
from src.core.errors import InternalCompilerError
from src.frontend.types import AdtTy, BoxTy, RefTy, RlType

# ─── Places ───


@dataclass(frozen=True, slots=True)
class Field:
    index: int

    def __str__(self) -> str:
        return f".{self.index}"


@dataclass(frozen=True, slots=True)
class Deref:
    def __str__(self) -> str:
        return "*"


@dataclass(frozen=True, slots=True)
class Downcast:
    variant: int

    def __str__(self) -> str:
        return f" as #{self.variant}"


Projection = Field | Deref | Downcast
DEREF = Deref()


@dataclass(frozen=True, slots=True)
class Place:
    local: int
    projections: tuple[Projection, ...] = ()

    def project(self, proj: Projection) -> Place:
        return Place(self.local, (*self.projections, proj))

    def field(self, index: int) -> Place:
        return self.project(Field(index))

    def deref(self) -> Place:
        return self.project(DEREF)

    def downcast(self, variant: int) -> Place:
        return self.project(Downcast(variant))

    def is_prefix_of(self, other: Place) -> bool:
        n = len(self.projections)
        return self.local == other.local and other.projections[:n] == self.projections

    def prefixes(self) -> list[Place]:
        """All prefixes, shortest (the bare local) first, self last."""
        return [Place(self.local, self.projections[:i]) for i in range(len(self.projections) + 1)]

    @property
    def parent(self) -> Place | None:
        if not self.projections:
            return None
        return Place(self.local, self.projections[:-1])

    def __str__(self) -> str:
        text = f"_{self.local}"
        for proj in self.projections:
            if isinstance(proj, Deref):
                text = f"(*{text})"
            elif isinstance(proj, Downcast):
                text = f"({text} as #{proj.variant})"
            else:
                text = f"{text}.{proj.index}"
        return text


# ─── Operands and rvalues ───


@dataclass(frozen=True, slots=True)
class Copy:
    place: Place

    def __str__(self) -> str:
        return f"copy {self.place}"


@dataclass(frozen=True, slots=True)
class Move:
    place: Place

    def __str__(self) -> str:
        return f"move {self.place}"


@dataclass(frozen=True, slots=True)
class Const:
    value: int | bool | None  # None is the unit value
    ty: RlType

    def __str__(self) -> str:
        if self.value is None:
            return "const ()"
        if isinstance(self.value, bool):
            return f"const {'true' if self.value else 'false'}"
        return f"const {self.value}_i32"


Operand = Copy | Move | Const


@dataclass(frozen=True, slots=True)
class Use:
    operand: Operand

    def __str__(self) -> str:
        return str(self.operand)


@dataclass(frozen=True, slots=True)
class Ref:
    region: int
    mutable: bool
    place: Place

    def __str__(self) -> str:
        return f"&'?{self.region} {'mut ' if self.mutable else ''}{self.place}"


@dataclass(frozen=True, slots=True)
class BinaryOp:
    op: str
    lhs: Operand
    rhs: Operand

    def __str__(self) -> str:
        return f"{BINARY_NAMES[self.op]}({self.lhs}, {self.rhs})"


@dataclass(frozen=True, slots=True)
class UnaryOp:
    op: str
    operand: Operand

    def __str__(self) -> str:
        return f"{'Neg' if self.op == '-' else 'Not'}({self.operand})"


@dataclass(frozen=True, slots=True)
class BoxNew:
    operand: Operand

    def __str__(self) -> str:
        return f"box {self.operand}"


@dataclass(frozen=True, slots=True)
class Aggregate:
    adt: str
    variant: int | None  # None for structs
    operands: tuple[Operand, ...]

    def __str__(self) -> str:
        head = self.adt if self.variant is None else f"{self.adt}#{self.variant}"
        return f"{head}({', '.join(str(o) for o in self.operands)})"


Rvalue = Use | Ref | BinaryOp | UnaryOp | BoxNew | Aggregate

BINARY_NAMES = {
    "+": "Add", "-": "Sub", "*": "Mul", "/": "Div", "%": "Rem",
    "==": "Eq", "!=": "Ne", "<": "Lt", "<=": "Le", ">": "Gt", ">=": "Ge",
}


def operand_places(rvalue: Rvalue) -> list[Operand]:
    """Operands read by an rvalue, left to right."""
    match rvalue:
        case Use(operand=o) | UnaryOp(operand=o) | BoxNew(operand=o):
            return [o]
        case BinaryOp(lhs=l, rhs=r):
            return [l, r]
        case Aggregate(operands=ops):
            return list(ops)
    return []


# ─── Instructions ───


def _span() -> Span:
    return field(default_factory=Span, compare=False)


@dataclass(frozen=True, slots=True)
class Assign:
    place: Place
    rvalue: Rvalue
    next: int
    span: Span = _span()


@dataclass(frozen=True, slots=True)
class StorageDead:
    local: int
    next: int
    span: Span = _span()


@dataclass(frozen=True, slots=True)
class Drop:
    place: Place
    next: int
    shallow: bool = False  # free the box allocation only, contents already gone
    span: Span = _span()


@dataclass(frozen=True, slots=True)
class ConditionalDrop:
    place: Place
    flag: int
    next: int
    shallow: bool = False
    span: Span = _span()


@dataclass(frozen=True, slots=True)
class Nop:
    next: int
    span: Span = _span()


@dataclass(frozen=True, slots=True)
class Goto:
    target: int
    span: Span = _span()


@dataclass(frozen=True, slots=True)
class If:
    cond: Operand
    then: int
    orelse: int
    span: Span = _span()


@dataclass(frozen=True, slots=True)
class Switch:
    place: Place
    arms: tuple[tuple[int, int], ...]  # (variant index, target node)
    otherwise: int | None = None
    span: Span = _span()


@dataclass(frozen=True, slots=True)
class Call:
    dest: Place
    func: str
    args: tuple[Operand, ...]
    next: int
    # caller region instantiating each universal region of the callee, in order
    region_subst: tuple[int, ...] = ()
    span: Span = _span()


@dataclass(frozen=True, slots=True)
class Return:
    span: Span = _span()


Instr = Assign | StorageDead | Drop | ConditionalDrop | Nop | Goto | If | Switch | Call | Return
TERMINATORS = (Goto, If, Switch, Call, Return)


def successors(instr: Instr) -> list[int]:
    match instr:
        case Assign(next=n) | StorageDead(next=n) | Drop(next=n) | ConditionalDrop(next=n):
            return [n]
        case Nop(next=n) | Call(next=n):
            return [n]
        case Goto(target=t):
            return [t]
        case If(then=t, orelse=e):
            return [t] if t == e else [t, e]
        case Switch(arms=arms, otherwise=o):
            out: list[int] = []
            for _, target in arms:
                if target not in out:
                    out.append(target)
            if o is not None and o not in out:
                out.append(o)
            return out
        case Return():
            return []
    raise InternalCompilerError(f"unknown instruction {instr!r}")


def retarget(instr: Instr, mapping: dict[int, int]) -> Instr:
    """Rewrite successor ids through mapping (ids absent from mapping are kept)."""
    def m(n: int) -> int:
        return mapping.get(n, n)

    match instr:
        case Assign() | StorageDead() | Drop() | ConditionalDrop() | Nop() | Call():
            return replace(instr, next=m(instr.next))
        case Goto(target=t):
            return replace(instr, target=m(t))
        case If(then=t, orelse=e):
            return replace(instr, then=m(t), orelse=m(e))
        case Switch(arms=arms, otherwise=o):
            return replace(
                instr,
                arms=tuple((v, m(t)) for v, t in arms),
                otherwise=None if o is None else m(o),
            )
    return instr


# ─── Declarations ───


class LocalKind(StrEnum):
    RETURN = "return"
    PARAM = "param"
    USER = "user"
    TEMP = "temp"
    FLAG = "flag"


class RegionKind(StrEnum):
    UNIVERSAL = "universal"
    EXISTENTIAL = "existential"


@dataclass(frozen=True, slots=True)
class LocalDecl:
    name: str
    ty: RlType  # RefTy regions are region ids
    mutable: bool
    kind: LocalKind


@dataclass(frozen=True, slots=True)
class RegionDecl:
    id: int
    kind: RegionKind
    name: str = ""  # lifetime name for universal regions


@dataclass
class AdtTable:
    """Field and variant payload types of every struct and enum."""

    structs: dict[str, tuple[RlType, ...]] = field(default_factory=dict)
    struct_field_names: dict[str, tuple[str, ...]] = field(default_factory=dict)
    enums: dict[str, tuple[tuple[RlType, ...], ...]] = field(default_factory=dict)
    variant_names: dict[str, tuple[str, ...]] = field(default_factory=dict)

    def is_enum(self, ty: RlType) -> bool:
        return isinstance(ty, AdtTy) and ty.name in self.enums

    def is_struct(self, ty: RlType) -> bool:
        return isinstance(ty, AdtTy) and ty.name in self.structs

    def needs_drop(self, ty: RlType) -> bool:
        """True when dropping a value of ty may free heap memory."""
        return self._needs_drop(ty, set())

    def _needs_drop(self, ty: RlType, visiting: set[str]) -> bool:
        if isinstance(ty, BoxTy):
            return True
        if not isinstance(ty, AdtTy) or ty.name in visiting:
            return False
        visiting = visiting | {ty.name}
        if ty.name in self.structs:
            return any(self._needs_drop(t, visiting) for t in self.structs[ty.name])
        return any(
            self._needs_drop(t, visiting) for payload in self.enums[ty.name] for t in payload
        )

    def place_type(self, base: RlType, projections: tuple[Projection, ...]) -> RlType:
        ty = base
        variant: int | None = None
        for proj in projections:
            if isinstance(proj, Deref):
                if not isinstance(ty, (BoxTy, RefTy)):
                    raise InternalCompilerError(f"deref of non-pointer type {ty}")
                ty = ty.inner
            elif isinstance(proj, Downcast):
                variant = proj.variant
                continue
            else:
                if not isinstance(ty, AdtTy):
                    raise InternalCompilerError(f"field of non-ADT type {ty}")
                if variant is not None:
                    ty = self.enums[ty.name][variant][proj.index]
                else:
                    ty = self.structs[ty.name][proj.index]
            variant = None
        return ty


@dataclass
class RirFunction:
    name: str
    locals: list[LocalDecl]
    param_count: int
    nodes: dict[int, Instr]
    regions: list[RegionDecl]
    outlives: tuple[tuple[int, int], ...] = ()  # (a, b) means a: b, universal ids
    entry: int = 0
    index: int = 0
    span: Span = field(default_factory=Span)

    @property
    def return_type(self) -> RlType:
        return self.locals[0].ty

    @property
    def param_types(self) -> list[RlType]:
        return [self.locals[i].ty for i in range(1, self.param_count + 1)]

    @property
    def universal_regions(self) -> list[int]:
        return [r.id for r in self.regions if r.kind is RegionKind.UNIVERSAL]

    def is_universal(self, region: int) -> bool:
        return self.regions[region].kind is RegionKind.UNIVERSAL

    def successors(self, node: int) -> list[int]:
        return successors(self.nodes[node])

    def predecessors(self) -> dict[int, list[int]]:
        preds: dict[int, list[int]] = {n: [] for n in self.nodes}
        for n in sorted(self.nodes):
            for s in self.successors(n):
                preds[s].append(n)
        return preds

    def edges(self) -> list[tuple[int, int]]:
        return [(n, s) for n in sorted(self.nodes) for s in self.successors(n)]

    def place_type(self, place: Place, adts: AdtTable) -> RlType:
        return adts.place_type(self.locals[place.local].ty, place.projections)

    def new_node_id(self) -> int:
        return max(self.nodes, default=-1) + 1

    def add_local(self, decl: LocalDecl) -> int:
        self.locals.append(decl)
        return len(self.locals) - 1


@dataclass
class RirModule:
    functions: list[RirFunction]
    adts: AdtTable

    def function(self, name: str) -> RirFunction:
        for fn in self.functions:
            if fn.name == name:
                return fn
        raise KeyError(name)

    @property
    def by_name(self) -> dict[str, RirFunction]:
        return {fn.name: fn for fn in self.functions}


def reverse_postorder(fn: RirFunction) -> list[int]:
    """Nodes reachable from the entry in reverse postorder (iterative DFS)."""
    seen: set[int] = {fn.entry}
    order: list[int] = []
    stack: list[tuple[int, list[int]]] = [(fn.entry, list(reversed(fn.successors(fn.entry))))]
    while stack:
        node, pending = stack[-1]
        if pending:
            nxt = pending.pop()
            if nxt not in seen:
                seen.add(nxt)
                stack.append((nxt, list(reversed(fn.successors(nxt)))))
        else:
            stack.pop()
            order.append(node)
    order.reverse()
    return order


def validate(fn: RirFunction) -> None:
    """Check CFG well-formedness; raises InternalCompilerError."""
    if fn.entry not in fn.nodes:
        raise InternalCompilerError(f"{fn.name}: entry node {fn.entry} missing")
    for n, instr in fn.nodes.items():
        for s in successors(instr):
            if s not in fn.nodes:
                raise InternalCompilerError(f"{fn.name}: bb{n} jumps to missing bb{s}")
    reachable = set(reverse_postorder(fn))
    if reachable != set(fn.nodes):
        missing = sorted(set(fn.nodes) - reachable)
        raise InternalCompilerError(f"{fn.name}: unreachable nodes {missing}")


def through_ref_deref(fn: RirFunction, adts: AdtTable, place: Place) -> bool:
    """True when the place dereferences a reference somewhere along its path."""
    ty = fn.locals[place.local].ty
    for i, proj in enumerate(place.projections):
        if isinstance(proj, Deref) and isinstance(ty, RefTy):
            return True
        ty = adts.place_type(fn.locals[place.local].ty, place.projections[: i + 1])
    return False


def describe_place(fn: RirFunction, adts: AdtTable, place: Place) -> str:
    """Source-level rendering of a place for diagnostics (`x.f`, `*b`, `(*r).f`)."""
    decl = fn.locals[place.local]
    text = decl.name if decl.kind in (LocalKind.USER, LocalKind.PARAM) else f"_{place.local}"
    ty = decl.ty
    variant: int | None = None
    for proj in place.projections:
        if isinstance(proj, Deref):
            text = f"*{text}"
            ty = ty.inner  # type: ignore[union-attr]
            variant = None
        elif isinstance(proj, Downcast):
            variant = proj.variant
            assert isinstance(ty, AdtTy)
            text = f"({text} as {adts.variant_names[ty.name][variant]})"
        else:
            assert isinstance(ty, AdtTy)
            base = f"({text})" if text.startswith("*") else text
            if variant is not None:
                name = str(proj.index)
                ty = adts.enums[ty.name][variant][proj.index]
            else:
                name = adts.struct_field_names[ty.name][proj.index]
                ty = adts.structs[ty.name][proj.index]
            text = f"{base}.{name}"
            variant = None
    return text

"""
Runtime values and memory of the reference interpreter.

Memory is structured, not flat: a frame local or a heap allocation holds one
whole SValue tree, and a reference is a symbolic path (root plus field and
variant steps) re-resolved on every access. Values are immutable; writes
rebuild the tree along the path.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import StrEnum

# ─── Values ───


@dataclass(frozen=True, slots=True)
class UnitV:
    def __str__(self) -> str:
        return "()"


@dataclass(frozen=True, slots=True)
class BoolV:
    value: bool

    def __str__(self) -> str:
        return "true" if self.value else "false"


@dataclass(frozen=True, slots=True)
class IntV:
    value: int

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True, slots=True)
class BoxV:
    alloc: int

    def __str__(self) -> str:
        return f"box#{self.alloc}"


@dataclass(frozen=True, slots=True)
class FrameRoot:
    frame: int
    local: int
    generation: int


@dataclass(frozen=True, slots=True)
class HeapRoot:
    alloc: int


Root = FrameRoot | HeapRoot


@dataclass(frozen=True, slots=True)
class FieldStep:
    index: int


@dataclass(frozen=True, slots=True)
class VariantStep:
    variant: int


Step = FieldStep | VariantStep


@dataclass(frozen=True, slots=True)
class RefV:
    root: Root
    path: tuple[Step, ...] = ()

    def __str__(self) -> str:
        return "&" + (f"heap#{self.root.alloc}" if isinstance(self.root, HeapRoot) else f"_{self.root.local}")


@dataclass(frozen=True, slots=True)
class StructV:
    fields: tuple[SValue, ...]

    def __str__(self) -> str:
        return "{" + ", ".join(str(f) for f in self.fields) + "}"


@dataclass(frozen=True, slots=True)
class EnumV:
    variant: int
    payload: tuple[SValue, ...] = ()

    def __str__(self) -> str:
        inner = "(" + ", ".join(str(v) for v in self.payload) + ")" if self.payload else ""
        return f"#{self.variant}{inner}"


@dataclass(frozen=True, slots=True)
class Uninit:
    def __str__(self) -> str:
        return "uninit"


SValue = UnitV | BoolV | IntV | BoxV | RefV | StructV | EnumV | Uninit

UNIT_V = UnitV()
UNINIT = Uninit()


def wrap_i32(value: int) -> int:
    value &= 0xFFFFFFFF
    return value - (1 << 32) if value & 0x80000000 else value


# ─── Outcomes ───


class TrapKind(StrEnum):
    USE_AFTER_FREE = "UseAfterFree"
    DOUBLE_FREE = "DoubleFree"
    DANGLING_DEREF = "DanglingDeref"
    UNINIT_READ = "UninitRead"
    DIV_BY_ZERO = "DivByZero"
    STACK_OVERFLOW = "StackOverflow"

    @property
    def is_memory(self) -> bool:
        return self not in (TrapKind.DIV_BY_ZERO, TrapKind.STACK_OVERFLOW)


@dataclass(frozen=True, slots=True)
class Returned:
    value: SValue

    def render(self) -> str:
        return str(self.value)


@dataclass(frozen=True, slots=True)
class Trap:
    kind: TrapKind
    node: int
    function: str = ""

    def render(self) -> str:
        return f"trap: {self.kind.value} at bb{self.node}"


Outcome = Returned | Trap


class TrapSignal(Exception):
    """Raised inside the interpreter; converted to a Trap at the faulting node."""

    def __init__(self, kind: TrapKind) -> None:
        super().__init__(kind.value)
        self.kind = kind


# ─── Heap ───


@dataclass
class Allocation:
    live: bool
    value: SValue


@dataclass
class AllocLedger:
    allocations: dict[int, Allocation] = field(default_factory=dict)
    next_id: int = 1

    def alloc(self, value: SValue) -> int:
        aid = self.next_id
        self.next_id += 1
        self.allocations[aid] = Allocation(True, value)
        return aid

    def free(self, aid: int) -> None:
        cell = self.allocations.get(aid)
        if cell is None or not cell.live:
            raise TrapSignal(TrapKind.DOUBLE_FREE)
        cell.live = False
        cell.value = UNINIT

    def get(self, aid: int) -> Allocation:
        cell = self.allocations.get(aid)
        if cell is None or not cell.live:
            raise TrapSignal(TrapKind.USE_AFTER_FREE)
        return cell

    def live_count(self) -> int:
        return sum(1 for cell in self.allocations.values() if cell.live)


# ─── Paths into values ───


def read_path(value: SValue, path: tuple[Step, ...]) -> SValue:
    for step in path:
        if isinstance(step, VariantStep):
            if not isinstance(value, EnumV) or value.variant != step.variant:
                raise TrapSignal(TrapKind.UNINIT_READ)
            continue
        if isinstance(value, StructV):
            value = value.fields[step.index]
        elif isinstance(value, EnumV):
            value = value.payload[step.index]
        else:
            raise TrapSignal(TrapKind.UNINIT_READ)
    return value


def write_path(value: SValue, path: tuple[Step, ...], new: SValue) -> SValue:
    if not path:
        return new
    step, rest = path[0], path[1:]
    if isinstance(step, VariantStep):
        if not isinstance(value, EnumV) or value.variant != step.variant:
            raise TrapSignal(TrapKind.UNINIT_READ)
        return write_path(value, rest, new)
    if isinstance(value, StructV):
        fields = list(value.fields)
        fields[step.index] = write_path(fields[step.index], rest, new)
        return StructV(tuple(fields))
    if isinstance(value, EnumV):
        payload = list(value.payload)
        payload[step.index] = write_path(payload[step.index], rest, new)
        return EnumV(value.variant, tuple(payload))
    raise TrapSignal(TrapKind.UNINIT_READ)

"""
Generic Kildall worklist solver.

An analysis supplies a Semilattice (bottom, join, optionally leq and a chain
height bound) and a per-node transfer function; the solver propagates states
along CFG edges (forward) or against them (backward) until nothing changes.
States are immutable values: transfer functions return new states.
"""

from __future__ import annotations

from collections import deque
from collections.abc import Callable
from dataclasses import dataclass, field
from enum import StrEnum
from typing import Generic, TypeVar

from src.config.settings import get_settings
from src.core.errors import FixpointDivergence, InternalCompilerError
from src.core.log import get_logger
from src.ir.rustir import RirFunction, reverse_postorder

logger = get_logger("dataflow")

S = TypeVar("S")


class Direction(StrEnum):
    FORWARD = "forward"
    BACKWARD = "backward"


class WorklistOrder(StrEnum):
    FIFO = "fifo"
    LIFO = "lifo"


@dataclass(frozen=True)
class Semilattice(Generic[S]):
    bottom: S
    join: Callable[[S, S], S]
    leq_fn: Callable[[S, S], bool] | None = None
    # bound on ascending chains per node; None falls back to settings
    height: int | None = None

    def leq(self, a: S, b: S) -> bool:
        if self.leq_fn is not None:
            return self.leq_fn(a, b)
        return self.join(a, b) == b


@dataclass
class FlowResult(Generic[S]):
    """States per node, `ins` entering and `outs` leaving each transfer in flow direction."""

    direction: Direction
    ins: dict[int, S] = field(default_factory=dict)
    outs: dict[int, S] = field(default_factory=dict)
    iterations: int = 0

    def before(self, node: int) -> S:
        """State holding just before the node executes."""
        return self.ins[node] if self.direction is Direction.FORWARD else self.outs[node]

    def after(self, node: int) -> S:
        return self.outs[node] if self.direction is Direction.FORWARD else self.ins[node]


Transfer = Callable[[int, S], S]


def flow_edges(fn: RirFunction, direction: Direction) -> dict[int, list[int]]:
    """Node -> nodes its out-state flows into."""
    if direction is Direction.FORWARD:
        return {n: fn.successors(n) for n in fn.nodes}
    preds = fn.predecessors()
    return {n: preds[n] for n in fn.nodes}


def boundary_nodes(fn: RirFunction, direction: Direction) -> list[int]:
    if direction is Direction.FORWARD:
        return [fn.entry]
    return [n for n in sorted(fn.nodes) if not fn.successors(n)]


def seed_order(fn: RirFunction, direction: Direction) -> list[int]:
    rpo = reverse_postorder(fn)
    order = rpo if direction is Direction.FORWARD else list(reversed(rpo))
    seen = set(order)
    rest = [n for n in sorted(fn.nodes) if n not in seen]
    return order + rest


def solve(
    fn: RirFunction,
    lattice: Semilattice[S],
    transfer: Transfer[S],
    entry_state: S,
    direction: Direction = Direction.FORWARD,
    order: WorklistOrder = WorklistOrder.FIFO,
) -> FlowResult[S]:
    """Least fixpoint of the transfer function over the CFG."""
    settings = get_settings()
    flows_to = flow_edges(fn, direction)
    result: FlowResult[S] = FlowResult(direction=direction)
    for n in fn.nodes:
        result.ins[n] = lattice.bottom
    for n in boundary_nodes(fn, direction):
        result.ins[n] = lattice.join(lattice.bottom, entry_state)

    seeds = seed_order(fn, direction)
    # a stack pops from the right, so it is seeded reversed to start at the same node
    worklist: deque[int] = deque(seeds if order is WorklistOrder.FIFO else reversed(seeds))
    pending = set(seeds)
    height = lattice.height if lattice.height is not None else settings.max_fixpoint_rounds
    cap = len(fn.nodes) * (height + 1)

    iterations = 0
    while worklist:
        node = worklist.popleft() if order is WorklistOrder.FIFO else worklist.pop()
        pending.discard(node)
        iterations += 1
        if iterations > cap:
            raise FixpointDivergence(
                f"{fn.name}: no fixpoint after {iterations} node visits "
                f"(non-monotone transfer or unbounded lattice)"
            )
        out = transfer(node, result.ins[node])
        result.outs[node] = out
        for target in flows_to[node]:
            joined = lattice.join(result.ins[target], out)
            if joined != result.ins[target]:
                result.ins[target] = joined
                if target not in pending:
                    pending.add(target)
                    worklist.append(target)
    result.iterations = iterations

    logger.debug("fixpoint", function=fn.name, direction=direction.value, iterations=iterations)
    if settings.debug_fixpoint_check:
        violations = check_fixpoint(fn, lattice, transfer, result)
        if violations:
            raise InternalCompilerError(f"{fn.name}: post-fixpoint check failed on {violations}")
    return result


def check_fixpoint(
    fn: RirFunction,
    lattice: Semilattice[S],
    transfer: Transfer[S],
    result: FlowResult[S],
) -> list[tuple[int, int]]:
    """Edges u->v (in flow direction) where transfer(u, in(u)) is not below in(v)."""
    bad: list[tuple[int, int]] = []
    for u, targets in sorted(flow_edges(fn, result.direction).items()):
        out = transfer(u, result.ins[u])
        for v in targets:
            if not lattice.leq(out, result.ins[v]):
                bad.append((u, v))
    return bad


def format_flow(fn: RirFunction, result: FlowResult[S], render: Callable[[S], str]) -> str:
    """`--dump=dataflow:<analysis>` listing: the state before and after every node."""
    lines = [f"fn {fn.name} ({result.direction.value}, {result.iterations} visits)"]
    for n in sorted(fn.nodes):
        lines.append(f"  bb{n}: before {render(result.before(n))}")
        lines.append(f"  {' ' * len(str(n))}    after  {render(result.after(n))}")
    return "\n".join(lines)

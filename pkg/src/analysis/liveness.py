"""
Variable liveness and region liveness.

Backward dataflow over locals: live-before = (live-after minus defs) plus uses.
A region is live at a point when some live local's type mentions it; universal
regions are live everywhere. Drops are not uses: dropping a Box never reads the
references it may hold.
"""

from __future__ import annotations

from dataclasses import dataclass

from src.analysis.dataflow import Direction, FlowResult, Semilattice, solve
from src.frontend.types import regions_of
from src.ir import rustir as ir

LiveSet = frozenset[int]


def _operand_locals(op: ir.Operand) -> set[int]:
    if isinstance(op, ir.Const):
        return set()
    return {op.place.local}


def uses_and_defs(instr: ir.Instr) -> tuple[set[int], set[int]]:
    uses: set[int] = set()
    defs: set[int] = set()
    match instr:
        case ir.Assign(place=p, rvalue=rv):
            for op in ir.operand_places(rv):
                uses |= _operand_locals(op)
            if isinstance(rv, ir.Ref):
                uses.add(rv.place.local)
            if p.projections:
                uses.add(p.local)
            else:
                defs.add(p.local)
        case ir.StorageDead(local=l):
            defs.add(l)
        case ir.ConditionalDrop(flag=f):
            uses.add(f)
        case ir.If(cond=c):
            uses |= _operand_locals(c)
        case ir.Switch(place=p):
            uses.add(p.local)
        case ir.Call(dest=d, args=args):
            for op in args:
                uses |= _operand_locals(op)
            if d.projections:
                uses.add(d.local)
            else:
                defs.add(d.local)
        case ir.Return():
            uses.add(0)
    # a local both written and read by one instruction stays live before it
    return uses, defs - uses


def variable_liveness(fn: ir.RirFunction) -> FlowResult[LiveSet]:
    lattice: Semilattice[LiveSet] = Semilattice(
        bottom=frozenset(), join=frozenset.union, leq_fn=frozenset.issubset,
        height=len(fn.locals) + 1,
    )

    def transfer(node: int, live_after: LiveSet) -> LiveSet:
        uses, defs = uses_and_defs(fn.nodes[node])
        return (live_after - defs) | uses

    return solve(fn, lattice, transfer, frozenset(), Direction.BACKWARD)


@dataclass
class RegionLiveness:
    before: dict[int, frozenset[int]]
    after: dict[int, frozenset[int]]
    locals_before: dict[int, LiveSet]
    locals_after: dict[int, LiveSet]

    def live_at(self, node: int) -> frozenset[int]:
        return self.before[node]


def regions_of_locals(fn: ir.RirFunction, locals_: LiveSet, universal: frozenset[int]) -> frozenset[int]:
    out = set(universal)
    for local in locals_:
        out.update(r for r in regions_of(fn.locals[local].ty) if isinstance(r, int))
    return frozenset(out)


def region_liveness(fn: ir.RirFunction) -> RegionLiveness:
    flow = variable_liveness(fn)
    universal = frozenset(fn.universal_regions)
    before: dict[int, frozenset[int]] = {}
    after: dict[int, frozenset[int]] = {}
    for n in fn.nodes:
        before[n] = regions_of_locals(fn, flow.before(n), universal)
        after[n] = regions_of_locals(fn, flow.after(n), universal)
    return RegionLiveness(
        before=before,
        after=after,
        locals_before={n: flow.before(n) for n in fn.nodes},
        locals_after={n: flow.after(n) for n in fn.nodes},
    )


def render_live(state: LiveSet) -> str:
    return "{" + ", ".join(f"_{local}" for local in sorted(state)) + "}"

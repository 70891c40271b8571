"""
Borrow-check transfer function.

Loans enter at `&`/`&mut` rvalues and move between regions along assignments,
following the types on both sides: positions reached through shared
references (and Box) are covariant, so the source's loans are copied into the
destination region; anything under a `&mut` is invariant, so the two regions
are unified. After the instruction's effect every region that is not live
after the node is killed.
"""

from __future__ import annotations

from dataclasses import dataclass

from src.analysis.liveness import RegionLiveness
from src.borrowck.domain import AbstractState, LoanTable
from src.frontend.types import BoxTy, RefTy, RlType, map_regions
from src.ir import rustir as ir


@dataclass(frozen=True, slots=True)
class Callee:
    """The region-relevant part of a callee signature, in the callee's region ids."""

    params: tuple[RlType, ...]
    ret: RlType
    outlives: tuple[tuple[int, int], ...]


def callee_table(module: ir.RirModule) -> dict[str, Callee]:
    return {
        fn.name: Callee(tuple(fn.param_types), fn.return_type, fn.outlives)
        for fn in module.functions
    }


def subtype_flow(state: AbstractState, src: RlType, dst: RlType, invariant: bool = False) -> AbstractState:
    """Make a value of type src usable at type dst."""
    match src, dst:
        case RefTy(region=rs, mutable=ms, inner=i_s), RefTy(region=rd, mutable=md, inner=i_d):
            if isinstance(rs, int) and isinstance(rd, int):
                state = state.union(rs, rd) if invariant else state.flow(rs, rd)
            return subtype_flow(state, i_s, i_d, invariant or (ms and md))
        case BoxTy(inner=i_s), BoxTy(inner=i_d):
            return subtype_flow(state, i_s, i_d, invariant)
    return state


def _ref_bases(fn: ir.RirFunction, adts: ir.AdtTable, place: ir.Place) -> list[RefTy]:
    """Reference types dereferenced along the path of place, outermost first."""
    out: list[RefTy] = []
    ty = fn.locals[place.local].ty
    for i, proj in enumerate(place.projections):
        if isinstance(proj, ir.Deref) and isinstance(ty, RefTy):
            out.append(ty)
        ty = adts.place_type(fn.locals[place.local].ty, place.projections[: i + 1])
    return out


class BorrowTransfer:
    def __init__(
        self,
        fn: ir.RirFunction,
        adts: ir.AdtTable,
        loans: LoanTable,
        callees: dict[str, Callee],
        liveness: RegionLiveness,
    ) -> None:
        self.fn = fn
        self.adts = adts
        self.loans = loans
        self.callees = callees
        self.liveness = liveness
        self.universal = frozenset(fn.universal_regions)

    def entry_state(self) -> AbstractState:
        """Each universal region starts holding its own placeholder loan."""
        state = AbstractState.bottom(len(self.fn.regions), self.universal)
        for u, loan in sorted(self.loans.placeholder.items()):
            state = state.add_loan(u, loan)
        return state

    def bottom(self) -> AbstractState:
        return AbstractState.bottom(len(self.fn.regions), self.universal)

    def type_of(self, place: ir.Place) -> RlType:
        return self.fn.place_type(place, self.adts)

    def operand_type(self, op: ir.Operand) -> RlType:
        return op.ty if isinstance(op, ir.Const) else self.type_of(op.place)

    # ─── Effects ───

    def assign(self, node: int, place: ir.Place, rv: ir.Rvalue, state: AbstractState) -> AbstractState:
        dst = self.type_of(place)
        match rv:
            case ir.Use(operand=op):
                return subtype_flow(state, self.operand_type(op), dst)
            case ir.Ref(region=r, mutable=m, place=q):
                state = state.add_loan(r, self.loans.by_node[node])
                # reborrow: the new reference also depends on every reference it goes through
                for base in _ref_bases(self.fn, self.adts, q):
                    if isinstance(base.region, int):
                        state = state.flow(base.region, r)
                return subtype_flow(state, RefTy(r, m, self.type_of(q)), dst)
            case ir.BoxNew(operand=op):
                return subtype_flow(state, BoxTy(self.operand_type(op)), dst)
        return state

    def call(self, instr: ir.Call, state: AbstractState) -> AbstractState:
        callee = self.callees[instr.func]
        subst = instr.region_subst

        def inst(ty: RlType) -> RlType:
            return map_regions(ty, lambda r: subst[r] if isinstance(r, int) else r)

        for arg, param in zip(instr.args, callee.params):
            state = subtype_flow(state, self.operand_type(arg), inst(param))
        # 'a: 'b lets loans of 'a reach 'b; repeat for transitive chains
        for _ in range(len(callee.outlives)):
            for a, b in callee.outlives:
                state = state.flow(subst[a], subst[b])
        return subtype_flow(state, inst(callee.ret), self.type_of(instr.dest))

    def effect(self, node: int, state: AbstractState) -> AbstractState:
        match self.fn.nodes[node]:
            case ir.Assign(place=p, rvalue=rv):
                return self.assign(node, p, rv, state)
            case ir.Call() as call:
                return self.call(call, state)
        return state

    def kill_dead(self, node: int, state: AbstractState) -> AbstractState:
        live = self.liveness.after[node]
        for r in range(len(self.fn.regions)):
            if r not in live and r not in self.universal:
                state = state.kill(r)
        return state

    def __call__(self, node: int, state: AbstractState) -> AbstractState:
        return self.kill_dead(node, self.effect(node, state))

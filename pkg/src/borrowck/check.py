"""
Borrow checking: solve the loans dataflow, then check every access.

A loan is in scope at a node when some region live there holds it. Accesses
conflict with in-scope loans of overlapping places: reads and shared borrows
only with mutable loans, writes, moves and mutable borrows with any loan.
Places overlap when one is a prefix of the other (a Box dereference is just
another step of the path); with field sensitivity off, any two places rooted
at the same local overlap. An access through a reference also overlaps
whatever the loans held by the reference's regions borrowed; conflicts found
that way are not reported again for loans already named in a diagnostic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import StrEnum

from src.analysis.dataflow import Direction, FlowResult, Semilattice, solve
from src.analysis.liveness import RegionLiveness, region_liveness
from src.borrowck.domain import AbstractState, LoanTable, collect_loans
from src.borrowck.transfer import BorrowTransfer, callee_table
from src.config.settings import get_settings
from src.core.diagnostics import Diagnostic, Kind, make
from src.core.log import get_logger
from src.frontend.types import RefTy, UnitTy, regions_of
from src.ir import rustir as ir

logger = get_logger("borrowck")


class Access(StrEnum):
    READ = "read"
    WRITE = "write"
    MOVE = "move"
    SHARED_BORROW = "shared-borrow"
    MUT_BORROW = "mut-borrow"
    DROP = "drop"
    STORAGE_DEAD = "storage-dead"


_CONFLICT_KIND = {
    Access.READ: Kind.USE_WHILE_MUTABLY_BORROWED,
    Access.SHARED_BORROW: Kind.USE_WHILE_MUTABLY_BORROWED,
    Access.MUT_BORROW: Kind.MUTABLE_BORROW_WHILE_BORROWED,
    Access.MOVE: Kind.MOVE_WHILE_BORROWED,
    Access.WRITE: Kind.ASSIGN_WHILE_BORROWED,
    Access.DROP: Kind.STORAGE_DEAD_WHILE_BORROWED,
    Access.STORAGE_DEAD: Kind.STORAGE_DEAD_WHILE_BORROWED,
}

_VERB = {
    Access.READ: "use",
    Access.SHARED_BORROW: "borrow as immutable",
    Access.MUT_BORROW: "borrow as mutable",
    Access.MOVE: "move out of",
    Access.WRITE: "assign to",
}


class BorrowAnalysis:
    """Loans dataflow of one function; shared by the checker and `--dump=dataflow:borrow`."""

    def __init__(self, fn: ir.RirFunction, module: ir.RirModule) -> None:
        self.fn = fn
        self.adts = module.adts
        self.loans: LoanTable = collect_loans(fn)
        self.liveness: RegionLiveness = region_liveness(fn)
        self.transfer = BorrowTransfer(fn, module.adts, self.loans, callee_table(module), self.liveness)
        regions = len(fn.regions)
        self.lattice: Semilattice[AbstractState] = Semilattice(
            bottom=self.transfer.bottom(),
            join=AbstractState.join,
            leq_fn=AbstractState.leq,
            height=2 * regions + regions * max(len(self.loans), 1) + 1,
        )

    def solve(self) -> FlowResult[AbstractState]:
        return solve(self.fn, self.lattice, self.transfer, self.transfer.entry_state(), Direction.FORWARD)

    @staticmethod
    def render(state: AbstractState) -> str:
        return state.render()


def _outlives_closure(fn: ir.RirFunction) -> set[tuple[int, int]]:
    universal = fn.universal_regions
    closure = {(u, u) for u in universal} | set(fn.outlives)
    changed = True
    while changed:
        changed = False
        for a, b in list(closure):
            for c, d in list(closure):
                if b == c and (a, d) not in closure:
                    closure.add((a, d))
                    changed = True
    return closure


def _derefs_ref_from(fn: ir.RirFunction, adts: ir.AdtTable, place: ir.Place, start: int) -> bool:
    """True when place dereferences a reference at projection index >= start."""
    base = fn.locals[place.local].ty
    ty = base
    for i, proj in enumerate(place.projections):
        if i >= start and isinstance(proj, ir.Deref) and isinstance(ty, RefTy):
            return True
        ty = adts.place_type(base, place.projections[: i + 1])
    return False


@dataclass
class AccessChecker:
    analysis: BorrowAnalysis
    flow: FlowResult[AbstractState]
    field_insensitive: bool = False
    diags: list[Diagnostic] = field(default_factory=list)
    reported: set[tuple[int, ir.Place]] = field(default_factory=set)
    escaped: set[int] = field(default_factory=set)
    violations: set[tuple[int, int]] = field(default_factory=set)
    # loans named in a diagnostic or created at a node that has one
    implicated: set[int] = field(default_factory=set)

    def __post_init__(self) -> None:
        self.fn = self.analysis.fn
        self.adts = self.analysis.adts
        self.loans = self.analysis.loans
        self.live = self.analysis.liveness
        self.closure = _outlives_closure(self.fn)

    # ─── Loans in scope ───

    def in_scope(self, node: int) -> list[int]:
        state = self.flow.before(node)
        ids: set[int] = set()
        for r in self.live.live_at(node):
            ids |= state.loans_of(r)
        return self.loans.real(ids)

    def escaping(self, node: int) -> set[int]:
        """Real loans held by a universal region: they must outlive the call."""
        state = self.flow.before(node)
        ids: set[int] = set()
        for u in self.fn.universal_regions:
            ids |= state.loans_of(u)
        return set(self.loans.real(ids))

    # ─── Overlap ───

    def overlaps(self, access: ir.Place, loan: ir.Place, shallow: bool = False) -> bool:
        if access.local != loan.local:
            return False
        if self.field_insensitive:
            related = True
        else:
            related = access.is_prefix_of(loan) or loan.is_prefix_of(access)
        if not related:
            return False
        if shallow and access.is_prefix_of(loan) and access != loan:
            # memory reached through a reference stored in `access` is not overwritten
            return not _derefs_ref_from(self.fn, self.adts, loan, len(access.projections))
        return True

    def alias_targets(self, node: int, place: ir.Place) -> list[tuple[int, ir.Place]]:
        """(loan, place) pairs for each reference dereferenced along place.

        The loans are the real ones held by any region of the reference's
        type; loans of its outermost region are extended by the rest of the
        access path.
        """
        state = self.flow.before(node)
        base = self.fn.locals[place.local].ty
        ty = base
        out: list[tuple[int, ir.Place]] = []
        for i, proj in enumerate(place.projections):
            if isinstance(proj, ir.Deref) and isinstance(ty, RefTy):
                rest = place.projections[i + 1 :]
                for region in regions_of(ty):
                    if not isinstance(region, int):
                        continue
                    for lid in self.loans.real(state.loans_of(region)):
                        held = self.loans[lid].place
                        assert held is not None
                        if region == ty.region:
                            held = ir.Place(held.local, held.projections + rest)
                        out.append((lid, held))
            ty = self.adts.place_type(base, place.projections[: i + 1])
        return out

    def aliased_conflicts(self, node: int, access: Access, place: ir.Place, scope: list[int]) -> list[int]:
        targets = self.alias_targets(node, place)
        held = {lid for lid, _ in targets}
        if not targets or held & self.implicated:
            return []
        return [
            lid
            for lid in scope
            if lid not in held
            and lid not in self.implicated
            and any(self.conflicts(access, target, lid) for _, target in targets)
        ]

    def conflicts(self, access: Access, place: ir.Place, loan_id: int) -> bool:
        loan = self.loans[loan_id]
        assert loan.place is not None
        if access in (Access.READ, Access.SHARED_BORROW) and not loan.mutable:
            return False
        if access in (Access.DROP, Access.STORAGE_DEAD):
            # a dying reference leaves the memory it points to untouched
            if loan.place.local == place.local and _derefs_ref_from(
                self.fn, self.adts, loan.place, len(place.projections)
            ):
                return False
        return self.overlaps(place, loan.place, shallow=access is Access.WRITE)

    # ─── Reporting ───

    def describe(self, place: ir.Place) -> str:
        return ir.describe_place(self.fn, self.adts, place)

    def report(self, kind: Kind, node: int, place: ir.Place, loan: int | None, message: str) -> None:
        if (node, place) in self.reported:
            return
        self.reported.add((node, place))
        if loan is not None:
            self.implicated.add(loan)
        created = self.loans.by_node.get(node)
        if created is not None:
            self.implicated.add(created)
        self.diags.append(
            make(
                kind,
                message,
                self.fn.nodes[node].span,
                function=self.fn.name,
                function_index=self.fn.index,
                node=node,
                place=self.describe(place),
                loan=loan,
            )
        )

    def access(self, node: int, access: Access, place: ir.Place, scope: list[int]) -> None:
        hits = [lid for lid in scope if self.conflicts(access, place, lid)]
        if not hits and access not in (Access.DROP, Access.STORAGE_DEAD):
            hits = self.aliased_conflicts(node, access, place, scope)
        if not hits:
            return
        lid = hits[0]
        loan = self.loans[lid]
        assert loan.place is not None
        borrowed = self.describe(loan.place)
        if access in (Access.DROP, Access.STORAGE_DEAD):
            if lid in self.escaping(node):
                self.return_local(node, place, lid)
                return
            self.report(
                Kind.STORAGE_DEAD_WHILE_BORROWED, node, place, lid,
                f"`{borrowed}` does not live long enough: still borrowed (L{lid}) when it goes out of scope",
            )
            return
        how = "mutably " if loan.mutable else ""
        self.report(
            _CONFLICT_KIND[access], node, place, lid,
            f"cannot {_VERB[access]} `{self.describe(place)}` because `{borrowed}` is {how}borrowed (L{lid})",
        )

    def return_local(self, node: int, place: ir.Place, lid: int) -> None:
        if lid in self.escaped:
            return
        self.escaped.add(lid)
        loan = self.loans[lid]
        assert loan.place is not None
        self.report(
            Kind.RETURN_LOCAL_REFERENCE, node, place, lid,
            f"cannot return a reference to local data `{self.describe(loan.place)}` (L{lid})",
        )

    # ─── Per-instruction accesses ───

    def overwrite_follows(self, node: int, local: int) -> bool:
        """The drop is the first half of an assignment to the same local."""
        seen = 0
        cur = self.fn.nodes[node]
        while seen < 64:
            succ = ir.successors(cur)
            if len(succ) != 1:
                return False
            cur = self.fn.nodes[succ[0]]
            match cur:
                case ir.Assign(place=p):
                    if p.local == local:
                        return True
                    if self.fn.locals[p.local].kind is not ir.LocalKind.FLAG:
                        return False
                case ir.Drop(place=p) | ir.ConditionalDrop(place=p):
                    if p.local != local:
                        return False
                case ir.Nop():
                    pass
                case _:
                    return False
            seen += 1
        return False

    def operands(self, node: int, ops: list[ir.Operand], scope: list[int]) -> None:
        for op in ops:
            if isinstance(op, ir.Copy):
                self.access(node, Access.READ, op.place, scope)
            elif isinstance(op, ir.Move):
                self.access(node, Access.MOVE, op.place, scope)

    def check_node(self, node: int) -> None:
        scope = self.in_scope(node)
        match self.fn.nodes[node]:
            case ir.Assign(place=p, rvalue=rv):
                self.operands(node, ir.operand_places(rv), scope)
                if isinstance(rv, ir.Ref):
                    kind = Access.MUT_BORROW if rv.mutable else Access.SHARED_BORROW
                    self.access(node, kind, rv.place, scope)
                self.access(node, Access.WRITE, p, scope)
            case ir.Call(dest=d, args=args):
                self.operands(node, list(args), scope)
                self.access(node, Access.WRITE, d, scope)
            case ir.If(cond=c):
                self.operands(node, [c], scope)
            case ir.Switch(place=p):
                self.access(node, Access.READ, p, scope)
            case ir.Drop(place=p) | ir.ConditionalDrop(place=p):
                if not self.overwrite_follows(node, p.local):
                    self.access(node, Access.DROP, p, scope)
            case ir.StorageDead(local=local):
                self.access(node, Access.STORAGE_DEAD, ir.Place(local), scope)
            case ir.Return():
                if not isinstance(self.fn.return_type, UnitTy):
                    self.access(node, Access.READ, ir.Place(0), scope)
                for lid in sorted(self.escaping(node)):
                    loan = self.loans[lid]
                    assert loan.place is not None
                    if not ir.through_ref_deref(self.fn, self.adts, loan.place):
                        self.return_local(node, ir.Place(0), lid)
        self.universal_violations(node)

    def universal_violations(self, node: int) -> None:
        state = self.flow.before(node)
        for b in self.fn.universal_regions:
            for lid in sorted(state.loans_of(b)):
                a = self.loans[lid].universal
                if a is None or (a, b) in self.closure or (a, b) in self.violations:
                    continue
                self.violations.add((a, b))
                name_a = self.fn.regions[a].name
                name_b = self.fn.regions[b].name
                self.diags.append(
                    make(
                        Kind.UNIVERSAL_REGION_VIOLATION,
                        f"lifetime may not live long enough: data with lifetime '{name_a} flows into "
                        f"'{name_b}, which requires '{name_a}: '{name_b}",
                        self.fn.nodes[node].span,
                        function=self.fn.name,
                        function_index=self.fn.index,
                        node=node,
                    )
                )

    def check(self) -> list[Diagnostic]:
        for node in sorted(self.fn.nodes):
            self.check_node(node)
        return self.diags


def check_accesses(
    analysis: BorrowAnalysis, flow: FlowResult[AbstractState], field_insensitive: bool = False
) -> list[Diagnostic]:
    return AccessChecker(analysis, flow, field_insensitive).check()


def borrow_check(
    fn: ir.RirFunction, module: ir.RirModule, field_insensitive: bool | None = None
) -> list[Diagnostic]:
    """Region liveness, loans dataflow, access checks; diagnostics sorted by node then loan."""
    if field_insensitive is None:
        field_insensitive = get_settings().borrow_field_insensitive
    analysis = BorrowAnalysis(fn, module)
    flow = analysis.solve()
    diags = check_accesses(analysis, flow, field_insensitive)
    diags.sort(key=lambda d: d.sort_key())
    logger.debug(
        "borrow_check",
        function=fn.name,
        loans=len(analysis.loans),
        regions=len(fn.regions),
        iterations=flow.iterations,
        diagnostics=len(diags),
    )
    return diags

"""
Move checking.

A forward may-analysis over move paths: the state holds every path that may
have been moved out (or never initialized) on some path to the node. Reads,
moves and borrows of a place related to such a path are rejected, as is any
move out of a place behind a reference.
"""

from __future__ import annotations

from src.analysis.dataflow import Direction, FlowResult, Semilattice, solve
from src.analysis.move_paths import MovePathUniverse, move_paths
from src.core.diagnostics import Diagnostic, Kind, make
from src.core.log import get_logger
from src.frontend.types import UnitTy
from src.ir import rustir as ir

logger = get_logger("move_check")

MovedSet = frozenset[int]


class MoveAnalysis:
    def __init__(self, fn: ir.RirFunction, adts: ir.AdtTable) -> None:
        self.fn = fn
        self.adts = adts
        self.universe: MovePathUniverse = move_paths(fn, adts)
        self.lattice: Semilattice[MovedSet] = Semilattice(
            bottom=frozenset(), join=frozenset.union, leq_fn=frozenset.issubset,
            height=len(self.universe) + 1,
        )

    def entry_state(self) -> MovedSet:
        uninit = set()
        for local, decl in enumerate(self.fn.locals):
            if decl.kind is ir.LocalKind.PARAM:
                continue
            if decl.kind is ir.LocalKind.RETURN and isinstance(decl.ty, UnitTy):
                continue
            uninit.add(self.universe.root(local))
        return frozenset(uninit)

    def trackable(self, place: ir.Place) -> bool:
        return not ir.through_ref_deref(self.fn, self.adts, place)

    def _move(self, state: set[int], op: ir.Operand) -> None:
        if isinstance(op, ir.Move) and self.trackable(op.place):
            i = self.universe.lookup(op.place)
            if i is not None:
                state.add(i)

    def _write(self, state: set[int], place: ir.Place) -> None:
        state.difference_update(self.universe.extensions(place))

    def transfer(self, node: int, moved: MovedSet) -> MovedSet:
        instr = self.fn.nodes[node]
        state = set(moved)
        match instr:
            case ir.Assign(place=p, rvalue=rv):
                for op in ir.operand_places(rv):
                    self._move(state, op)
                self._write(state, p)
            case ir.Call(dest=d, args=args):
                for op in args:
                    self._move(state, op)
                self._write(state, d)
            case ir.Drop(place=p) | ir.ConditionalDrop(place=p):
                i = self.universe.lookup(p)
                if i is not None:
                    state.add(i)
            case ir.StorageDead(local=l):
                state.add(self.universe.root(l))
        return frozenset(state)

    def solve(self) -> FlowResult[MovedSet]:
        return solve(self.fn, self.lattice, self.transfer, self.entry_state(), Direction.FORWARD)


def _ever_moved_locals(fn: ir.RirFunction) -> set[int]:
    out: set[int] = set()
    for instr in fn.nodes.values():
        match instr:
            case ir.Assign(rvalue=rv):
                out.update(op.place.local for op in ir.operand_places(rv) if isinstance(op, ir.Move))
            case ir.Call(args=args):
                out.update(op.place.local for op in args if isinstance(op, ir.Move))
    return out


def _assigned_target(instr: ir.Instr) -> int | None:
    match instr:
        case ir.Assign(place=p) | ir.Call(dest=p):
            return p.local
    return None


def ever_assigned(fn: ir.RirFunction) -> FlowResult[frozenset[int]]:
    """Locals that may have been written on some path since their storage went live.

    Moves do not clear a local here: an immutable binding stays assigned after
    its value is moved out.
    """
    lattice: Semilattice[frozenset[int]] = Semilattice(
        bottom=frozenset(), join=frozenset.union, leq_fn=frozenset.issubset, height=len(fn.locals) + 1
    )

    def transfer(node: int, assigned: frozenset[int]) -> frozenset[int]:
        instr = fn.nodes[node]
        if isinstance(instr, ir.StorageDead):
            return assigned - {instr.local}
        local = _assigned_target(instr)
        return assigned if local is None else assigned | {local}

    params = frozenset(range(1, fn.param_count + 1))
    return solve(fn, lattice, transfer, params, Direction.FORWARD)


class _Checker:
    def __init__(self, analysis: MoveAnalysis, flow: FlowResult[MovedSet]) -> None:
        self.a = analysis
        self.fn = analysis.fn
        self.flow = flow
        self.assigned = ever_assigned(self.fn)
        self.moved_locals = _ever_moved_locals(self.fn)
        self.diags: list[Diagnostic] = []
        self.reported: set[tuple[int, ir.Place]] = set()

    def report(self, kind: Kind, node: int, place: ir.Place, message: str) -> None:
        if (node, place) in self.reported:
            return
        self.reported.add((node, place))
        self.diags.append(
            make(
                kind,
                message,
                self.fn.nodes[node].span,
                function=self.fn.name,
                function_index=self.fn.index,
                node=node,
                place=self.describe(place),
            )
        )

    def describe(self, place: ir.Place) -> str:
        return ir.describe_place(self.fn, self.a.adts, place)

    def moved_conflict(self, state: MovedSet, place: ir.Place, prefixes_only: bool) -> int | None:
        related = (
            frozenset(self.a.universe.prefixes(place))
            if prefixes_only
            else self.a.universe.conflicting(place)
        )
        hits = sorted(state & related)
        return hits[0] if hits else None

    def use_kind(self, path: int) -> Kind:
        local = self.a.universe.paths[path].local
        if local in self.moved_locals:
            return Kind.USE_AFTER_MOVE
        return Kind.USE_OF_UNINITIALIZED

    def read(self, node: int, state: MovedSet, op: ir.Operand) -> None:
        if isinstance(op, ir.Const):
            return
        place = op.place
        if isinstance(op, ir.Move) and not self.a.trackable(place):
            self.report(
                Kind.CANNOT_MOVE_OUT_OF_REFERENCE, node, place,
                f"cannot move out of `{self.describe(place)}`, which is behind a reference",
            )
            return
        hit = self.moved_conflict(state, place, prefixes_only=False)
        if hit is not None:
            kind = self.use_kind(hit)
            verb = "use of moved value" if kind is Kind.USE_AFTER_MOVE else "use of possibly-uninitialized"
            self.report(kind, node, place, f"{verb}: `{self.describe(place)}`")

    def borrow(self, node: int, state: MovedSet, place: ir.Place) -> None:
        hit = self.moved_conflict(state, place, prefixes_only=False)
        if hit is not None:
            kind = self.use_kind(hit)
            if kind is Kind.USE_AFTER_MOVE:
                self.report(
                    Kind.BORROW_AFTER_MOVE, node, place, f"borrow of moved value: `{self.describe(place)}`"
                )
            else:
                self.report(
                    kind, node, place, f"borrow of possibly-uninitialized `{self.describe(place)}`"
                )

    def write(self, node: int, state: MovedSet, place: ir.Place) -> None:
        hits = sorted(state & frozenset(self.a.universe.strict_prefixes(place)))
        if hits:
            kind = self.use_kind(hits[0])
            what = "moved" if kind is Kind.USE_AFTER_MOVE else "possibly-uninitialized"
            self.report(
                kind, node, place,
                f"assign to part of {what} value: `{self.describe(self.a.universe.paths[hits[0]])}`",
            )

    def reassign(self, node: int, place: ir.Place) -> None:
        decl = self.fn.locals[place.local]
        if place.projections or decl.mutable or decl.kind is not ir.LocalKind.USER:
            return
        if place.local in self.assigned.before(node):
            self.report(
                Kind.MUTABILITY_ERROR, node, place,
                f"cannot assign twice to immutable variable `{decl.name}`",
            )

    def operands(self, node: int, state: MovedSet, ops: list[ir.Operand]) -> None:
        """Operands are read left to right; an earlier move is visible to later ones."""
        running = set(state)
        for op in ops:
            self.read(node, frozenset(running), op)
            if isinstance(op, ir.Move) and self.a.trackable(op.place):
                i = self.a.universe.lookup(op.place)
                if i is not None:
                    running.add(i)

    def check(self) -> list[Diagnostic]:
        for node in sorted(self.fn.nodes):
            state = self.flow.before(node)
            match self.fn.nodes[node]:
                case ir.Assign(place=p, rvalue=rv):
                    self.operands(node, state, ir.operand_places(rv))
                    if isinstance(rv, ir.Ref):
                        self.borrow(node, state, rv.place)
                    self.write(node, state, p)
                    self.reassign(node, p)
                case ir.Call(dest=d, args=args):
                    self.operands(node, state, list(args))
                    self.write(node, state, d)
                    self.reassign(node, d)
                case ir.If(cond=c):
                    self.read(node, state, c)
                case ir.Switch(place=p):
                    hit = self.moved_conflict(state, p, prefixes_only=True)
                    if hit is not None:
                        kind = self.use_kind(hit)
                        self.report(kind, node, p, f"use of moved value: `{self.describe(p)}`")
                case ir.Return():
                    if not isinstance(self.fn.return_type, UnitTy):
                        self.read(node, state, ir.Copy(ir.Place(0)))
        return self.diags


def move_check(fn: ir.RirFunction, adts: ir.AdtTable) -> list[Diagnostic]:
    """Use-after-move, borrow-after-move and move-out-of-reference diagnostics."""
    analysis = MoveAnalysis(fn, adts)
    flow = analysis.solve()
    diags = _Checker(analysis, flow).check()
    logger.debug(
        "move_check", function=fn.name, paths=len(analysis.universe), diagnostics=len(diags)
    )
    return diags

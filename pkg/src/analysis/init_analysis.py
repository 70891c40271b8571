"""
Maybe-initialized / maybe-uninitialized analysis over move paths.

Both sets are computed by one forward pass: an initialization adds a path and
everything under it to maybe-init and removes them from maybe-uninit; a move,
drop or StorageDead does the reverse. A path is definitely initialized when it
is maybe-init and not maybe-uninit.
"""

from __future__ import annotations

from dataclasses import dataclass

from src.analysis.dataflow import Direction, FlowResult, Semilattice, solve
from src.analysis.move_paths import MovePathUniverse, move_paths
from src.core.log import get_logger
from src.frontend.types import UnitTy
from src.ir import rustir as ir

logger = get_logger("init_analysis")


@dataclass(frozen=True, slots=True)
class InitState:
    maybe_init: frozenset[int] = frozenset()
    maybe_uninit: frozenset[int] = frozenset()

    def join(self, other: InitState) -> InitState:
        return InitState(self.maybe_init | other.maybe_init, self.maybe_uninit | other.maybe_uninit)

    def leq(self, other: InitState) -> bool:
        return self.maybe_init <= other.maybe_init and self.maybe_uninit <= other.maybe_uninit

    def definitely_init(self, path: int) -> bool:
        return path in self.maybe_init and path not in self.maybe_uninit

    def definitely_uninit(self, path: int) -> bool:
        return path in self.maybe_uninit and path not in self.maybe_init

    def ambiguous(self, path: int) -> bool:
        return path in self.maybe_init and path in self.maybe_uninit

    def init(self, paths: frozenset[int]) -> InitState:
        return InitState(self.maybe_init | paths, self.maybe_uninit - paths)

    def uninit(self, paths: frozenset[int]) -> InitState:
        return InitState(self.maybe_init - paths, self.maybe_uninit | paths)


@dataclass(frozen=True, slots=True)
class InitEffect:
    """Paths an instruction deinitializes, then initializes, in that order."""

    deinit: frozenset[int]
    init: frozenset[int]


class InitAnalysis:
    def __init__(self, fn: ir.RirFunction, adts: ir.AdtTable) -> None:
        self.fn = fn
        self.adts = adts
        self.universe: MovePathUniverse = move_paths(fn, adts)
        self.lattice: Semilattice[InitState] = Semilattice(
            bottom=InitState(), join=InitState.join, leq_fn=InitState.leq,
            height=2 * len(self.universe) + 1,
        )

    def entry_state(self) -> InitState:
        init: set[int] = set()
        uninit: set[int] = set()
        for local, decl in enumerate(self.fn.locals):
            paths = self.universe.extensions(ir.Place(local))
            starts_init = decl.kind is ir.LocalKind.PARAM or (
                decl.kind is ir.LocalKind.RETURN and isinstance(decl.ty, UnitTy)
            )
            (init if starts_init else uninit).update(paths)
        return InitState(frozenset(init), frozenset(uninit))

    def effect(self, instr: ir.Instr) -> InitEffect:
        deinit: set[int] = set()
        init: frozenset[int] = frozenset()
        match instr:
            case ir.Assign(place=p, rvalue=rv):
                for op in ir.operand_places(rv):
                    if isinstance(op, ir.Move) and not ir.through_ref_deref(self.fn, self.adts, op.place):
                        deinit |= self.universe.extensions(op.place)
                init = self.universe.extensions(p)
            case ir.Call(dest=d, args=args):
                for op in args:
                    if isinstance(op, ir.Move) and not ir.through_ref_deref(self.fn, self.adts, op.place):
                        deinit |= self.universe.extensions(op.place)
                init = self.universe.extensions(d)
            case ir.Drop(place=p) | ir.ConditionalDrop(place=p):
                if not ir.through_ref_deref(self.fn, self.adts, p):
                    deinit |= self.universe.extensions(p)
            case ir.StorageDead(local=l):
                deinit |= self.universe.extensions(ir.Place(l))
        return InitEffect(frozenset(deinit), init)

    def transfer(self, node: int, state: InitState) -> InitState:
        eff = self.effect(self.fn.nodes[node])
        return state.uninit(eff.deinit).init(eff.init)

    def solve(self) -> FlowResult[InitState]:
        return solve(self.fn, self.lattice, self.transfer, self.entry_state(), Direction.FORWARD)

    def status_path(self, place: ir.Place) -> int:
        """The tracked path whose bits describe place (its longest tracked prefix)."""
        return self.universe.longest_prefix(place)

    def render(self, state: InitState) -> str:
        def names(paths: frozenset[int]) -> str:
            return self.universe.render(self.fn, self.adts, paths)

        return f"init={names(state.maybe_init)} uninit={names(state.maybe_uninit)}"


def init_analysis(fn: ir.RirFunction, adts: ir.AdtTable) -> FlowResult[InitState]:
    analysis = InitAnalysis(fn, adts)
    flow = analysis.solve()
    logger.debug("init_analysis", function=fn.name, paths=len(analysis.universe))
    return flow

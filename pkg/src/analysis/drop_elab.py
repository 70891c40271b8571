"""
Drop elaboration.

Rewrites every Drop marker left by lowering using the initialization analysis:

* nothing to free (no Box inside the type) or definitely uninitialized: Nop
* definitely initialized everywhere below the place: unconditional Drop
* maybe initialized: ConditionalDrop guarded by a boolean drop flag
* partially moved (some tracked sub-path is not definitely initialized): the
  drop is opened into per-field drops for a struct, a content drop followed by
  a shallow free for a Box, or a discriminant switch for an enum

Flags are fresh bool locals, one per move path that needs one. They are
initialized at a new entry chain (true for paths initialized on entry) and
kept current by assignments inserted after every instruction that initializes
or deinitializes the path. Elaborating elaborated IR changes nothing.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from src.analysis.dataflow import FlowResult
from src.analysis.init_analysis import InitAnalysis, InitState
from src.core.diagnostics import Span
from src.core.log import get_logger
from src.frontend.types import BOOL, AdtTy, BoxTy, RlType
from src.ir import rustir as ir

logger = get_logger("drop_elab")

# ─── Drop plans ───


@dataclass(frozen=True, slots=True)
class PlanDrop:
    place: ir.Place
    shallow: bool = False


@dataclass(frozen=True, slots=True)
class PlanCond:
    place: ir.Place
    path: int
    shallow: bool = False


@dataclass(frozen=True, slots=True)
class PlanSwitch:
    place: ir.Place
    arms: tuple[tuple[int, tuple[Plan, ...]], ...]
    variant_count: int
    guard: int | None = None  # path whose flag must be set to read the discriminant


Plan = PlanDrop | PlanCond | PlanSwitch


@dataclass
class _Elaborator:
    analysis: InitAnalysis
    flow: FlowResult[InitState]
    flagged: set[int] = field(default_factory=set)

    @property
    def fn(self) -> ir.RirFunction:
        return self.analysis.fn

    @property
    def adts(self) -> ir.AdtTable:
        return self.analysis.adts

    # ─── Planning ───

    def by_status(self, state: InitState, path: int, place: ir.Place, shallow: bool = False) -> list[Plan]:
        if state.definitely_init(path):
            return [PlanDrop(place, shallow)]
        if path not in state.maybe_init:
            return []
        self.flagged.add(path)
        return [PlanCond(place, path, shallow)]

    def plan(self, state: InitState, place: ir.Place) -> list[Plan]:
        ty = self.fn.place_type(place, self.adts)
        if not self.adts.needs_drop(ty):
            return []
        if ir.through_ref_deref(self.fn, self.adts, place):
            return [PlanDrop(place)]
        universe = self.analysis.universe
        path = universe.lookup(place)
        if path is None:
            return self.by_status(state, universe.longest_prefix(place), place)
        below = universe.descendants[path]
        if all(state.definitely_init(d) for d in below):
            return [PlanDrop(place)]
        if not any(d in state.maybe_init for d in below):
            return []
        if len(below) == 1:
            return self.by_status(state, path, place)
        return self.open(state, path, place, ty)

    def open(self, state: InitState, path: int, place: ir.Place, ty: RlType) -> list[Plan]:
        """Drop a partially moved place piece by piece."""
        if isinstance(ty, BoxTy):
            return self.plan(state, place.deref()) + self.by_status(state, path, place, shallow=True)
        assert isinstance(ty, AdtTy)
        if ty.name in self.adts.structs:
            out: list[Plan] = []
            for k in range(len(self.adts.structs[ty.name])):
                out.extend(self.plan(state, place.field(k)))
            return out
        payloads = self.adts.enums[ty.name]
        arms: list[tuple[int, tuple[Plan, ...]]] = []
        for v, payload in enumerate(payloads):
            variant = place.downcast(v)
            steps: list[Plan] = []
            for k in range(len(payload)):
                steps.extend(self.plan(state, variant.field(k)))
            if steps:
                arms.append((v, tuple(steps)))
        if not arms:
            return []
        guard = None
        if not state.definitely_init(path):
            guard = path
            self.flagged.add(path)
        return [PlanSwitch(place, tuple(arms), len(payloads), guard)]

    # ─── Emission ───

    def emit_plans(
        self,
        nodes: dict[int, ir.Instr],
        plans: list[Plan] | tuple[Plan, ...],
        next_: int,
        span: Span,
        flags: dict[int, int],
        head: int | None = None,
    ) -> int:
        """Chain plans in order ending at next_; the first one gets id head if given."""
        if not plans:
            if head is not None:
                nodes[head] = ir.Nop(next_, span=span)
                return head
            return next_
        target = next_
        for i in range(len(plans) - 1, -1, -1):
            node_id = head if (i == 0 and head is not None) else None
            target = self.emit_plan(nodes, plans[i], target, span, flags, node_id)
        return target

    def emit_plan(
        self,
        nodes: dict[int, ir.Instr],
        plan: Plan,
        next_: int,
        span: Span,
        flags: dict[int, int],
        node_id: int | None,
    ) -> int:
        def place_node(instr: ir.Instr) -> int:
            nid = node_id if node_id is not None else _fresh(nodes)
            nodes[nid] = instr
            return nid

        match plan:
            case PlanDrop(place=p, shallow=sh):
                return place_node(ir.Drop(p, next_, shallow=sh, span=span))
            case PlanCond(place=p, path=path, shallow=sh):
                return place_node(
                    ir.ConditionalDrop(p, flags[path], next_, shallow=sh, span=span)
                )
            case PlanSwitch(place=p, arms=arms, variant_count=count, guard=guard):
                # the guard's id is taken first so it heads the emitted ladder
                guard_id = place_node(ir.Nop(next_)) if guard is not None else None
                targets = tuple(
                    (v, self.emit_plans(nodes, steps, next_, span, flags)) for v, steps in arms
                )
                otherwise = next_ if len(targets) < count else None
                switch = ir.Switch(p, targets, otherwise, span=span)
                if guard_id is None:
                    return place_node(switch)
                sid = _fresh(nodes)
                nodes[sid] = switch
                nodes[guard_id] = ir.If(ir.Copy(ir.Place(flags[guard])), sid, next_, span=span)
                return guard_id
        raise AssertionError(plan)


def _fresh(nodes: dict[int, ir.Instr]) -> int:
    return max(nodes, default=-1) + 1


def _flag_name(fn: ir.RirFunction, adts: ir.AdtTable, place: ir.Place) -> str:
    return "flag:" + ir.describe_place(fn, adts, place)


def elaborate(fn: ir.RirFunction, adts: ir.AdtTable, flow: FlowResult[InitState] | None = None) -> ir.RirFunction:
    """Return a copy of fn with every Drop resolved; fn itself is not modified."""
    analysis = InitAnalysis(fn, adts)
    if flow is None:
        flow = analysis.solve()
    el = _Elaborator(analysis, flow)

    plans: dict[int, list[Plan]] = {}
    for n in sorted(fn.nodes):
        instr = fn.nodes[n]
        if isinstance(instr, ir.Drop) and not instr.shallow:
            plans[n] = el.plan(flow.before(n), instr.place)

    locals_ = list(fn.locals)
    flags: dict[int, int] = {}
    for path in sorted(el.flagged):
        place = analysis.universe.paths[path]
        locals_.append(ir.LocalDecl(_flag_name(fn, adts, place), BOOL, True, ir.LocalKind.FLAG))
        flags[path] = len(locals_) - 1

    nodes: dict[int, ir.Instr] = dict(fn.nodes)

    # flag maintenance after every instruction touching a flagged path
    after: dict[int, int] = {}
    for n in sorted(fn.nodes):
        instr = fn.nodes[n]
        if not flags or isinstance(instr, (ir.Goto, ir.If, ir.Switch, ir.Return)):
            continue
        effect = analysis.effect(instr)
        updates = [
            (flags[p], p in effect.init)
            for p in sorted(flags)
            if p in effect.init or p in effect.deinit
        ]
        if not updates:
            continue
        target = ir.successors(instr)[0]
        for local, value in reversed(updates):
            nid = _fresh(nodes)
            nodes[nid] = ir.Assign(ir.Place(local), ir.Use(ir.Const(value, BOOL)), target, span=instr.span)
            target = nid
        after[n] = target

    for n in sorted(fn.nodes):
        instr = fn.nodes[n]
        next_ = after.get(n)
        if n in plans:
            assert isinstance(instr, ir.Drop)
            follow = next_ if next_ is not None else instr.next
            el.emit_plans(nodes, plans[n], follow, instr.span, flags, head=n)
        elif next_ is not None:
            nodes[n] = replace(instr, next=next_)

    entry = fn.entry
    chain: list[int] = []
    if flags:
        entry_state = analysis.entry_state()
        target = fn.entry
        for path in sorted(flags, reverse=True):
            nid = _fresh(nodes)
            value = path in entry_state.maybe_init
            nodes[nid] = ir.Assign(ir.Place(flags[path]), ir.Use(ir.Const(value, BOOL)), target, span=fn.span)
            target = nid
            chain.append(nid)
        entry = target
        chain.reverse()

    order = chain + sorted(n for n in nodes if n not in set(chain))
    mapping = {old: new for new, old in enumerate(order)}
    renumbered = {mapping[old]: ir.retarget(nodes[old], mapping) for old in order}

    out = replace(fn, locals=locals_, nodes=renumbered, entry=mapping[entry])
    ir.validate(out)
    logger.debug(
        "elaborated",
        function=fn.name,
        drops=len(plans),
        flags=len(flags),
        nodes=len(renumbered),
    )
    return out


def elaborate_module(module: ir.RirModule) -> ir.RirModule:
    return ir.RirModule([elaborate(fn, module.adts) for fn in module.functions], module.adts)

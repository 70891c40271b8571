"""Worklist solver: agreement with a chaotic-iteration oracle on random CFGs, fixpoint checks."""

from __future__ import annotations

import random
from collections.abc import Callable
from typing import TypeVar

import pytest

from src.analysis.dataflow import (
    Direction,
    FlowResult,
    Semilattice,
    WorklistOrder,
    boundary_nodes,
    check_fixpoint,
    flow_edges,
    solve,
)
from src.analysis.init_analysis import InitAnalysis
from src.analysis.liveness import uses_and_defs
from src.core.errors import FixpointDivergence
from src.frontend.types import I32
from src.ir import rustir as ir

S = TypeVar("S")

LOCALS = 4


def random_function(rng: random.Random) -> ir.RirFunction:
    size = rng.randint(2, 8)
    nodes: dict[int, ir.Instr] = {}
    for n in range(size - 1):
        target = rng.randrange(size)
        roll = rng.random()
        if roll < 0.35:
            dst, a, b = (rng.randrange(LOCALS) for _ in range(3))
            rv = ir.BinaryOp("+", ir.Copy(ir.Place(a)), ir.Copy(ir.Place(b)))
            nodes[n] = ir.Assign(ir.Place(dst), rv, target)
        elif roll < 0.55:
            moved = ir.Move(ir.Place(rng.randrange(LOCALS)))
            nodes[n] = ir.Assign(ir.Place(rng.randrange(LOCALS)), ir.Use(moved), target)
        elif roll < 0.65:
            nodes[n] = ir.StorageDead(rng.randrange(1, LOCALS), target)
        elif roll < 0.85:
            nodes[n] = ir.If(ir.Copy(ir.Place(rng.randrange(LOCALS))), target, rng.randrange(size))
        else:
            nodes[n] = ir.Goto(target)
    nodes[size - 1] = ir.Return()
    locals_ = [ir.LocalDecl("ret", I32, True, ir.LocalKind.RETURN)]
    locals_ += [ir.LocalDecl(f"v{i}", I32, True, ir.LocalKind.USER) for i in range(1, LOCALS)]
    return ir.RirFunction(name="random", locals=locals_, param_count=0, nodes=nodes, regions=[])


def chaotic(
    fn: ir.RirFunction,
    lattice: Semilattice[S],
    transfer: Callable[[int, S], S],
    entry: S,
    direction: Direction,
) -> FlowResult[S]:
    """Round-robin re-evaluation of every equation until nothing moves."""
    edges = flow_edges(fn, direction)
    sources: dict[int, list[int]] = {n: [] for n in fn.nodes}
    for u, targets in edges.items():
        for v in targets:
            sources[v].append(u)
    boundary = set(boundary_nodes(fn, direction))
    result: FlowResult[S] = FlowResult(direction=direction)
    result.ins = {n: lattice.bottom for n in fn.nodes}
    result.outs = {n: transfer(n, lattice.bottom) for n in fn.nodes}
    changed = True
    while changed:
        changed = False
        for n in sorted(fn.nodes):
            state = lattice.join(lattice.bottom, entry) if n in boundary else lattice.bottom
            for u in sources[n]:
                state = lattice.join(state, result.outs[u])
            out = transfer(n, state)
            if state != result.ins[n] or out != result.outs[n]:
                result.ins[n], result.outs[n] = state, out
                changed = True
    return result


LiveTransfer = Callable[[int, frozenset[int]], frozenset[int]]


def liveness_problem(fn: ir.RirFunction) -> tuple[Semilattice[frozenset[int]], LiveTransfer]:
    lattice: Semilattice[frozenset[int]] = Semilattice(frozenset(), frozenset.union, frozenset.issubset)

    def transfer(node: int, after: frozenset[int]) -> frozenset[int]:
        uses, defs = uses_and_defs(fn.nodes[node])
        return (after - defs) | uses

    return lattice, transfer


@pytest.mark.parametrize("order", list(WorklistOrder))
def test_liveness_matches_chaotic_iteration(order: WorklistOrder):
    rng = random.Random(20240611)
    for _ in range(200):
        fn = random_function(rng)
        lattice, transfer = liveness_problem(fn)
        got = solve(fn, lattice, transfer, frozenset(), Direction.BACKWARD, order)
        want = chaotic(fn, lattice, transfer, frozenset(), Direction.BACKWARD)
        assert got.ins == want.ins
        assert got.outs == want.outs
        assert check_fixpoint(fn, lattice, transfer, got) == []


def test_init_analysis_matches_chaotic_iteration():
    rng = random.Random(7)
    for _ in range(200):
        fn = random_function(rng)
        analysis = InitAnalysis(fn, ir.AdtTable())
        got = analysis.solve()
        want = chaotic(fn, analysis.lattice, analysis.transfer, analysis.entry_state(), Direction.FORWARD)
        assert got.ins == want.ins
        assert check_fixpoint(fn, analysis.lattice, analysis.transfer, got) == []


def test_before_and_after_follow_direction():
    fn = ir.RirFunction(
        name="f",
        locals=[ir.LocalDecl("ret", I32, True, ir.LocalKind.RETURN)],
        param_count=0,
        nodes={0: ir.Assign(ir.Place(0), ir.Use(ir.Const(1, I32)), 1), 1: ir.Return()},
        regions=[],
    )
    lattice, transfer = liveness_problem(fn)
    result = solve(fn, lattice, transfer, frozenset(), Direction.BACKWARD)
    assert result.before(1) == frozenset({0})
    assert result.after(0) == frozenset({0})
    assert result.before(0) == frozenset()


def test_non_monotone_transfer_hits_the_cap():
    fn = ir.RirFunction(
        name="loop",
        locals=[ir.LocalDecl("ret", I32, True, ir.LocalKind.RETURN)],
        param_count=0,
        nodes={0: ir.Goto(1), 1: ir.Goto(0)},
        regions=[],
    )
    # an unbounded counter never stabilises
    lattice: Semilattice[int] = Semilattice(0, max, height=4)
    with pytest.raises(FixpointDivergence):
        solve(fn, lattice, lambda _n, s: s + 1, 0, Direction.FORWARD)

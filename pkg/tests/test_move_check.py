"""Move checking: use-after-move, borrow-after-move, moves out of references, uninitialized reads."""

from __future__ import annotations

import random

import pytest

from src.analysis.move_check import MoveAnalysis, move_check
from src.analysis.move_paths import MovePathUniverse, move_paths
from src.core.diagnostics import Kind
from src.core.errors import CompileError
from src.corpus.loader import load_corpus
from src.ir import rustir as ir
from tests.conftest import codes, compile_source, lower_source


def move_kinds(source: str) -> list[Kind]:
    module = lower_source(source)
    return [d.kind for fn in module.functions for d in move_check(fn, module.adts)]


@pytest.mark.parametrize(
    ("body", "kind"),
    [
        ("let b = Box::new(1); let c = b; *b", Kind.USE_AFTER_MOVE),
        ("let b = Box::new(1); let c = b; let r = &b; 0", Kind.BORROW_AFTER_MOVE),
        ("let x: i32; x + 1", Kind.USE_OF_UNINITIALIZED),
        ("let b = Box::new(1); let mut i = 0; while i < 2 { let c = b; i = i + 1; } 0", Kind.USE_AFTER_MOVE),
    ],
)
def test_rejections(body: str, kind: Kind):
    assert move_kinds(f"fn main() -> i32 {{ {body} }}") == [kind]


def test_move_out_of_reference():
    kinds = move_kinds("fn f(r: &Box<i32>) -> Box<i32> { *r } fn main() -> i32 { 0 }")
    assert kinds == [Kind.CANNOT_MOVE_OUT_OF_REFERENCE]


def test_move_out_of_box_is_allowed():
    assert move_kinds("fn main() -> i32 { let b = Box::new(Box::new(1)); let i = *b; *i }") == []


def test_copy_types_do_not_move():
    assert move_kinds("fn main() -> i32 { let x = 1; let y = x; let r = &y; let s = r; x + *r + *s }") == []


def test_reinitialization_after_move():
    source = "fn main() -> i32 { let mut b = Box::new(1); let c = b; b = Box::new(2); *b + *c }"
    assert move_kinds(source) == []


def test_disjoint_field_moves():
    source = (
        "struct P { a: Box<i32>, b: Box<i32> }\n"
        "fn main() -> i32 { let p = P { a: Box::new(1), b: Box::new(2) }; let x = p.a; let y = p.b; *x + *y }"
    )
    assert move_kinds(source) == []


def test_whole_use_after_partial_move():
    source = (
        "struct P { a: Box<i32>, b: Box<i32> }\n"
        "fn main() -> i32 { let p = P { a: Box::new(1), b: Box::new(2) }; let x = p.a; let q = p; *x }"
    )
    assert move_kinds(source) == [Kind.USE_AFTER_MOVE]


def test_conditional_move_is_maybe_moved():
    source = "fn main(c: bool) -> i32 { let b = Box::new(1); if c { let d = b; } *b }"
    assert move_kinds(source) == [Kind.USE_AFTER_MOVE]


def test_stage_stops_after_move_check():
    result = compile_source("fn main() -> i32 { let b = Box::new(1); let c = b; *b }", stage="move-check")
    assert codes(result) == {"RL0101"}
    assert result.elaborated is None


def test_moved_state_after_the_move():
    module = lower_source("fn main() -> i32 { let b = Box::new(1); let c = b; 0 }")
    fn = module.function("main")
    analysis = MoveAnalysis(fn, module.adts)
    flow = analysis.solve()
    b = next(i for i, d in enumerate(fn.locals) if d.name == "b")
    path = analysis.universe.root(b)
    returns = [n for n, instr in fn.nodes.items() if type(instr).__name__ == "Return"]
    assert all(path in flow.before(n) for n in returns)


@pytest.mark.parametrize(
    "body",
    [
        "let x: i32; x = 1; x = 2; x",
        "let x: i32; let mut i = 0; while i < 2 { x = i; i = i + 1; } 0",
        "let b: Box<i32>; b = Box::new(1); let c = b; b = Box::new(2); *c",
        "let x: i32; if true { x = 1; } x = 2; x",
    ],
)
def test_immutable_local_assigned_twice(body: str):
    source = f"fn main() -> i32 {{ {body} }}"
    assert Kind.MUTABILITY_ERROR in move_kinds(source)
    assert "RL0006" in codes(compile_source(source))


@pytest.mark.parametrize(
    "body",
    [
        "let x: i32; if true { x = 1; } else { x = 2; } x",
        "let mut s = 0; let mut i = 0; while i < 3 { let x: i32; x = i; s = s + x; i = i + 1; } s",
        "let mut x: i32; x = 1; x = 2; x",
    ],
)
def test_single_assignment_per_storage_is_fine(body: str):
    assert move_kinds(f"fn main() -> i32 {{ {body} }}") == []


# ─── Move-path universe against a brute-force scan ───

PROJECTIONS: list[ir.Projection] = [ir.Field(0), ir.Field(1), ir.DEREF, ir.Downcast(1)]


def prefix_of(p: ir.Place, q: ir.Place) -> bool:
    return (
        p.local == q.local
        and len(p.projections) <= len(q.projections)
        and all(a == b for a, b in zip(p.projections, q.projections))
    )


def random_place(rng: random.Random, locals_: int) -> ir.Place:
    return ir.Place(rng.randrange(locals_), tuple(rng.choice(PROJECTIONS) for _ in range(rng.randint(0, 3))))


def test_universe_queries_match_a_scan():
    rng = random.Random(99)
    for _ in range(200):
        locals_ = rng.randint(1, 3)
        paths = [ir.Place(local) for local in range(locals_)]
        for place in (random_place(rng, locals_) for _ in range(rng.randint(0, 5))):
            for prefix in place.prefixes():
                if prefix not in paths:
                    paths.append(prefix)
        universe = MovePathUniverse(paths)
        for query in [*paths, *(random_place(rng, locals_) for _ in range(10))]:
            below = [i for i, p in enumerate(paths) if prefix_of(p, query)]
            above = {i for i, p in enumerate(paths) if prefix_of(query, p)}
            assert sorted(universe.prefixes(query), key=lambda i: len(paths[i].projections)) == universe.prefixes(query)
            assert set(universe.prefixes(query)) == set(below)
            assert universe.extensions(query) == above
            assert universe.conflicting(query) == set(below) | above
            assert universe.longest_prefix(query) == max(below, key=lambda i: len(paths[i].projections))


@pytest.mark.parametrize("program", load_corpus().programs, ids=lambda p: p.name)
def test_move_paths_cover_moved_places_and_their_prefixes(program):
    try:
        module = lower_source(program.path.read_text(encoding="utf-8"))
    except CompileError:
        pytest.skip("rejected before lowering")
    for fn in module.functions:
        expected = {ir.Place(local) for local in range(len(fn.locals))}
        for instr in fn.nodes.values():
            operands: list[ir.Operand] = []
            dropped: list[ir.Place] = []
            match instr:
                case ir.Assign(rvalue=rv):
                    operands = ir.operand_places(rv)
                case ir.Call(args=args):
                    operands = list(args)
                case ir.Drop(place=p) | ir.ConditionalDrop(place=p):
                    dropped = [p]
            moved = [op.place for op in operands if isinstance(op, ir.Move)] + dropped
            for place in moved:
                if not ir.through_ref_deref(fn, module.adts, place):
                    expected.update(place.prefixes())
        universe = move_paths(fn, module.adts)
        assert len(universe.paths) == len(set(universe.paths))
        assert set(universe.paths) == expected

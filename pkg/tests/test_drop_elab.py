"""Drop elaboration: flags for ambiguous drops, opened drops, idempotence, run-time balance."""

from __future__ import annotations

import pytest

from src.analysis.drop_elab import elaborate, elaborate_module
from src.analysis.init_analysis import InitAnalysis
from src.frontend.types import BOOL
from src.interp.interpreter import eval_module
from src.interp.values import BoolV, Returned
from src.ir import rustir as ir
from src.ir.dump import dump_function
from tests.conftest import lower_source

DIAMOND = """
fn main(c: bool) -> i32 {
    let b = Box::new(3);
    let mut out = 1;
    if c {
        let d = b;
        out = *d;
    }
    out
}
"""

PAIR = """
struct Pair { a: Box<i32>, b: Box<i32> }
fn main() -> i32 {
    let p = Pair { a: Box::new(1), b: Box::new(2) };
    let x = p.a;
    *x
}
"""

ENUM = """
enum O { N, S(Box<i32>) }
fn main(c: bool) -> i32 {
    let mut o = O::N;
    if c {
        o = O::S(Box::new(5));
    }
    let mut out = 0;
    match o {
        O::S(b) => { out = *b; }
        O::N => { }
    }
    out
}
"""


def kinds(fn: ir.RirFunction) -> list[str]:
    return [type(fn.nodes[n]).__name__ for n in sorted(fn.nodes)]


def test_conditional_move_gets_one_flag():
    module = lower_source(DIAMOND)
    fn = elaborate_module(module).function("main")
    flags = [d for d in fn.locals if d.kind is ir.LocalKind.FLAG]
    assert len(flags) == 1
    assert flags[0].name.startswith("flag:")
    assert kinds(fn).count("ConditionalDrop") == 1
    # the entry chain clears the flag before the first original instruction
    first = fn.nodes[fn.entry]
    assert isinstance(first, ir.Assign) and first.rvalue == ir.Use(ir.Const(False, BOOL))


@pytest.mark.parametrize("taken", [True, False])
def test_diamond_frees_exactly_once(taken: bool):
    module = elaborate_module(lower_source(DIAMOND))
    run = eval_module(module, args=[BoolV(taken)])
    assert isinstance(run.outcome, Returned)
    assert run.outcome.render() == ("3" if taken else "1")
    assert run.allocs == run.frees == 1


def test_trivial_drops_disappear():
    module = elaborate_module(lower_source("fn main() -> i32 { let x = 5; let y = x; y }"))
    assert "Drop" not in kinds(module.function("main"))


def test_partial_move_opens_the_struct_drop():
    module = elaborate_module(lower_source(PAIR))
    fn = module.function("main")
    drops = [fn.nodes[n] for n in sorted(fn.nodes) if isinstance(fn.nodes[n], ir.Drop)]
    p = next(i for i, d in enumerate(fn.locals) if d.name == "p")
    places = {d.place for d in drops}
    assert ir.Place(p, (ir.Field(1),)) in places
    assert ir.Place(p) not in places
    assert ir.Place(p, (ir.Field(0),)) not in places
    run = eval_module(module)
    assert run.allocs == run.frees == 2


def test_move_out_of_box_leaves_a_shallow_free():
    module = elaborate_module(lower_source("fn main() -> i32 { let b = Box::new(Box::new(7)); let i = *b; *i }"))
    fn = module.function("main")
    shallow = [fn.nodes[n] for n in fn.nodes if isinstance(fn.nodes[n], ir.Drop) and fn.nodes[n].shallow]
    assert len(shallow) == 1
    run = eval_module(module)
    assert run.outcome.render() == "7"
    assert run.allocs == run.frees == 2


@pytest.mark.parametrize("taken", [True, False])
def test_enum_partial_move_balances(taken: bool):
    module = elaborate_module(lower_source(ENUM))
    run = eval_module(module, args=[BoolV(taken)])
    assert run.outcome.render() == ("5" if taken else "0")
    assert run.allocs == run.frees


@pytest.mark.parametrize("source", [DIAMOND, PAIR, ENUM])
def test_elaboration_is_idempotent(source: str):
    module = lower_source(source)
    once = elaborate_module(module)
    for fn in once.functions:
        assert dump_function(elaborate(fn, once.adts)) == dump_function(fn)


def test_input_function_is_not_modified():
    module = lower_source(DIAMOND)
    before = dump_function(module.function("main"))
    elaborate_module(module)
    assert dump_function(module.function("main")) == before


def test_post_elaboration_drops_hit_initialized_places_only():
    module = elaborate_module(lower_source(DIAMOND))
    fn = module.function("main")
    analysis = InitAnalysis(fn, module.adts)
    flow = analysis.solve()
    for n, instr in fn.nodes.items():
        if isinstance(instr, ir.Drop):
            path = analysis.status_path(instr.place)
            assert flow.before(n).definitely_init(path), n

"""Reference interpreter: results, wrapping arithmetic, traps and the event trace."""

from __future__ import annotations

import pytest

from src.analysis.drop_elab import elaborate_module
from src.core.errors import UsageError
from src.frontend.types import I32, BoxTy
from src.interp.interpreter import bind_args, eval_module, parse_arg
from src.interp.values import BoolV, IntV, Returned, Trap, TrapKind, wrap_i32
from src.ir import rustir as ir
from tests.conftest import codes, compile_source, lower_source


def run(source: str, *args: str, depth_limit: int | None = None):
    module = elaborate_module(lower_source(source))
    return eval_module(module, args=[parse_arg(a) for a in args], depth_limit=depth_limit)


@pytest.mark.parametrize(
    ("expr", "value"),
    [
        ("7 / 2", 3),
        ("-7 / 2", -3),
        ("-7 % 2", -1),
        ("7 % -2", 1),
        ("2147483647 + 1", -2147483648),
        ("-2147483647 - 2", 2147483647),
        ("65536 * 65536", 0),
    ],
)
def test_arithmetic(expr: str, value: int):
    assert run(f"fn main() -> i32 {{ {expr} }}").outcome == Returned(IntV(value))


def test_wrap_i32():
    assert wrap_i32(2**31) == -(2**31)
    assert wrap_i32(-(2**31) - 1) == 2**31 - 1
    assert wrap_i32(5) == 5


def test_short_circuit_skips_the_right_operand():
    source = "fn main(d: i32) -> bool { d != 0 && 10 / d > 1 }"
    assert run(source, "0").outcome == Returned(BoolV(False))
    assert run(source, "2").outcome == Returned(BoolV(True))


def test_division_by_zero_traps():
    outcome = run("fn main(d: i32) -> i32 { 10 / d }", "0").outcome
    assert isinstance(outcome, Trap)
    assert outcome.kind is TrapKind.DIV_BY_ZERO
    assert outcome.render().startswith("trap: DivByZero at bb")
    assert not outcome.kind.is_memory


def test_deep_recursion_overflows():
    source = "fn f(n: i32) -> i32 { if n == 0 { return 0; } f(n - 1) + 1 } fn main(n: i32) -> i32 { f(n) }"
    assert run(source, "50").outcome == Returned(IntV(50))
    outcome = run(source, "50", depth_limit=10).outcome
    assert isinstance(outcome, Trap) and outcome.kind is TrapKind.STACK_OVERFLOW


def test_trace_format():
    execution = run("fn main() -> i32 { let b = Box::new(2); *b }")
    trace = execution.trace
    assert trace[0] == "call main"
    assert trace[-1] == "return main"
    assert any(line.startswith("alloc #1 at bb") for line in trace)
    assert any(line.startswith("free #1 at bb") for line in trace)
    assert any(line.startswith("assign _0 at bb") for line in trace)
    assert execution.allocs == execution.frees == 1


def test_recursive_list_frees_every_node():
    source = """
    enum List { Nil, Cons(i32, Box<List>) }
    fn build(n: i32) -> List {
        if n == 0 { return List::Nil; }
        List::Cons(n, Box::new(build(n - 1)))
    }
    fn main() -> i32 { let l = build(4); 0 }
    """
    execution = run(source)
    assert execution.outcome == Returned(IntV(0))
    assert execution.allocs == execution.frees == 4


def test_dangling_reference_traps_without_borrow_check():
    # borrowck rejects this; unchecked, the stale reference is caught at run time
    source = "fn main() -> i32 { let r: &i32; { let x = 5; r = &x; } *r }"
    assert codes(compile_source(source)) == {"RL0207"}
    outcome = run(source).outcome
    assert isinstance(outcome, Trap) and outcome.kind is TrapKind.DANGLING_DEREF


def boxed_function(tail: list[ir.Instr]) -> ir.RirModule:
    """_1 and _2 alias one allocation, which checked code can never do."""
    locals_ = [
        ir.LocalDecl("ret", I32, True, ir.LocalKind.RETURN),
        ir.LocalDecl("a", BoxTy(I32), True, ir.LocalKind.USER),
        ir.LocalDecl("b", BoxTy(I32), True, ir.LocalKind.USER),
    ]
    head: list[ir.Instr] = [
        ir.Assign(ir.Place(1), ir.BoxNew(ir.Const(1, I32)), 1),
        ir.Assign(ir.Place(2), ir.Use(ir.Copy(ir.Place(1))), 2),
        ir.Drop(ir.Place(1), 3),
    ]
    nodes = dict(enumerate(head + tail))
    fn = ir.RirFunction(name="main", locals=locals_, param_count=0, nodes=nodes, regions=[])
    return ir.RirModule([fn], ir.AdtTable())


def test_double_free_traps():
    module = boxed_function([ir.Drop(ir.Place(2), 4), ir.Return()])
    outcome = eval_module(module).outcome
    assert outcome == Trap(TrapKind.DOUBLE_FREE, 3, "main")


def test_use_after_free_traps():
    module = boxed_function([ir.Assign(ir.Place(0), ir.Use(ir.Copy(ir.Place(2, (ir.DEREF,)))), 4), ir.Return()])
    outcome = eval_module(module).outcome
    assert isinstance(outcome, Trap) and outcome.kind is TrapKind.USE_AFTER_FREE and outcome.kind.is_memory


def test_uninitialized_read_traps():
    module = boxed_function([ir.Return()])
    outcome = eval_module(module).outcome
    assert outcome == Trap(TrapKind.UNINIT_READ, 3, "main")


def test_parse_arg():
    assert parse_arg("true") == BoolV(True)
    assert parse_arg("-3") == IntV(-3)
    assert parse_arg("4294967295") == IntV(-1)


def test_bind_args_checks_count_and_types():
    module = elaborate_module(lower_source("fn main(n: i32, b: bool) -> i32 { n }"))
    assert bind_args(module, "main", ["-4", "false"]) == [IntV(-4), BoolV(False)]
    for texts in (["1"], ["1", "true", "2"], ["x", "true"], ["true", "true"], ["1", "0"]):
        with pytest.raises(UsageError):
            bind_args(module, "main", texts)
    with pytest.raises(UsageError, match="no function `start`"):
        bind_args(module, "start", [])

"""Type checker tests: each rejection maps to one stable diagnostic kind."""

from __future__ import annotations

import pytest

from src.core.diagnostics import Kind
from src.core.errors import CompileError
from src.frontend.parser import parse
from src.frontend.typecheck import typecheck
from src.frontend.types import I32, RefTy


def kinds_of(source: str) -> set[Kind]:
    with pytest.raises(CompileError) as info:
        typecheck(parse(source))
    return {d.kind for d in info.value.diagnostics}


def test_well_typed_module_records_signatures():
    tm = typecheck(
        parse(
            """
            fn pick<'a, 'b: 'a>(x: &'a i32, y: &'b i32) -> &'a i32 { y }
            fn id(x: &i32) -> &i32 { x }
            fn main() -> i32 { let a = 1; *id(&a) }
            """
        )
    )
    pick = tm.signatures["pick"]
    assert pick.lifetimes == ("a", "b")
    assert pick.outlives == (("b", "a"),)
    # one elided input lifetime is given to the elided output
    ident = tm.signatures["id"]
    assert len(ident.lifetimes) == 1
    (lt,) = ident.lifetimes
    assert ident.ret == RefTy(lt, False, I32)


@pytest.mark.parametrize(
    ("source", "kind"),
    [
        ("fn main() -> i32 { true }", Kind.TYPE_MISMATCH),
        ("fn main() -> i32 { y }", Kind.UNKNOWN_NAME),
        ("fn f(a: i32) -> i32 { a } fn main() -> i32 { f(1, 2) }", Kind.ARITY_MISMATCH),
        ("fn main() -> i32 { let x = 1; x = 2; x }", Kind.MUTABILITY_ERROR),
        ("fn main() -> i32 { let x = 1; let r = &mut x; 0 }", Kind.MUTABILITY_ERROR),
        ("fn f(r: &i32) { *r = 1; } fn main() -> i32 { 0 }", Kind.MUTABILITY_ERROR),
        ("fn f(a: &i32, b: &i32) -> &i32 { a } fn main() -> i32 { 0 }", Kind.MISSING_LIFETIME),
        ("fn main() -> i32 { 1 = 2; 0 }", Kind.NOT_A_PLACE),
        ("fn main() -> i32 { let x = 1; }", Kind.MISSING_RETURN),
        ("struct S { s: S } fn main() -> i32 { 0 }", Kind.INVALID_TYPE_DEFINITION),
        ("struct S { r: &i32 } fn main() -> i32 { 0 }", Kind.INVALID_TYPE_DEFINITION),
        (
            "enum E { A, B } fn main() -> i32 { let e = E::A; match e { E::A => { } } 0 }",
            Kind.NON_EXHAUSTIVE_MATCH,
        ),
    ],
)
def test_rejections(source: str, kind: Kind):
    assert kind in kinds_of(source)


def test_recursion_through_box_is_allowed():
    typecheck(parse("enum L { Nil, Cons(i32, Box<L>) } fn main() -> i32 { 0 }"))


def test_mut_ref_coerces_to_shared():
    typecheck(parse("fn f(r: &i32) -> i32 { *r } fn main() -> i32 { let mut x = 1; f(&mut x) }"))


def test_if_else_both_returning_counts_as_returning():
    typecheck(parse("fn f(c: bool) -> i32 { if c { return 1; } else { return 2; } }"))


def test_diagnostics_carry_spans():
    with pytest.raises(CompileError) as info:
        typecheck(parse("fn main() -> i32 {\n    let b: bool = 3;\n    0\n}"))
    (diag,) = info.value.diagnostics
    assert diag.span.line == 2
    assert diag.code == "RL0002"


def test_i32_literal_bounds():
    assert kinds_of("fn main() -> i32 { 2147483648 }") == {Kind.TYPE_MISMATCH}
    assert kinds_of("fn main() -> i32 { -2147483649 }") == {Kind.TYPE_MISMATCH}
    # 2^31 is only representable once negated
    typecheck(parse("fn main() -> i32 { -2147483648 }"))
    typecheck(parse("fn main() -> i32 { 2147483647 }"))

"""Borrow checker: each conflict kind, NLL acceptance, regions across calls, placements."""

from __future__ import annotations

import json

import pytest

from src.analysis.liveness import region_liveness
from src.borrowck.check import BorrowAnalysis, borrow_check
from src.driver.facts import loan_facts
from src.ir import rustir as ir
from tests.conftest import codes, compile_source, lower_source


def main(body: str, items: str = "") -> str:
    return f"{items}\nfn main() -> i32 {{ {body} }}"


@pytest.mark.parametrize(
    ("body", "code"),
    [
        ("let mut x = 1; let a = &mut x; let b = &mut x; *a = 2; *b = 3; x", "RL0201"),
        ("let mut x = 1; let a = &x; let b = &mut x; *b = 2; *a", "RL0201"),
        ("let mut x = 1; let a = &mut x; let y = x; *a = 2; y", "RL0202"),
        ("let mut x = 1; let r = &x; x = 2; *r", "RL0203"),
        ("let b = Box::new(1); let r = &b; let c = b; **r", "RL0204"),
        ("let r: &i32; { let x = 5; r = &x; } *r", "RL0207"),
    ],
)
def test_conflicts(body: str, code: str):
    assert codes(compile_source(main(body))) == {code}


@pytest.mark.parametrize(
    "body",
    [
        "let mut x = 1; let r = &mut x; *r = 5; x + 1",
        "let mut x = 1; let r = &x; let y = *r; x = 2; x + y",
        "let mut x = 0; let mut i = 0; while i < 3 { let r = &mut x; *r = *r + i; i = i + 1; } x",
        "let mut x = 1; let r1 = &mut x; let r2 = &mut *r1; *r2 = 5; *r1 = *r1 + 1; x",
        "let mut x = 1; let mut y = 2; let mut r = &mut x; let s = &mut *r; r = &mut y; *s = 5; *r = 6; x + y",
    ],
)
def test_nll_accepts(body: str):
    result = compile_source(main(body))
    assert result.diagnostics == []


def test_disjoint_fields_depend_on_field_sensitivity():
    source = main(
        "let mut p = P { x: 1, y: 2 }; let a = &mut p.x; let b = &mut p.y; *a = 3; *b = 4; p.x + p.y",
        "struct P { x: i32, y: i32 }",
    )
    assert compile_source(source).diagnostics == []
    assert codes(compile_source(source, field_insensitive=True)) == {"RL0201"}


def test_reborrow_conflict_reports_the_write():
    body = "let mut x = 1; let r1 = &mut x; let r2 = &mut *r1; *r1 = 2; *r2 = 3; x"
    assert codes(compile_source(main(body))) == {"RL0203"}


def test_aliasing_call_arguments():
    items = "fn two(a: &mut i32, b: &mut i32) { *a = 1; *b = 2; }"
    assert codes(compile_source(main("let mut x = 1; two(&mut x, &mut x); x", items))) == {"RL0201"}


def test_returned_reference_keeps_arguments_borrowed():
    items = "fn first<'a>(x: &'a mut i32) -> &'a i32 { x }"
    body = "let mut v = 1; let r = first(&mut v); v = 2; *r"
    assert codes(compile_source(main(body, items))) == {"RL0203"}


def test_returning_a_local_reference():
    source = main("let r = dangle(); *r", "fn dangle() -> &i32 { let x = 1; &x }")
    result = compile_source(source)
    assert codes(result) == {"RL0206"}
    assert all(d.function == "dangle" for d in result.diagnostics)


def test_undeclared_outlives_is_a_violation():
    items = "fn pick<'a, 'b>(x: &'a i32, y: &'b i32) -> &'a i32 { y }"
    result = compile_source(main("let a = 1; let b = 2; *pick(&a, &b)", items))
    assert codes(result) == {"RL0205"}
    assert len(result.diagnostics) == 1


@pytest.mark.parametrize(
    "items",
    [
        "fn pick<'a, 'b: 'a>(x: &'a i32, y: &'b i32) -> &'a i32 { y }",
        "fn pick<'a, 'c: 'b, 'b: 'a>(x: &'a i32, y: &'c i32) -> &'a i32 { y }",
    ],
)
def test_declared_outlives_accepts(items: str):
    assert compile_source(main("let a = 1; let b = 2; *pick(&a, &b)", items)).diagnostics == []


def test_invariance_through_mutable_reference():
    items = "fn store<'a>(slot: &mut &'a i32, v: &'a i32) { *slot = v; }"
    body = "let x = 1; let mut r: &i32 = &x; { let y = 2; store(&mut r, &y); } *r"
    assert codes(compile_source(main(body, items))) == {"RL0207"}


def test_overwriting_a_borrowed_box():
    body = "let mut b = Box::new(1); let r = &*b; b = Box::new(2); *r"
    assert codes(compile_source(main(body))) == {"RL0203"}


@pytest.mark.parametrize(
    "body",
    [
        "let mut x = 1; let r = &x; x = 2; *r",
        "let b = Box::new(1); let flag = 1 < 2; let mut o = 0; if flag { let c = b; o = *c; } o",
    ],
)
def test_placements_agree(body: str):
    post = compile_source(main(body))
    pre = compile_source(main(body), placement="pre-elab")
    both = compile_source(main(body), check_after_elab=True)
    assert codes(post) == codes(pre) == codes(both)


def test_borrow_state_dump_format():
    module = lower_source(main("let x = 1; let r = &x; *r"))
    fn = module.function("main")
    analysis = BorrowAnalysis(fn, module)
    flow = analysis.solve()
    rendered = [analysis.render(flow.after(n)) for n in sorted(fn.nodes)]
    assert any("-> {L0}" in text for text in rendered)
    assert all(" | dead {" in text for text in rendered)


def test_diagnostics_are_deterministic():
    source = main("let mut x = 1; let a = &mut x; let b = &mut x; let c = &x; *a = 2; *b = 3; *c")
    module = lower_source(source)
    fn = module.function("main")
    first = [d.model_dump() for d in borrow_check(fn, module)]
    assert first == [d.model_dump() for d in borrow_check(fn, module)]


def test_loan_facts():
    module = lower_source(main("let mut x = 1; let r = &mut x; *r = 2; let s = &x; *s"))
    facts = loan_facts(module)
    assert [(f.loan, f.source_place, f.mutable) for f in facts] == [(0, "x", True), (1, "x", False)]
    assert facts[0].place == "_1"
    assert all(f.function == "main" for f in facts)
    record = json.loads(facts[0].model_dump_json())
    assert set(record) == {"function", "loan", "place", "source_place", "mutable", "node", "region"}


def test_region_liveness_ends_at_last_use():
    module = lower_source("fn id<'a>(x: &'a i32) -> &'a i32 { let y = x; y }\n" + main("let v = 1; let r = &v; *r"))
    main_fn = module.by_name["main"]
    live = region_liveness(main_fn)
    ref_region = next(r for n in main_fn.nodes for r in live.before[n])
    # the borrow's region is live somewhere, then dead by the return
    returns = [n for n, i in main_fn.nodes.items() if isinstance(i, ir.Return)]
    assert all(ref_region not in live.before[n] for n in returns)
    # universal regions stay live everywhere
    id_fn = module.by_name["id"]
    id_live = region_liveness(id_fn)
    assert all(set(id_fn.universal_regions) <= id_live.before[n] for n in id_fn.nodes)


def test_write_through_reference_overlaps_what_it_may_point_to():
    # after the join r may point at x while s may hold a shared loan of x
    source = """
fn main(c: bool) -> i32 {
    let mut x = 1; let mut y = 2; let z = 3;
    let mut r = &mut y; let mut s = &z;
    if c { r = &mut x; } else { s = &x; }
    *r = 5;
    *s
}"""
    result = compile_source(source)
    assert codes(result) == {"RL0203"}
    (diag,) = result.diagnostics
    assert "`*r`" in diag.message and "`x`" in diag.message


def test_alias_overlap_respects_fields():
    items = "struct P { a: i32, b: i32 }"
    body = (
        "let mut p = P { a: 1, b: 2 }; let mut q = P { a: 3, b: 4 }; let w = P { a: 5, b: 6 }; "
        "let c = 1 < 2; let mut r = &mut q; let mut s = &w.a; "
        "if c { r = &mut p; } else { s = &p.a; } "
        "r.b = 7; *s"
    )
    assert compile_source(main(body, items)).diagnostics == []


def test_alias_overlap_does_not_repeat_reported_conflicts():
    # the second `&mut x` is the only report; later uses of a and b stay quiet
    body = "let mut x = 1; let a = &x; let b = &mut x; *b = 2; *a"
    result = compile_source(main(body))
    assert [d.code for d in result.diagnostics] == ["RL0201"]

"""Abstract borrow state: semilattice laws over random reachable states, and the basic effects."""

from __future__ import annotations

import itertools
import random
from collections.abc import Iterable, Iterator

import pytest

from src.borrowck.check import BorrowAnalysis
from src.borrowck.domain import AbstractState
from src.core.errors import RegionError
from src.ir import rustir as ir
from tests.conftest import lower_source

REGIONS = 6
LOANS = 5


def random_state(
    rng: random.Random, regions: int = REGIONS, loans: int = LOANS, universal: tuple[int, ...] = (0,)
) -> AbstractState:
    """A state reachable from bottom through a random sequence of effects."""
    state = AbstractState.bottom(regions, universal=universal)
    for _ in range(rng.randint(0, 8)):
        a, b = rng.randrange(regions), rng.randrange(regions)
        match rng.randrange(4):
            case 0:
                state = state.add_loan(a, rng.randrange(loans))
            case 1:
                state = state.flow(a, b)
            case 2:
                state = state.union(a, b)
            case _:
                if a not in universal:
                    state = state.kill(a)
    return state


@pytest.fixture(scope="module")
def samples() -> list[tuple[AbstractState, AbstractState, AbstractState]]:
    rng = random.Random(1234)
    return [(random_state(rng), random_state(rng), random_state(rng)) for _ in range(1000)]


def test_join_is_commutative(samples):
    for a, b, _ in samples:
        assert a.join(b) == b.join(a)


def test_join_is_associative(samples):
    for a, b, c in samples:
        assert a.join(b).join(c) == a.join(b.join(c))


def test_join_is_idempotent(samples):
    for a, _, _ in samples:
        assert a.join(a) == a


def test_join_is_an_upper_bound(samples):
    for a, b, _ in samples:
        j = a.join(b)
        assert a.leq(j) and b.leq(j)


def test_bottom_is_least(samples):
    bottom = AbstractState.bottom(REGIONS, universal=[0])
    for a, _, _ in samples:
        assert bottom.leq(a)
        assert bottom.join(a) == a


def test_dead_regions_are_loan_free_singletons(samples):
    for a, b, _ in samples:
        for state in (a, b, a.join(b)):
            classes = state.classes()
            for r in state.dead:
                assert classes[state.find(r)] == [r]
                assert state.loans_of(r) == frozenset()


def test_representative_is_class_minimum(samples):
    for a, _, _ in samples:
        for root, members in a.classes().items():
            assert root == min(members)


def test_union_merges_loans():
    s = AbstractState.bottom(4).add_loan(1, 0).add_loan(2, 1).union(1, 2)
    assert s.same_class(1, 2)
    assert s.loans_of(2) == frozenset({0, 1})
    assert 1 not in s.dead and 2 not in s.dead


def test_flow_is_one_directional():
    s = AbstractState.bottom(3).add_loan(0, 7).add_loan(1, 8).flow(0, 1)
    assert s.loans_of(1) == frozenset({7, 8})
    assert s.loans_of(0) == frozenset({7})
    assert not s.same_class(0, 1)


def test_kill_keeps_the_rest_of_the_class():
    s = AbstractState.bottom(3).add_loan(0, 4).union(0, 1).kill(0)
    assert s.loans_of(1) == frozenset({4})
    assert s.loans_of(0) == frozenset()
    assert 0 in s.dead
    assert not s.same_class(0, 1)


def test_loans_at_rejects_non_representatives():
    s = AbstractState.bottom(3).union(1, 2)
    assert s.loans_at(1) == frozenset()
    with pytest.raises(RegionError):
        s.loans_at(2)


def test_render_lists_loans_partition_and_dead():
    s = AbstractState.bottom(3, universal=[0]).add_loan(1, 0).union(1, 2)
    assert s.render() == "{'?1 -> {L0}} | [{'?1, '?2}] | dead {}"


# ─── Least upper bound against the enumerated order ───

SMALL_REGIONS = 3
SMALL_LOANS = 3


def set_partitions(items: list[int]) -> Iterator[list[list[int]]]:
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        for i in range(len(part)):
            yield [*part[:i], [first, *part[i]], *part[i + 1 :]]
        yield [[first], *part]


def subsets(items: Iterable[int]) -> list[frozenset[int]]:
    pool = list(items)
    return [frozenset(c) for k in range(len(pool) + 1) for c in itertools.combinations(pool, k)]


def every_state(regions: int, loans: int) -> list[AbstractState]:
    """All well-formed states: dead regions are loan-free singletons."""
    out: list[AbstractState] = []
    for part in set_partitions(list(range(regions))):
        rep = [0] * regions
        for block in part:
            for member in block:
                rep[member] = min(block)
        for loan_sets in itertools.product(subsets(range(loans)), repeat=len(part)):
            loan_map = {min(block): ids for block, ids in zip(part, loan_sets)}
            may_die = [block[0] for block, ids in zip(part, loan_sets) if len(block) == 1 and not ids]
            for dead in subsets(may_die):
                out.append(AbstractState.build(rep, loan_map, dead))
    return out


@pytest.fixture(scope="module")
def small_states() -> list[AbstractState]:
    return every_state(SMALL_REGIONS, SMALL_LOANS)


def test_enumeration_is_duplicate_free(small_states):
    assert len(set(small_states)) == len(small_states)
    assert AbstractState.bottom(SMALL_REGIONS) in small_states


def test_join_is_the_least_upper_bound(small_states):
    rng = random.Random(77)
    for _ in range(150):
        a, b = rng.choice(small_states), rng.choice(small_states)
        joined = a.join(b)
        upper = [c for c in small_states if a.leq(c) and b.leq(c)]
        assert all(joined.leq(c) for c in upper)
        # the only upper bound below the join is the join itself
        assert [c for c in upper if c.leq(joined)] == [joined]


# ─── Transfer monotonicity ───

MONOTONE_SOURCE = """
fn pick<'a, 'b: 'a>(x: &'a i32, y: &'b i32) -> &'a i32 { y }
fn main() -> i32 {
    let mut a = 1;
    let b = 2;
    let p = &mut a;
    let q = &mut *p;
    let bx = Box::new(&b);
    let r = pick(&b, *bx);
    *q = 3;
    let s = r;
    *s
}
"""


def instruction_kind(instr: ir.Instr) -> str:
    if isinstance(instr, ir.Assign):
        return type(instr.rvalue).__name__
    return type(instr).__name__


@pytest.fixture(scope="module")
def monotone_analysis() -> BorrowAnalysis:
    module = lower_source(MONOTONE_SOURCE)
    return BorrowAnalysis(module.function("main"), module)


def test_every_instruction_kind_is_exercised(monotone_analysis):
    kinds = {instruction_kind(i) for i in monotone_analysis.fn.nodes.values()}
    assert {"Use", "Ref", "BoxNew", "Call", "StorageDead", "Return"} <= kinds


@pytest.mark.parametrize("kind", ["Use", "Ref", "BoxNew", "Call", "StorageDead", "Drop", "Return"])
def test_transfer_is_monotone(monotone_analysis, kind: str):
    analysis = monotone_analysis
    fn = analysis.fn
    nodes = [n for n in sorted(fn.nodes) if instruction_kind(fn.nodes[n]) == kind]
    rng = random.Random(len(kind))
    regions, loans = len(fn.regions), len(analysis.loans)
    universal = tuple(fn.universal_regions)
    for node in nodes:
        for _ in range(60):
            low = random_state(rng, regions, loans, universal)
            high = low.join(random_state(rng, regions, loans, universal))
            assert analysis.transfer(node, low).leq(analysis.transfer(node, high)), (kind, node)

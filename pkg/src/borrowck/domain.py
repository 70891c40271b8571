"""
Borrow-check abstract domain: a loans map over a union-find of regions.

The state is immutable. `rep[r]` is the representative of r's equality class
(always the smallest id in the class, so the union-find is kept fully
compressed); `loans` maps representatives to loan-id sets, empty sets omitted;
`dead` holds regions with no remaining contribution. A dead region is always a
singleton class with no loans: killing a region detaches it from its class.

Order: a ⊑ b when a's partition refines b's, every region's loans under a are
included in its loans under b, and a's dead set contains b's.
"""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass, field

from src.core.errors import RegionError
from src.ir import rustir as ir

# ─── Loans ───


@dataclass(frozen=True, slots=True)
class Loan:
    id: int
    place: ir.Place | None  # None for a universal region's placeholder
    mutable: bool
    node: int | None
    universal: int | None = None

    @property
    def is_placeholder(self) -> bool:
        return self.universal is not None


@dataclass
class LoanTable:
    """Dense loan ids: one per Ref rvalue in node order, then one placeholder per universal region."""

    loans: list[Loan] = field(default_factory=list)
    by_node: dict[int, int] = field(default_factory=dict)
    placeholder: dict[int, int] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.loans)

    def __getitem__(self, loan: int) -> Loan:
        return self.loans[loan]

    def real(self, ids: Iterable[int]) -> list[int]:
        return sorted(i for i in ids if not self.loans[i].is_placeholder)


def collect_loans(fn: ir.RirFunction) -> LoanTable:
    table = LoanTable()
    for n in sorted(fn.nodes):
        instr = fn.nodes[n]
        if isinstance(instr, ir.Assign) and isinstance(instr.rvalue, ir.Ref):
            loan = Loan(len(table.loans), instr.rvalue.place, instr.rvalue.mutable, n)
            table.by_node[n] = loan.id
            table.loans.append(loan)
    for u in fn.universal_regions:
        loan = Loan(len(table.loans), None, False, None, universal=u)
        table.placeholder[u] = loan.id
        table.loans.append(loan)
    return table


# ─── Abstract state ───


def _canonical_rep(classes: Iterable[Iterable[int]], size: int) -> tuple[int, ...]:
    rep = list(range(size))
    for members in classes:
        ms = sorted(members)
        for m in ms:
            rep[m] = ms[0]
    return tuple(rep)


@dataclass(frozen=True, slots=True)
class AbstractState:
    rep: tuple[int, ...]
    loans: tuple[tuple[int, frozenset[int]], ...]
    dead: frozenset[int]

    # ─── Construction ───

    @staticmethod
    def bottom(region_count: int, universal: Iterable[int] = ()) -> AbstractState:
        """Identity partition, no loans, every non-universal region dead."""
        return AbstractState(
            rep=tuple(range(region_count)),
            loans=(),
            dead=frozenset(range(region_count)) - frozenset(universal),
        )

    @staticmethod
    def build(
        rep: tuple[int, ...] | list[int],
        loans: dict[int, frozenset[int]] | dict[int, set[int]],
        dead: Iterable[int],
    ) -> AbstractState:
        return AbstractState(
            rep=tuple(rep),
            loans=tuple(sorted((r, frozenset(ls)) for r, ls in loans.items() if ls)),
            dead=frozenset(dead),
        )

    # ─── Queries ───

    @property
    def size(self) -> int:
        return len(self.rep)

    def find(self, region: int) -> int:
        return self.rep[region]

    def loan_map(self) -> dict[int, frozenset[int]]:
        return dict(self.loans)

    def loans_at(self, representative: int) -> frozenset[int]:
        """Loans keyed by a class representative; any other region is a bug."""
        if self.rep[representative] != representative:
            raise RegionError(f"'?{representative} is not a representative (find = '?{self.rep[representative]})")
        return self.loan_map().get(representative, frozenset())

    def loans_of(self, region: int) -> frozenset[int]:
        return self.loans_at(self.find(region))

    def classes(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {}
        for r, root in enumerate(self.rep):
            out.setdefault(root, []).append(r)
        return out

    def same_class(self, a: int, b: int) -> bool:
        return self.rep[a] == self.rep[b]

    # ─── Effects ───

    def union(self, a: int, b: int) -> AbstractState:
        ra, rb = self.rep[a], self.rep[b]
        loans = self.loan_map()
        if ra == rb:
            return self._revive([a], loans)
        classes = self.classes()
        merged = classes.pop(ra) + classes.pop(rb)
        merged_loans = loans.pop(ra, frozenset()) | loans.pop(rb, frozenset())
        classes[min(merged)] = merged
        loans[min(merged)] = merged_loans
        state = AbstractState.build(_canonical_rep(classes.values(), self.size), loans, self.dead)
        return state._revive(merged, state.loan_map())

    def flow(self, src: int, dst: int) -> AbstractState:
        """loans(dst) ∪= loans(src)."""
        loans = self.loan_map()
        rd = self.rep[dst]
        loans[rd] = loans.get(rd, frozenset()) | loans.get(self.rep[src], frozenset())
        return self._revive([dst], loans)

    def add_loan(self, region: int, loan: int) -> AbstractState:
        loans = self.loan_map()
        r = self.rep[region]
        loans[r] = loans.get(r, frozenset()) | {loan}
        return self._revive([region], loans)

    def _revive(self, regions: Iterable[int], loans: dict[int, frozenset[int]]) -> AbstractState:
        """Regions that receive a constraint are no longer dead."""
        members = {m for r in regions for m in self.classes()[self.rep[r]]}
        return AbstractState.build(self.rep, loans, self.dead - members)

    def kill(self, region: int) -> AbstractState:
        """Detach region from its class, drop its contribution and mark it dead."""
        if region in self.dead:
            return self
        classes = self.classes()
        root = self.rep[region]
        members = classes.pop(root)
        loans = self.loan_map()
        carried = loans.pop(root, frozenset())
        rest = [m for m in members if m != region]
        if rest:
            classes[min(rest)] = rest
            loans[min(rest)] = carried
        classes[region] = [region]
        return AbstractState.build(
            _canonical_rep(classes.values(), self.size), loans, self.dead | {region}
        )

    # ─── Lattice ───

    def join(self, other: AbstractState) -> AbstractState:
        """Partition join (finest common coarsening), loan union per class, dead intersection."""
        parent = list(range(self.size))

        def find(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for state in (self, other):
            for r, root in enumerate(state.rep):
                a, b = find(r), find(root)
                if a != b:
                    parent[max(a, b)] = min(a, b)
        rep = tuple(find(r) for r in range(self.size))
        loans: dict[int, set[int]] = {}
        for state in (self, other):
            for root, ids in state.loans:
                loans.setdefault(rep[root], set()).update(ids)
        return AbstractState.build(_canonical_rep(_group(rep), self.size), loans, self.dead & other.dead)

    def leq(self, other: AbstractState) -> bool:
        for r in range(self.size):
            if other.rep[self.rep[r]] != other.rep[r]:
                return False
        mine, theirs = self.loan_map(), other.loan_map()
        for root, ids in mine.items():
            if not ids <= theirs.get(other.rep[root], frozenset()):
                return False
        return self.dead >= other.dead

    # ─── Rendering ───

    def render(self) -> str:
        """`{rep -> {loan ids}} | partition | dead set` for dataflow dumps."""
        loans = ", ".join(
            f"'?{r} -> {{{', '.join(f'L{i}' for i in sorted(ids))}}}" for r, ids in self.loans
        )
        parts = [
            "{" + ", ".join(f"'?{m}" for m in members) + "}"
            for members in self.classes().values()
            if len(members) > 1
        ]
        dead = ", ".join(f"'?{r}" for r in sorted(self.dead))
        return f"{{{loans}}} | [{' '.join(parts)}] | dead {{{dead}}}"


def _group(rep: tuple[int, ...]) -> list[list[int]]:
    groups: dict[int, list[int]] = {}
    for r, root in enumerate(rep):
        groups.setdefault(root, []).append(r)
    return list(groups.values())

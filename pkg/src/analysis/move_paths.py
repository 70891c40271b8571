"""
Move-path universe.

The tracked places of a function: every local, every place moved out of or
dropped, and all prefixes of those. Places reached through a dereference of a
reference are never tracked: nothing may be moved out of them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from src.ir import rustir as ir


@dataclass
class MovePathUniverse:
    paths: list[ir.Place]
    index: dict[ir.Place, int] = field(default_factory=dict)
    # path index -> itself plus every tracked path it is a prefix of
    descendants: dict[int, frozenset[int]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.index = {p: i for i, p in enumerate(self.paths)}
        for i, p in enumerate(self.paths):
            self.descendants[i] = frozenset(
                j for j, q in enumerate(self.paths) if p.is_prefix_of(q)
            )

    def __len__(self) -> int:
        return len(self.paths)

    def lookup(self, place: ir.Place) -> int | None:
        return self.index.get(place)

    def root(self, local: int) -> int:
        return self.index[ir.Place(local)]

    def prefixes(self, place: ir.Place) -> list[int]:
        """Tracked prefixes of place, shortest first, place itself included if tracked."""
        return [self.index[p] for p in place.prefixes() if p in self.index]

    def strict_prefixes(self, place: ir.Place) -> list[int]:
        return [self.index[p] for p in place.prefixes()[:-1] if p in self.index]

    def extensions(self, place: ir.Place) -> frozenset[int]:
        """Tracked paths that have place as a prefix (place itself included)."""
        i = self.index.get(place)
        if i is not None:
            return self.descendants[i]
        return frozenset(j for j, q in enumerate(self.paths) if place.is_prefix_of(q))

    def conflicting(self, place: ir.Place) -> frozenset[int]:
        """Tracked paths prefix-related to place in either direction."""
        return frozenset(self.prefixes(place)) | self.extensions(place)

    def longest_prefix(self, place: ir.Place) -> int:
        return self.prefixes(place)[-1]

    def render(self, fn: ir.RirFunction, adts: ir.AdtTable, state: frozenset[int]) -> str:
        names = sorted(ir.describe_place(fn, adts, self.paths[i]) for i in state)
        return "{" + ", ".join(names) + "}"


def moved_and_dropped_places(fn: ir.RirFunction) -> list[ir.Place]:
    out: list[ir.Place] = []
    for n in sorted(fn.nodes):
        instr = fn.nodes[n]
        match instr:
            case ir.Assign(rvalue=rv):
                out.extend(op.place for op in ir.operand_places(rv) if isinstance(op, ir.Move))
            case ir.Call(args=args):
                out.extend(op.place for op in args if isinstance(op, ir.Move))
            case ir.Drop(place=p) | ir.ConditionalDrop(place=p):
                out.append(p)
    return out


def move_paths(fn: ir.RirFunction, adts: ir.AdtTable) -> MovePathUniverse:
    paths: list[ir.Place] = [ir.Place(local) for local in range(len(fn.locals))]
    seen = set(paths)
    for place in moved_and_dropped_places(fn):
        if ir.through_ref_deref(fn, adts, place):
            continue
        for prefix in place.prefixes():
            if prefix not in seen:
                seen.add(prefix)
                paths.append(prefix)
    return MovePathUniverse(paths)

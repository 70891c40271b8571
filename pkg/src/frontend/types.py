"""
Rustlight types.

The same constructors serve the surface language and RustIR: a RefTy's region
is a lifetime name (or None when elided) in the AST and a dense region id
after lowering.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass, replace


@dataclass(frozen=True, slots=True)
class UnitTy:
    def __str__(self) -> str:
        return "()"


@dataclass(frozen=True, slots=True)
class BoolTy:
    def __str__(self) -> str:
        return "bool"


@dataclass(frozen=True, slots=True)
class I32Ty:
    def __str__(self) -> str:
        return "i32"


@dataclass(frozen=True, slots=True)
class BoxTy:
    inner: RlType

    def __str__(self) -> str:
        return f"Box<{self.inner}>"


@dataclass(frozen=True, slots=True)
class RefTy:
    region: str | int | None
    mutable: bool
    inner: RlType

    def __str__(self) -> str:
        if self.region is None:
            lt = ""
        elif isinstance(self.region, int):
            lt = f"'?{self.region} "
        else:
            lt = f"'{self.region} "
        return f"&{lt}{'mut ' if self.mutable else ''}{self.inner}"


@dataclass(frozen=True, slots=True)
class AdtTy:
    name: str

    def __str__(self) -> str:
        return self.name


RlType = UnitTy | BoolTy | I32Ty | BoxTy | RefTy | AdtTy

UNIT = UnitTy()
BOOL = BoolTy()
I32 = I32Ty()


def erase_regions(ty: RlType) -> RlType:
    if isinstance(ty, BoxTy):
        return BoxTy(erase_regions(ty.inner))
    if isinstance(ty, RefTy):
        return RefTy(None, ty.mutable, erase_regions(ty.inner))
    return ty


def same_type(a: RlType, b: RlType) -> bool:
    """Structural equality up to region identifiers."""
    return erase_regions(a) == erase_regions(b)


def coercible(actual: RlType, expected: RlType) -> bool:
    """`actual` may be used where `expected` is required (adds &mut T -> &T)."""
    if same_type(actual, expected):
        return True
    return (
        isinstance(actual, RefTy)
        and isinstance(expected, RefTy)
        and actual.mutable
        and not expected.mutable
        and same_type(actual.inner, expected.inner)
    )


def is_copy(ty: RlType) -> bool:
    """Unit, bool, i32 and shared references are Copy; everything else moves."""
    if isinstance(ty, (UnitTy, BoolTy, I32Ty)):
        return True
    return isinstance(ty, RefTy) and not ty.mutable


def regions_of(ty: RlType) -> list[str | int]:
    """Region annotations in pre-order; elided ones are skipped."""
    out: list[str | int] = []
    _collect_regions(ty, out)
    return out


def _collect_regions(ty: RlType, out: list[str | int]) -> None:
    if isinstance(ty, RefTy):
        if ty.region is not None:
            out.append(ty.region)
        _collect_regions(ty.inner, out)
    elif isinstance(ty, BoxTy):
        _collect_regions(ty.inner, out)


def ref_positions(ty: RlType) -> int:
    """Number of reference constructors occurring in the type."""
    if isinstance(ty, RefTy):
        return 1 + ref_positions(ty.inner)
    if isinstance(ty, BoxTy):
        return ref_positions(ty.inner)
    return 0


def map_regions(ty: RlType, fn: Callable[[str | int | None], str | int | None]) -> RlType:
    """Rebuild the type with every RefTy region replaced by fn(region)."""
    if isinstance(ty, RefTy):
        return replace(ty, region=fn(ty.region), inner=map_regions(ty.inner, fn))
    if isinstance(ty, BoxTy):
        return BoxTy(map_regions(ty.inner, fn))
    return ty

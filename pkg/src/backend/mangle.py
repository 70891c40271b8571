"""Type name mangling for emitted C identifiers (regions are erased first)."""

from __future__ import annotations

from src.frontend.types import AdtTy, BoolTy, BoxTy, I32Ty, RefTy, RlType, UnitTy, erase_regions


def mangle(ty: RlType) -> str:
    """Injective, prefix-free encoding: `box_i32`, `refmut_List`, `adt_lower`."""
    ty = erase_regions(ty)
    match ty:
        case UnitTy():
            return "unit"
        case BoolTy():
            return "bool"
        case I32Ty():
            return "i32"
        case BoxTy(inner=inner):
            return "box_" + mangle(inner)
        case RefTy(mutable=m, inner=inner):
            return ("refmut_" if m else "ref_") + mangle(inner)
        case AdtTy(name=name):
            # lower-case ADT names could collide with the builtin words above
            return name if name[:1].isupper() else "adt_" + name
    raise TypeError(f"cannot mangle {ty!r}")

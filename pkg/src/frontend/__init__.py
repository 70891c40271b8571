"""Rustlight front end: surface syntax, types and type checking."""

from src.frontend.parser import parse
from src.frontend.typecheck import TypedModule, typecheck

__all__ = ["parse", "typecheck", "TypedModule"]

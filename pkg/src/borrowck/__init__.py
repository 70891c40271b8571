"""Borrow checker over RustIR (regions as union-find classes, loans as sets)."""

from src.borrowck.check import borrow_check

__all__ = ["borrow_check"]

"""
Exception hierarchy.

User-facing problems travel as Diagnostic records; exceptions are reserved for
passes that cannot continue (parse/typecheck) and for compiler bugs.
"""

from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from src.core.diagnostics import Diagnostic


class RustlightError(Exception):
    """Base class for every error raised by the compiler."""


class CompileError(RustlightError):
    """Raised by a front-end pass that produced at least one diagnostic."""

    def __init__(self, diagnostics: list[Diagnostic]) -> None:
        self.diagnostics = list(diagnostics)
        first = self.diagnostics[0].message if self.diagnostics else "compile error"
        super().__init__(first)


class UsageError(RustlightError):
    """Bad command line usage (exit code 2)."""


class InternalCompilerError(RustlightError):
    """A violated internal invariant; always a compiler bug."""


class FixpointDivergence(InternalCompilerError):
    """The dataflow solver exceeded its iteration cap."""


class RegionError(InternalCompilerError):
    """A loans-map lookup used a region that is not a class representative."""

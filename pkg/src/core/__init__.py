"""Rustlight core package: diagnostics, errors and logging shared by every pass."""

from src.core.diagnostics import Diagnostic, Kind, Span, make, sort_diagnostics
from src.core.errors import (
    CompileError,
    FixpointDivergence,
    InternalCompilerError,
    RegionError,
    RustlightError,
    UsageError,
)
from src.core.log import configure_logging, get_logger

__version__ = "0.1.0"

__all__ = [
    "Diagnostic",
    "Kind",
    "Span",
    "make",
    "sort_diagnostics",
    "CompileError",
    "FixpointDivergence",
    "InternalCompilerError",
    "RegionError",
    "RustlightError",
    "UsageError",
    "configure_logging",
    "get_logger",
    "__version__",
]

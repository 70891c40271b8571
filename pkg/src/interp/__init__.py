"""Reference interpreter with a structured, trap-checking memory model."""

from src.interp.interpreter import Execution, eval_module

__all__ = ["Execution", "eval_module"]

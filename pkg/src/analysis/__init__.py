"""Dataflow framework and the analyses built on it."""

from src.analysis.dataflow import Direction, FlowResult, Semilattice, solve
from src.analysis.drop_elab import elaborate, elaborate_module
from src.analysis.move_check import move_check

__all__ = ["Direction", "FlowResult", "Semilattice", "solve", "elaborate", "elaborate_module", "move_check"]

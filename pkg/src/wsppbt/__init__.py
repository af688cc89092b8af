"""Workflow satisfiability: pattern backtracking, PB encodings and phase-transition tools."""

from .core import Constraint, Instance, Kind, Pattern, WSPError, eliminate_equals, verify_plan
from .generator import GenConfig, generate
from .solver import HeuristicWeights, SolveResult, compiled_available, solve

__all__ = [
    "Constraint", "Instance", "Kind", "Pattern", "WSPError", "eliminate_equals", "verify_plan",
    "GenConfig", "generate", "HeuristicWeights", "SolveResult", "compiled_available", "solve",
]
__version__ = "0.1.0"

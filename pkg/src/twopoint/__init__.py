"""Two-value concentration of induced-subgraph statistics in G(n, p).

Predicted windows, moment diagnostics, exact solvers and a Monte Carlo
harness to compare them.
"""

from .errors import BracketError, CapacityError, DomainError, ScanRangeError, TwoPointError, ValidationError
from .graph import Graph, RngSpec, VertexSet, gen_gnp
from .predictor import EdgeBudgetFn, ModelParams, PredictionWindow
from .solvers import Budget, SolveResult

__all__ = [
    "BracketError", "Budget", "CapacityError", "DomainError", "EdgeBudgetFn", "Graph", "ModelParams",
    "PredictionWindow", "RngSpec", "ScanRangeError", "SolveResult", "TwoPointError", "ValidationError",
    "VertexSet", "gen_gnp",
]

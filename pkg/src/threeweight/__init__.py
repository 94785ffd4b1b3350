"""Three-weight message-passing ADMM on bipartite factor graphs."""

from .engine import Mode, RunReport, Solver, SolverConfig, solve
from .graph import (
    INFINITE,
    STANDARD,
    ZERO,
    CertaintyContradiction,
    FactorGraph,
    Weight,
    WeightKind,
    build_graph,
    dominant_average,
)

__version__ = "0.1.0"

__all__ = [
    "Mode", "RunReport", "Solver", "SolverConfig", "solve",
    "INFINITE", "STANDARD", "ZERO", "CertaintyContradiction", "FactorGraph",
    "Weight", "WeightKind", "build_graph", "dominant_average",
]

"""Divide and Concur: the difference-map iteration over a factor graph.

The state is the vector of left-to-right messages ``m``, one entry per
edge.  ``P_D`` projects onto the left constraint sets (each left node owns
a disjoint slice of edges, so the projection is the concatenation of the
per-node ones) and ``P_C`` onto the consensus set (per equality node, all
edges take the mean).  With hard constraints only this is exactly the
single-weight ADMM iteration with ``alpha == rho0``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .engine import Mode, Priors, RunReport, SolverConfig
from .graph import STANDARD, FactorGraph
from .ties import TieStreams, init_generator


@dataclass
class ProjectionPair:
    project_D: Callable[[np.ndarray], np.ndarray]
    project_C: Callable[[np.ndarray], np.ndarray]
    ties: TieStreams | None = None


def concur_project(m, graph: FactorGraph) -> np.ndarray:
    """Replace every edge value by the mean over its equality node."""
    m = np.asarray(m, dtype=float)
    var = graph.edge_variable
    sums = np.bincount(var, weights=m, minlength=graph.variable_count)
    return (sums / np.maximum(graph.degree, 1))[var]


def divide_project(n, graph: FactorGraph, ties: TieStreams, rho0: float = 1.0) -> np.ndarray:
    """Apply every left node's minimizer with standard weights on all edges."""
    n = np.asarray(n, dtype=float)
    x = np.empty_like(n)
    for group in graph.groups():
        idx, mask = group.edges, group.mask
        w = np.full(idx.shape, STANDARD, dtype=np.int8)
        xb, _ = group.minimizer.minimize(n[idx], w, mask, group.nodes, ties, rho0)
        x[idx[mask]] = xb[mask]
    return x


def projection_pair(graph: FactorGraph, seed: int = 0, rho0: float = 1.0) -> ProjectionPair:
    """Projections for ``graph``; ties use the same per-node streams as the engine."""
    ties = TieStreams(seed)
    return ProjectionPair(
        project_D=lambda v: divide_project(v, graph, ties, rho0),
        project_C=lambda v: concur_project(v, graph),
        ties=ties,
    )


def difference_map_step(m, pair: ProjectionPair) -> np.ndarray:
    """``m' = P_D(2 P_C(m) - m) - (P_C(m) - m)``."""
    m = np.asarray(m, dtype=float)
    pc = pair.project_C(m)
    return pair.project_D(2.0 * pc - m) - (pc - m)


def difference_map_parts(m, pair: ProjectionPair):
    """Both forms of one step, sharing a single ``P_D`` evaluation.

    Returns ``(n_next, m_two_step, m_one_step)`` where ``n_next = 2 P_C(m) - m``,
    ``m_two_step = m + P_D(n_next) - P_C(m)`` and ``m_one_step`` is the
    single-equation update.
    """
    m = np.asarray(m, dtype=float)
    pc = pair.project_C(m)
    n_next = 2.0 * pc - m
    pd = pair.project_D(n_next)
    return n_next, m + pd - pc, pd - (pc - m)


def initial_messages(graph: FactorGraph, seed: int, priors: Priors | None = None) -> np.ndarray:
    """Per-edge starting messages drawn exactly as the engine draws them."""
    z0 = init_generator(seed).uniform(0.0, 1.0, graph.variable_count)
    for var, (value, _weight) in (priors or {}).items():
        z0[var] = value
    return z0[graph.edge_variable]


def solve_dc(graph: FactorGraph, seed: int = 0, tol: float = 1e-8, max_iters: int = 1_000_000,
             priors: Priors | None = None, rho0: float = 1.0, callback=None) -> RunReport:
    """Run the difference map until no message changes by more than ``tol``.

    Iterations are counted the same way as the engine's: the first one maps
    the initial right-to-left messages through ``P_D``.  Prior weights are
    ignored; priors only seed the starting point.
    """
    pair = projection_pair(graph, seed, rho0)
    n = initial_messages(graph, seed, priors)
    m = np.zeros_like(n)
    converged = False
    residual = np.inf
    k = 0
    while k < max_iters:
        k += 1
        if k == 1:
            m_new = pair.project_D(n)
        else:
            m_new = difference_map_step(m, pair)
        pc = pair.project_C(m_new)
        n_new = 2.0 * pc - m_new
        residual = float(max(np.abs(m_new - m).max(initial=0.0), np.abs(n_new - n).max(initial=0.0)))
        m, n = m_new, n_new
        if callback is not None:
            callback(k, m, n)
        if residual <= tol:
            converged = True
            break
    sums = np.bincount(graph.edge_variable, weights=m, minlength=graph.variable_count)
    solution = sums / np.maximum(graph.degree, 1)
    config = SolverConfig(rho0=rho0, alpha=rho0, tol=tol, max_iters=max_iters,
                          mode=Mode.SINGLE_WEIGHT, seed=seed)
    return RunReport(k, converged, residual, solution, seed, config, tie_breaks=pair.ties.draws)


__all__ = [
    "ProjectionPair", "concur_project", "divide_project", "projection_pair",
    "difference_map_step", "difference_map_parts", "initial_messages", "solve_dc",
]

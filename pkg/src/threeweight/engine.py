"""Message-passing ADMM with three-valued message weights.

One iteration runs, in order:

1. every left node computes proximal beliefs ``x`` from its incoming
   ``(n, w_left)`` messages and chooses outgoing weights ``w_right``;
2. ``u`` is cleared on edges that just received an infinite weight, and
   ``m = x + u`` is sent right;
3. every equality node takes the dominant average of its ``m`` messages and
   returns a common weight class;
4. ``u`` is reset or integrated per edge, and ``n = z - u`` is sent left.

Single-weight mode is the same iteration with every weight forced to the
standard value, which is classic message-passing ADMM.
"""

from __future__ import annotations

import enum
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .graph import (
    CONTRADICTION_TOL,
    INFINITE,
    STANDARD,
    ZERO,
    CertaintyContradiction,
    EdgeArrays,
    EdgeState,
    FactorGraph,
    MinimizerResult,
    Weight,
    WeightKind,
    _kind,
    dominant_average,
)
from .ties import TieStreams, init_generator

log = logging.getLogger(__name__)


class Mode(str, enum.Enum):
    THREE_WEIGHT = "three-weight"
    SINGLE_WEIGHT = "single"


@dataclass(frozen=True)
class SolverConfig:
    rho0: float = 1.0
    alpha: float = 1.0
    tol: float = 1e-8
    max_iters: int = 1_000_000
    mode: Mode = Mode.THREE_WEIGHT
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if not (0 < self.rho0 < np.inf):
            raise ValueError(f"rho0 must be positive and finite, got {self.rho0}")
        if not (0 < self.alpha < np.inf):
            raise ValueError(f"alpha must be positive and finite, got {self.alpha}")
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")

    @property
    def single(self) -> bool:
        return self.mode is Mode.SINGLE_WEIGHT


@dataclass
class SolverState:
    graph: FactorGraph
    edges: EdgeArrays
    z: np.ndarray  # per variable
    iteration: int = 0
    residual: float = np.inf


@dataclass
class RunReport:
    iterations: int
    converged: bool
    final_residual: float
    solution: np.ndarray
    seed: int
    config: SolverConfig
    tie_breaks: int = 0
    state: SolverState | None = field(default=None, repr=False)


Priors = Mapping[int, tuple]


def initialize(graph: FactorGraph, config: SolverConfig, priors: Priors | None = None) -> SolverState:
    """Set ``u = 0`` and the first right-to-left messages.

    Variables without a prior start from a seeded uniform draw in [0, 1]
    with zero weight.  ``priors`` maps a variable id to ``(value, weight)``;
    an infinite prior pins a known value, a zero-weight prior is only a
    starting hint.
    """
    V = graph.variable_count
    z0 = init_generator(config.seed).uniform(0.0, 1.0, V)
    w0 = np.full(V, ZERO, dtype=np.int8)
    for var, (value, weight) in (priors or {}).items():
        if not 0 <= var < V:
            raise ValueError(f"prior for unknown variable {var}")
        z0[var] = value
        w0[var] = _kind(weight)
    if config.single:
        w0[:] = STANDARD

    edges = EdgeArrays(graph.num_edges)
    edges.z[:] = z0[graph.edge_variable]
    edges.n[:] = edges.z
    edges.w_left[:] = w0[graph.edge_variable]
    return SolverState(graph, edges, z0.copy())


def left_update(graph: FactorGraph, node: int, n, w_left, config: SolverConfig, ties: TieStreams) -> MinimizerResult:
    """Proximal step of a single left node (see :meth:`Solver.iterate` for the batched form)."""
    spec = graph.left_nodes[node]
    n = np.asarray(n, dtype=float).reshape(1, -1)
    w = np.asarray([_kind(k) for k in w_left], dtype=np.int8).reshape(1, -1)
    if n.shape[1] != len(spec.edges) or w.shape != n.shape:
        raise ValueError(f"node {node} has {len(spec.edges)} edges")
    if config.single:
        w[:] = STANDARD
    mask = np.ones_like(w, dtype=bool)
    x, w_out = spec.minimizer.minimize(n, w, mask, np.array([node]), ties, config.rho0)
    if config.single:
        w_out = np.full_like(w_out, STANDARD)
    return MinimizerResult(x[0], w_out[0])


def right_update(m, w_right) -> tuple[float, list[WeightKind]]:
    """Equality-node update: shared belief plus the weight sent back on every edge."""
    z, top = dominant_average(m, w_right)
    return z, [top] * len(m)


def u_update(edge: EdgeState, config: SolverConfig, others_all_zero: bool) -> float:
    """New disagreement accumulator for one edge.

    ``edge`` must already hold this iteration's ``x``, ``z``, outgoing
    ``w_right`` and returned ``w_left``.  ``others_all_zero`` says whether
    every other edge into the same equality node sent a zero weight.
    """
    if INFINITE in (edge.w_right, edge.w_left):
        return 0.0
    if edge.w_right == ZERO:
        return 0.0
    if others_all_zero:
        return 0.0
    return edge.u + (config.alpha / config.rho0) * (edge.x - edge.z)


class Solver:
    """Stateful driver for one run on one graph.

    Parameters
    ----------
    graph : FactorGraph
    config : SolverConfig
    priors : mapping, optional
        Per-variable ``(value, weight)`` initial messages.
    threads : int
        Worker threads for the left phase.  Results do not depend on it.
    """

    def __init__(self, graph: FactorGraph, config: SolverConfig, priors: Priors | None = None, threads: int = 1):
        self.graph = graph
        self.config = config
        self.ties = TieStreams(config.seed)
        self.state = initialize(graph, config, priors)
        self.threads = max(1, int(threads))
        self._pool = ThreadPoolExecutor(self.threads) if self.threads > 1 else None

    def close(self):
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def _left_phase(self, n, w_left):
        graph, cfg = self.graph, self.config
        x = np.empty_like(n)
        w_right = np.empty_like(w_left)
        jobs = []
        for group in graph.groups():
            rows = len(group.nodes)
            chunks = min(self.threads, rows)
            bounds = np.linspace(0, rows, chunks + 1).astype(int)
            for a, b in zip(bounds[:-1], bounds[1:]):
                jobs.append((group, a, b))

        def run(job):
            group, a, b = job
            idx, mask = group.edges[a:b], group.mask[a:b]
            xb, wb = group.minimizer.minimize(
                n[idx], w_left[idx], mask, group.nodes[a:b], self.ties, cfg.rho0
            )
            x[idx[mask]] = xb[mask]
            w_right[idx[mask]] = wb[mask]

        if self._pool is None:
            for job in jobs:
                run(job)
        else:
            list(self._pool.map(run, jobs))
        if cfg.single:
            w_right[:] = STANDARD
        return x, w_right

    def _concur(self, m, w_right):
        var = self.graph.edge_variable
        V = self.graph.variable_count
        n_inf = np.bincount(var, weights=(w_right == INFINITE), minlength=V)
        n_std = np.bincount(var, weights=(w_right == STANDARD), minlength=V)
        top = np.where(n_inf > 0, INFINITE, np.where(n_std > 0, STANDARD, ZERO)).astype(np.int8)
        chosen = w_right == top[var]
        counts = np.bincount(var, weights=chosen, minlength=V)
        z = np.bincount(var, weights=np.where(chosen, m, 0.0), minlength=V) / counts
        if n_inf.any():
            certain = np.flatnonzero(w_right == INFINITE)
            hi = np.full(V, -np.inf)
            lo = np.full(V, np.inf)
            np.maximum.at(hi, var[certain], m[certain])
            np.minimum.at(lo, var[certain], m[certain])
            bad = np.flatnonzero(hi - lo > CONTRADICTION_TOL)
            if bad.size:
                j = int(bad[0])
                vals = m[certain[var[certain] == j]]
                raise CertaintyContradiction(
                    f"equality node {j} received conflicting certain values {sorted(vals.tolist())}",
                    node=j,
                )
        return z, top, n_inf + n_std

    def iterate(self) -> float:
        """Run one full sweep and return the residual (max change of any m or n)."""
        e = self.state.edges
        var = self.graph.edge_variable
        cfg = self.config
        m_prev, n_prev = e.m, e.n

        x, w_right = self._left_phase(e.n, e.w_left)
        u = np.where(w_right == INFINITE, 0.0, e.u)
        m = x + u

        z_var, top, nonzero = self._concur(m, w_right)
        z = z_var[var]
        w_left = top[var]

        reset = (
            (w_right == INFINITE)
            | (w_left == INFINITE)
            | (w_right == ZERO)
            | ((w_right == STANDARD) & (nonzero[var] == 1))
        )
        u = np.where(reset, 0.0, u + (cfg.alpha / cfg.rho0) * (x - z))
        n = z - u

        if len(m):
            residual = float(max(np.abs(m - m_prev).max(), np.abs(n - n_prev).max()))
        else:
            residual = 0.0
        e.x, e.m, e.z, e.u, e.n = x, m, z, u, n
        e.w_right, e.w_left = w_right, w_left
        self.state.z = z_var
        self.state.iteration += 1
        self.state.residual = residual
        return residual

    def run(self, callback: Callable[[SolverState], None] | None = None) -> RunReport:
        cfg = self.config
        converged = False
        while self.state.iteration < cfg.max_iters:
            residual = self.iterate()
            if callback is not None:
                callback(self.state)
            if not np.isfinite(residual):
                log.warning("residual became non-finite at iteration %d", self.state.iteration)
                break
            if residual <= cfg.tol:
                converged = True
                break
        return RunReport(
            iterations=self.state.iteration,
            converged=converged,
            final_residual=self.state.residual,
            solution=self.state.z.copy(),
            seed=cfg.seed,
            config=cfg,
            tie_breaks=self.ties.draws,
            state=self.state,
        )


def solve(graph: FactorGraph, config: SolverConfig, priors: Priors | None = None, threads: int = 1,
          callback: Callable[[SolverState], None] | None = None) -> RunReport:
    """Iterate until the residual drops to ``config.tol`` or ``max_iters`` is hit."""
    with Solver(graph, config, priors, threads=threads) as solver:
        return solver.run(callback)


__all__ = [
    "Mode", "SolverConfig", "SolverState", "RunReport", "Solver", "Weight",
    "initialize", "left_update", "right_update", "u_update", "solve",
]

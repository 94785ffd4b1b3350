"""Factor-graph data model and the three-valued weight algebra.

Problems are expressed as a bipartite (Forney-style) factor graph.  Left
nodes are cost functions, right nodes are equality constraints, one per
original variable.  Each edge carries a private copy of its variable plus
the ADMM message state.  Edge state is held struct-of-arrays style so the
engine can sweep it with vectorized numpy operations in edge-id order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum
from typing import Sequence

import numpy as np

# Infinite-weight values closer than this are considered to agree.
CONTRADICTION_TOL = 1e-9


class CertaintyContradiction(RuntimeError):
    """Two certain (infinite-weight) messages disagree.

    Correct certainty logic makes this unreachable, so hitting it means a
    minimizer or an encoding is broken.
    """

    def __init__(self, message: str, node: int | None = None):
        super().__init__(message)
        self.node = node


class GraphError(ValueError):
    """Malformed factor-graph construction input."""


class WeightKind(IntEnum):
    ZERO = 0
    STANDARD = 1
    INFINITE = 2


ZERO = WeightKind.ZERO
STANDARD = WeightKind.STANDARD
INFINITE = WeightKind.INFINITE


@dataclass(frozen=True, order=True)
class Weight:
    """A message weight: zero ("no opinion"), standard, or infinite ("certain").

    Only standard weights carry a numeric value.  Weights compare by kind,
    which is the dominance order used for averaging.
    """

    kind: WeightKind
    rho: float = field(default=0.0, compare=False)

    def __post_init__(self):
        if self.kind == STANDARD and not (0.0 < self.rho < np.inf):
            raise ValueError(f"standard weight must be positive and finite, got {self.rho}")

    @classmethod
    def zero(cls) -> Weight:
        return cls(ZERO)

    @classmethod
    def standard(cls, rho0: float = 1.0) -> Weight:
        return cls(STANDARD, float(rho0))

    @classmethod
    def infinite(cls) -> Weight:
        return cls(INFINITE)

    @property
    def value(self) -> float:
        if self.kind == ZERO:
            return 0.0
        if self.kind == INFINITE:
            return np.inf
        return self.rho

    def __repr__(self):
        if self.kind == STANDARD:
            return f"Weight.standard({self.rho:g})"
        return f"Weight.{self.kind.name.lower()}()"


def _kind(w) -> int:
    return int(w.kind) if isinstance(w, Weight) else int(w)


@dataclass
class EdgeState:
    """Snapshot of one edge: beliefs, disagreement accumulator, messages, weights."""

    x: float = 0.0
    z: float = 0.0
    u: float = 0.0
    m: float = 0.0
    n: float = 0.0
    w_right: WeightKind = ZERO
    w_left: WeightKind = ZERO


class EdgeArrays:
    """Per-edge solver state, one numpy array per field, indexed by edge id."""

    FIELDS = ("x", "z", "u", "m", "n")

    def __init__(self, num_edges: int):
        for name in self.FIELDS:
            setattr(self, name, np.zeros(num_edges))
        self.w_right = np.zeros(num_edges, dtype=np.int8)
        self.w_left = np.zeros(num_edges, dtype=np.int8)

    def __len__(self):
        return len(self.x)

    def __getitem__(self, e: int) -> EdgeState:
        return EdgeState(
            float(self.x[e]), float(self.z[e]), float(self.u[e]),
            float(self.m[e]), float(self.n[e]),
            WeightKind(int(self.w_right[e])), WeightKind(int(self.w_left[e])),
        )

    def copy(self) -> EdgeArrays:
        other = EdgeArrays(0)
        for name in self.FIELDS + ("w_right", "w_left"):
            setattr(other, name, getattr(self, name).copy())
        return other


@dataclass
class MinimizerResult:
    """Output of one left node: a belief and an outgoing weight per incident edge."""

    x: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.w = np.asarray(self.w, dtype=np.int8)
        if self.x.shape != self.w.shape:
            raise ValueError("one weight per output belief is required")

    @property
    def weights(self) -> list[WeightKind]:
        return [WeightKind(int(k)) for k in self.w]


@dataclass(frozen=True)
class LeftNode:
    minimizer: object
    variables: tuple[int, ...]
    edges: tuple[int, ...]


@dataclass(frozen=True)
class RightNode:
    variable: int
    edges: tuple[int, ...]


@dataclass
class NodeGroup:
    """Left nodes sharing one minimizer, with a padded edge-index matrix.

    ``edges[i, k]`` is the k-th edge of node ``nodes[i]``; padding slots hold
    edge 0 and are flagged False in ``mask``.
    """

    minimizer: object
    nodes: np.ndarray
    edges: np.ndarray
    mask: np.ndarray


class FactorGraph:
    """Bipartite graph of cost-function nodes (left) and equality nodes (right)."""

    def __init__(self, left_nodes: list[LeftNode], variable_count: int):
        self.left_nodes = left_nodes
        self.variable_count = variable_count
        edge_var = [v for node in left_nodes for v in node.variables]
        self.edge_variable = np.asarray(edge_var, dtype=np.intp)
        self.edge_left = np.repeat(
            np.arange(len(left_nodes), dtype=np.intp),
            [len(node.edges) for node in left_nodes],
        )
        self.degree = np.bincount(self.edge_variable, minlength=variable_count)
        order = np.argsort(self.edge_variable, kind="stable").tolist()
        ends = np.cumsum(self.degree).tolist()
        starts = [0] + ends[:-1]
        self.right_nodes = [
            RightNode(j, tuple(order[a:b])) for j, (a, b) in enumerate(zip(starts, ends))
        ]
        self.edges = EdgeArrays(self.num_edges)
        self._groups: list[NodeGroup] | None = None

    @property
    def num_edges(self) -> int:
        return len(self.edge_variable)

    def groups(self) -> list[NodeGroup]:
        """Left nodes bucketed by minimizer, in order of first appearance."""
        if self._groups is None:
            buckets: dict[int, list[int]] = {}
            owners: dict[int, object] = {}
            for i, node in enumerate(self.left_nodes):
                buckets.setdefault(id(node.minimizer), []).append(i)
                owners[id(node.minimizer)] = node.minimizer
            groups = []
            for key, ids in buckets.items():
                width = max(len(self.left_nodes[i].edges) for i in ids)
                edges = np.zeros((len(ids), width), dtype=np.intp)
                mask = np.zeros((len(ids), width), dtype=bool)
                for row, i in enumerate(ids):
                    es = self.left_nodes[i].edges
                    edges[row, : len(es)] = es
                    mask[row, : len(es)] = True
                groups.append(NodeGroup(owners[key], np.asarray(ids, dtype=np.intp), edges, mask))
            self._groups = groups
        return self._groups

    def left_specs(self) -> list[tuple[object, tuple[int, ...]]]:
        """Recover (minimizer, variable ids) per left node from edge incidence."""
        return [
            (node.minimizer, tuple(int(self.edge_variable[e]) for e in node.edges))
            for node in self.left_nodes
        ]

    def __repr__(self):
        return (
            f"FactorGraph(left={len(self.left_nodes)}, "
            f"right={self.variable_count}, edges={self.num_edges})"
        )


def build_graph(left_specs: Sequence[tuple[object, Sequence[int]]], variable_count: int) -> FactorGraph:
    """Build a factor graph with one equality node per variable.

    Parameters
    ----------
    left_specs : sequence of (minimizer, variable ids)
        One entry per cost function.  Edges are numbered in the order the
        incidences appear here, so each left node owns a contiguous run.
    variable_count : int
        Number of original variables.  Every variable must be referenced by
        at least one cost function.

    Returns
    -------
    FactorGraph
        Edge state zeroed, all weights zero.
    """
    nodes = []
    next_edge = 0
    for idx, (minimizer, variables) in enumerate(left_specs):
        variables = tuple(int(v) for v in variables)
        if not variables:
            raise GraphError(f"left node {idx} references no variables")
        if len(set(variables)) != len(variables):
            raise GraphError(f"left node {idx} references a variable twice: {variables}")
        for v in variables:
            if not 0 <= v < variable_count:
                raise GraphError(f"left node {idx}: variable {v} out of range [0, {variable_count})")
        edges = tuple(range(next_edge, next_edge + len(variables)))
        next_edge += len(variables)
        nodes.append(LeftNode(minimizer, variables, edges))
    graph = FactorGraph(nodes, variable_count)
    orphans = np.flatnonzero(graph.degree == 0)
    if orphans.size:
        raise GraphError(f"variables without any cost function: {orphans[:10].tolist()}")
    return graph


def dominant_average(values, weights, tol: float = CONTRADICTION_TOL) -> tuple[float, WeightKind]:
    """Average values under the dominance rule for three-valued weights.

    Infinite-weighted values, if any, decide the result alone; otherwise
    standard-weighted values do (zero-weighted ones are ignored); with only
    zero weights the plain mean is used.  Returns the average together with
    the class that produced it.
    """
    values = np.asarray(values, dtype=float)
    kinds = np.asarray([_kind(w) for w in weights], dtype=np.int8)
    if values.size == 0 or values.shape != kinds.shape:
        raise ValueError("values and weights must be non-empty and of equal length")
    top = WeightKind(int(kinds.max()))
    chosen = values[kinds == top]
    if top == INFINITE and chosen.max() - chosen.min() > tol:
        raise CertaintyContradiction(f"certain values disagree: {sorted(chosen.tolist())}")
    return float(chosen.mean()), top

"""Packing N congruent circles (or d-spheres) into a square box.

Each circle contributes ``dims`` coordinate variables.  Every circle has a
box constraint keeping its center in ``[r, L - r]`` per axis, and every pair
of circles has a non-overlap constraint.  Both minimizers send zero-weight
messages when their constraint is slack, so in three-weight mode only the
active constraints pull on a circle.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .graph import INFINITE, STANDARD, ZERO, CertaintyContradiction, FactorGraph, build_graph
from .ties import init_generator

# centers closer than this have no usable separation direction
COINCIDENT = 1e-12
CONTACT_TOL = 1e-6

_PRIOR_TAG = 1


class PackingError(ValueError):
    pass


@dataclass
class PackingInstance:
    n: int
    box_side: float
    radius: float
    dims: int = 2
    initial: np.ndarray | None = None
    name: str = ""
    meta: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 1:
            raise PackingError("need at least one circle")
        if not (self.radius > 0 and 2 * self.radius <= self.box_side):
            raise PackingError(f"radius {self.radius} does not fit a box of side {self.box_side}")
        if self.initial is not None:
            self.initial = np.asarray(self.initial, dtype=float).reshape(self.n, self.dims)

    @property
    def lo(self) -> float:
        return self.radius

    @property
    def hi(self) -> float:
        return self.box_side - self.radius


class BoxConstraint:
    """Clamp a center into the feasible box; silent (zero weight) when already inside."""

    name = "box"

    def __init__(self, instance: PackingInstance):
        self.lo, self.hi = instance.lo, instance.hi

    def minimize(self, n, w, mask, nodes, ties, rho0):
        x = np.clip(n, self.lo, self.hi)
        outside = (x != n).any(axis=1)
        w_out = np.zeros(n.shape, dtype=np.int8)
        w_out[outside] = STANDARD
        return x, w_out


def _circle_weight(w):
    return w.max(axis=1)


class PairConstraint:
    """Push two overlapping circles apart along the line joining their centers.

    The circle whose incoming messages carry the lower weight absorbs the
    whole correction; equal weights split it evenly.  Non-overlapping pairs
    are left where they are with zero weight.
    """

    name = "pair"

    def __init__(self, instance: PackingInstance):
        self.dims = instance.dims
        self.diameter = 2.0 * instance.radius

    def minimize(self, n, w, mask, nodes, ties, rho0):
        d = self.dims
        a, b = n[:, :d], n[:, d:]
        diff = b - a
        dist = np.sqrt((diff * diff).sum(axis=1))
        hit = dist < self.diameter
        x = n.copy()
        w_out = np.full(n.shape, ZERO, dtype=np.int8)
        if not hit.any():
            return x, w_out

        rows = np.flatnonzero(hit)
        unit = np.empty((len(rows), d))
        near = dist[rows] < COINCIDENT
        far = ~near
        unit[far] = diff[rows[far]] / dist[rows[far], None]
        for k in np.flatnonzero(near):
            unit[k] = ties.direction(int(nodes[rows[k]]), d)

        wa = _circle_weight(w[rows, :d])
        wb = _circle_weight(w[rows, d:])
        both_certain = (wa == INFINITE) & (wb == INFINITE)
        if both_certain.any():
            i = int(nodes[rows[np.flatnonzero(both_certain)[0]]])
            raise CertaintyContradiction(f"pair node {i}: two pinned circles overlap", node=i)
        share_a = np.where(wa == wb, 0.5, np.where(wa < wb, 1.0, 0.0))
        gap = self.diameter - np.where(near, 0.0, dist[rows])
        x[rows, :d] = a[rows] - (share_a * gap)[:, None] * unit
        x[rows, d:] = b[rows] + ((1.0 - share_a) * gap)[:, None] * unit
        w_out[rows] = STANDARD
        return x, w_out


# ---------------------------------------------------------------------------


@dataclass
class PackingProblem:
    instance: PackingInstance
    graph: FactorGraph
    priors: dict


def variable(i: int, k: int, dims: int = 2) -> int:
    return i * dims + k


def encode(instance: PackingInstance, seed: int = 0) -> PackingProblem:
    """Factor graph plus zero-weight starting positions.

    Starting centers come from ``instance.initial`` if present, otherwise
    they are drawn uniformly in the feasible box from ``seed``.
    """
    n, d = instance.n, instance.dims
    box = BoxConstraint(instance)
    pair = PairConstraint(instance)
    coords = [list(range(i * d, (i + 1) * d)) for i in range(n)]
    specs = [(box, coords[i]) for i in range(n)]
    specs += [(pair, coords[i] + coords[j]) for i, j in combinations(range(n), 2)]
    graph = build_graph(specs, n * d)

    if instance.initial is not None:
        start = instance.initial
    else:
        start = init_generator(seed, _PRIOR_TAG).uniform(instance.lo, instance.hi, (n, d))
    priors = {i * d + k: (float(start[i, k]), ZERO) for i in range(n) for k in range(d)}
    return PackingProblem(instance, graph, priors)


def centers(instance: PackingInstance, solution) -> np.ndarray:
    return np.asarray(solution, dtype=float).reshape(instance.n, instance.dims)


def verify(instance: PackingInstance, solution, eps: float = 1e-8) -> bool:
    """All centers inside ``[r - eps, L - r + eps]`` and all pairwise distances at least ``2r - eps``."""
    c = centers(instance, solution)
    if not np.all(np.isfinite(c)):
        return False
    if (c < instance.lo - eps).any() or (c > instance.hi + eps).any():
        return False
    if instance.n < 2:
        return True
    i, j = np.triu_indices(instance.n, 1)
    dist = np.linalg.norm(c[i] - c[j], axis=1)
    return bool((dist >= 2 * instance.radius - eps).all())


def contacts(instance: PackingInstance, solution, tol: float = CONTACT_TOL) -> list[tuple[int, int]]:
    """Pairs of circles whose centers are within ``2r + tol`` of each other."""
    c = centers(instance, solution)
    if instance.n < 2:
        return []
    i, j = np.triu_indices(instance.n, 1)
    dist = np.linalg.norm(c[i] - c[j], axis=1)
    close = dist <= 2 * instance.radius + tol
    return [(int(a), int(b)) for a, b in zip(i[close], j[close])]


def rattlers(instance: PackingInstance, solution, tol: float = CONTACT_TOL) -> list[int]:
    """Circles touching neither another circle nor a wall."""
    c = centers(instance, solution)
    touching = {k for pair in contacts(instance, solution, tol) for k in pair}
    walls = ((c <= instance.lo + tol) | (c >= instance.hi - tol)).any(axis=1)
    return [k for k in range(instance.n) if k not in touching and not walls[k]]


# ---------------------------------------------------------------------------
# files


def parse(text: str, name: str = "") -> PackingInstance:
    """Instance format: ``n L r`` on the first line, then optionally n lines of starting centers."""
    rows = []
    meta = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line.lstrip("#").strip()
            if ":" in body:
                key, value = body.split(":", 1)
                meta[key.strip().lower()] = value.strip()
            continue
        rows.append(line.split())
    if not rows or len(rows[0]) != 3:
        raise PackingError("first line must be 'n L r'")
    try:
        n = int(rows[0][0])
        L, r = float(rows[0][1]), float(rows[0][2])
        body = [[float(t) for t in row] for row in rows[1:]]
    except ValueError as exc:
        raise PackingError(f"bad number: {exc}") from None
    initial = None
    if body:
        if len(body) != n or any(len(row) != len(body[0]) for row in body):
            raise PackingError(f"expected {n} center lines of equal width")
        initial = np.array(body)
    dims = initial.shape[1] if initial is not None else 2
    return PackingInstance(n, L, r, dims, initial, name, meta)


def read_instance(path) -> PackingInstance:
    with open(path) as fh:
        return parse(fh.read(), name=os.path.splitext(os.path.basename(path))[0])


def format_solution(instance: PackingInstance, solution) -> str:
    c = centers(instance, solution)
    lines = [" ".join(repr(float(v)) for v in row) for row in c]
    pairs = contacts(instance, solution)
    lines.append(f"# contacts: {len(pairs)}")
    lines += [f"contact {i} {j}" for i, j in pairs]
    return "\n".join(lines) + "\n"


def parse_solution(text: str) -> tuple[np.ndarray, list[tuple[int, int]]]:
    rows, pairs = [], []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("contact"):
            _, i, j = line.split()
            pairs.append((int(i), int(j)))
        else:
            rows.append([float(t) for t in line.split()])
    return np.array(rows), pairs

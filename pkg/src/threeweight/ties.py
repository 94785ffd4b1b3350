"""Seeded random streams, one per left node.

Each left node draws its tie-breaks from a private generator derived from
(seed, node id), so results do not depend on the order in which nodes are
visited or on how they are spread across threads.
"""

from __future__ import annotations

import threading

import numpy as np

# spawn-key prefixes keeping the initialization stream apart from node streams
_NODE_KEY = 1
_INIT_KEY = 2


class TieStreams:
    """Lazily created per-node generators with a draw counter."""

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._streams: dict[int, np.random.Generator] = {}
        self._draws: dict[int, int] = {}
        self._lock = threading.Lock()

    def stream(self, node: int) -> np.random.Generator:
        gen = self._streams.get(node)
        if gen is None:
            ss = np.random.SeedSequence(self.seed, spawn_key=(_NODE_KEY, int(node)))
            gen = np.random.Generator(np.random.PCG64(ss))
            with self._lock:
                gen = self._streams.setdefault(node, gen)
        return gen

    def _count(self, node: int):
        with self._lock:
            self._draws[node] = self._draws.get(node, 0) + 1

    def choice(self, node: int, candidates) -> int:
        """Pick one of ``candidates`` uniformly with the node's stream."""
        candidates = np.asarray(candidates)
        self._count(node)
        return int(candidates[self.stream(node).integers(len(candidates))])

    def direction(self, node: int, dim: int) -> np.ndarray:
        """A uniformly distributed unit vector in ``dim`` dimensions."""
        self._count(node)
        gen = self.stream(node)
        while True:
            v = gen.standard_normal(dim)
            norm = np.linalg.norm(v)
            if norm > 1e-12:
                return v / norm

    @property
    def draws(self) -> int:
        """Total number of random tie-breaks consumed so far."""
        return sum(self._draws.values())


def init_generator(seed: int, tag: int = 0) -> np.random.Generator:
    """Generator for seeded initial conditions, independent of tie streams."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(_INIT_KEY, int(tag)))
    return np.random.Generator(np.random.PCG64(ss))

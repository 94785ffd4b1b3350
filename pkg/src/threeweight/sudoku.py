"""N x N square-in-square Sudoku as one-on constraints over indicator variables.

Every open cell gets one indicator variable per digit that no clue in its
row, column or box already rules out.  Four families of one-on constraints
(cell, row/digit, column/digit, box/digit) are laid over the surviving
variables; a row/digit pair already satisfied by a clue contributes no
constraint.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .graph import INFINITE, STANDARD, CertaintyContradiction, FactorGraph, build_graph

FAMILIES = ("cell", "row", "col", "box")


class SudokuError(ValueError):
    """Malformed or directly contradictory puzzle."""


@dataclass
class SudokuInstance:
    n: int
    clues: dict[tuple[int, int], int] = field(default_factory=dict)
    name: str = ""
    meta: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        b = math.isqrt(self.n)
        if self.n < 1 or b * b != self.n:
            raise SudokuError(f"grid side {self.n} is not a perfect square")
        for (r, c), d in self.clues.items():
            if not (0 <= r < self.n and 0 <= c < self.n):
                raise SudokuError(f"clue position {(r, c)} outside the grid")
            if not 1 <= d <= self.n:
                raise SudokuError(f"clue digit {d} at {(r, c)} outside 1..{self.n}")

    @property
    def box_side(self) -> int:
        return math.isqrt(self.n)

    def box(self, r: int, c: int) -> int:
        b = self.box_side
        return (r // b) * b + c // b

    @classmethod
    def from_grid(cls, grid, name: str = "") -> SudokuInstance:
        grid = [list(row) for row in grid]
        clues = {
            (r, c): int(v)
            for r, row in enumerate(grid)
            for c, v in enumerate(row)
            if v not in (None, 0)
        }
        return cls(len(grid), clues, name)

    def grid(self) -> list[list[int]]:
        out = [[0] * self.n for _ in range(self.n)]
        for (r, c), d in self.clues.items():
            out[r][c] = d
        return out


# ---------------------------------------------------------------------------
# one-on minimizer


class OneOn:
    """Exactly one member edge is 1, the rest 0.

    The on-edge is the certainly-on edge if there is one, otherwise the
    largest incoming message among edges not certainly off, with exact ties
    broken from the node's seeded stream.  Outgoing weights are standard
    except that all become infinite when a certainly-on edge is present or
    when every edge but one is certainly off, and an edge that came in
    certain always goes out certain.
    """

    name = "one-on"

    def minimize(self, n, w, mask, nodes, ties, rho0):
        certain = (w == INFINITE) & mask
        on = certain & (n > 0.5)
        off = certain & ~on
        degree = mask.sum(axis=1)
        n_on = on.sum(axis=1)
        n_off = off.sum(axis=1)

        bad = np.flatnonzero((n_on > 1) | (n_off == degree))
        if bad.size:
            i = int(bad[0])
            what = "two certainly-on edges" if n_on[i] > 1 else "every edge certainly off"
            raise CertaintyContradiction(f"one-on node {int(nodes[i])}: {what}", node=int(nodes[i]))

        open_ = mask & ~off
        scores = np.where(open_, n, -np.inf)
        chosen = np.argmax(scores, axis=1)
        has_on = n_on == 1
        chosen[has_on] = np.argmax(on[has_on], axis=1)

        best = scores[np.arange(len(scores)), chosen]
        tied = (scores == best[:, None]) & open_
        for i in np.flatnonzero(~has_on & (tied.sum(axis=1) > 1)):
            chosen[i] = ties.choice(int(nodes[i]), np.flatnonzero(tied[i]))

        x = np.zeros_like(n)
        x[np.arange(len(x)), chosen] = 1.0
        w_out = np.full(n.shape, STANDARD, dtype=np.int8)
        forced = has_on | (n_off == degree - 1)
        w_out[forced] = INFINITE
        w_out[certain] = INFINITE
        return x, w_out


# ---------------------------------------------------------------------------
# encoding


@dataclass
class SudokuProblem:
    instance: SudokuInstance
    graph: FactorGraph
    priors: dict
    variables: list[tuple[int, int, int]]
    constraints: list[tuple[str, tuple[int, int]]]

    def family_sizes(self) -> dict[str, int]:
        counts = dict.fromkeys(FAMILIES, 0)
        for fam, _ in self.constraints:
            counts[fam] += 1
        return counts


def _check_clues(instance: SudokuInstance):
    seen = set()
    for (r, c), d in sorted(instance.clues.items()):
        for key in (("row", r, d), ("col", c, d), ("box", instance.box(r, c), d)):
            if key in seen:
                raise SudokuError(f"digit {d} repeated in {key[0]} {key[1]}")
            seen.add(key)
    return seen


def candidate_variables(instance: SudokuInstance) -> list[tuple[int, int, int]]:
    """Indicator variables ``(row, col, digit)`` surviving the clues, 0-based positions."""
    taken = _check_clues(instance)
    out = []
    for r in range(instance.n):
        for c in range(instance.n):
            if (r, c) in instance.clues:
                continue
            bx = instance.box(r, c)
            for d in range(1, instance.n + 1):
                if ("row", r, d) in taken or ("col", c, d) in taken or ("box", bx, d) in taken:
                    continue
                out.append((r, c, d))
    return out


def encode(instance: SudokuInstance, minimizer: OneOn | None = None) -> SudokuProblem:
    """Build the factor graph for ``instance``.

    Raises :class:`SudokuError` if the clues repeat a digit in a unit, or
    leave some cell or unit with no way to hold its digit.
    """
    minimizer = minimizer or OneOn()
    variables = candidate_variables(instance)
    members: dict[tuple[str, tuple[int, int]], list[int]] = {}
    for i, (r, c, d) in enumerate(variables):
        for key in (("cell", (r, c)), ("row", (r, d)), ("col", (c, d)), ("box", (instance.box(r, c), d))):
            members.setdefault(key, []).append(i)

    N = instance.n
    taken = _check_clues(instance)
    constraints = []
    for fam in FAMILIES:
        for a in range(N):
            for b in range(N):
                if fam == "cell":
                    needed = (a, b) not in instance.clues
                else:
                    needed = (fam, a, b + 1) not in taken
                key = (fam, (a, b + 1) if fam != "cell" else (a, b))
                if not needed:
                    continue
                if key not in members:
                    raise SudokuError(f"no candidate left for {fam} {key[1]}")
                constraints.append(key)

    specs = [(minimizer, members[key]) for key in constraints]
    graph = build_graph(specs, len(variables))
    return SudokuProblem(instance, graph, {}, variables, constraints)


# ---------------------------------------------------------------------------
# checking


def decode(instance: SudokuInstance, solution) -> list[list[int]]:
    """Grid from per-variable beliefs rounded at 0.5; cells not holding exactly one digit read 0."""
    variables = candidate_variables(instance)
    solution = np.asarray(solution, dtype=float)
    if solution.shape != (len(variables),):
        raise ValueError(f"expected {len(variables)} values, got {solution.shape}")
    grid = instance.grid()
    hits: dict[tuple[int, int], list[int]] = {}
    for (r, c, d), on in zip(variables, solution > 0.5):
        if on:
            hits.setdefault((r, c), []).append(d)
    for (r, c), ds in hits.items():
        if len(ds) == 1:
            grid[r][c] = ds[0]
    return grid


def grid_is_solution(instance: SudokuInstance, grid) -> bool:
    N = instance.n
    if len(grid) != N or any(len(row) != N for row in grid):
        return False
    if any(grid[r][c] != d for (r, c), d in instance.clues.items()):
        return False
    digits = set(range(1, N + 1))
    b = instance.box_side
    rows = [set(row) for row in grid]
    cols = [{grid[r][c] for r in range(N)} for c in range(N)]
    boxes = [
        {grid[br * b + i][bc * b + j] for i in range(b) for j in range(b)}
        for br in range(b) for bc in range(b)
    ]
    return all(unit == digits for unit in rows + cols + boxes)


def verify(instance: SudokuInstance, solution) -> bool:
    """True iff the rounded indicator assignment satisfies all four families and every clue."""
    variables = candidate_variables(instance)
    solution = np.asarray(solution, dtype=float)
    if solution.shape != (len(variables),):
        return False
    per_cell: dict[tuple[int, int], int] = {}
    for (r, c, _d), on in zip(variables, solution > 0.5):
        per_cell[(r, c)] = per_cell.get((r, c), 0) + int(on)
    open_cells = [(r, c) for r in range(instance.n) for c in range(instance.n) if (r, c) not in instance.clues]
    if any(per_cell.get(cell, 0) != 1 for cell in open_cells):
        return False
    return grid_is_solution(instance, decode(instance, solution))


# ---------------------------------------------------------------------------
# file format


def parse(text: str, name: str = "") -> SudokuInstance:
    """Read the puzzle format: side on the first line, then one row per line.

    Open cells are ``0`` or ``.``.  Lines starting with ``#`` are comments;
    ``# key: value`` comments are kept in ``meta`` (e.g. a difficulty label).
    """
    meta = {}
    rows = []
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
    if not rows:
        raise SudokuError("empty puzzle file")
    try:
        N = int(rows[0][0])
    except ValueError:
        raise SudokuError(f"bad size line {rows[0]!r}") from None
    if len(rows[0]) != 1:
        raise SudokuError("size line must hold a single integer")
    grid = rows[1:]
    if len(grid) != N or any(len(row) != N for row in grid):
        raise SudokuError(f"expected {N} rows of {N} tokens")
    clues = {}
    for r, row in enumerate(grid):
        for c, tok in enumerate(row):
            if tok in ("0", "."):
                continue
            try:
                clues[(r, c)] = int(tok)
            except ValueError:
                raise SudokuError(f"bad token {tok!r} at row {r + 1}") from None
    return SudokuInstance(N, clues, name, meta)


def read_puzzle(path) -> SudokuInstance:
    with open(path) as fh:
        return parse(fh.read(), name=os.path.splitext(os.path.basename(path))[0])


def format_grid(grid: Iterable[Iterable[int]]) -> str:
    grid = [list(row) for row in grid]
    width = len(str(len(grid)))
    lines = [str(len(grid))]
    for row in grid:
        lines.append(" ".join((str(v) if v else ".").rjust(width) for v in row))
    return "\n".join(lines) + "\n"

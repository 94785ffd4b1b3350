"""Independent reference solvers used only by the tests."""

from __future__ import annotations

import math


def singles_solve(n, clues):
    """Fill a grid by naked and hidden singles only.

    Returns ``(grid, rounds)`` when singles alone complete the puzzle, else
    ``(None, rounds)``.  ``clues`` maps ``(row, col)`` to a digit.
    """
    b = math.isqrt(n)
    grid = [[0] * n for _ in range(n)]
    for (r, c), d in clues.items():
        grid[r][c] = d
    digits = set(range(1, n + 1))

    def peers_values(r, c):
        br, bc = (r // b) * b, (c // b) * b
        vals = set(grid[r]) | {grid[i][c] for i in range(n)}
        vals |= {grid[br + i][bc + j] for i in range(b) for j in range(b)}
        return vals

    rounds = 0
    while True:
        cands = {
            (r, c): digits - peers_values(r, c)
            for r in range(n) for c in range(n) if not grid[r][c]
        }
        if not cands:
            return grid, rounds
        placed = {}
        for cell, cs in cands.items():
            if len(cs) == 1:
                placed[cell] = next(iter(cs))
        units = [[(r, c) for c in range(n)] for r in range(n)]
        units += [[(r, c) for r in range(n)] for c in range(n)]
        units += [
            [(br * b + i, bc * b + j) for i in range(b) for j in range(b)]
            for br in range(b) for bc in range(b)
        ]
        for unit in units:
            for d in digits:
                spots = [cell for cell in unit if cell in cands and d in cands[cell]]
                if len(spots) == 1:
                    placed.setdefault(spots[0], d)
        if not placed:
            return None, rounds
        rounds += 1
        for (r, c), d in placed.items():
            grid[r][c] = d


def backtrack_solve(n, clues):
    """Plain depth-first search; returns the first completed grid or None."""
    b = math.isqrt(n)
    grid = [[0] * n for _ in range(n)]
    for (r, c), d in clues.items():
        grid[r][c] = d

    def ok(r, c, d):
        if d in grid[r] or any(grid[i][c] == d for i in range(n)):
            return False
        br, bc = (r // b) * b, (c // b) * b
        return all(grid[br + i][bc + j] != d for i in range(b) for j in range(b))

    empties = [(r, c) for r in range(n) for c in range(n) if not grid[r][c]]

    def rec(k):
        if k == len(empties):
            return True
        r, c = empties[k]
        for d in range(1, n + 1):
            if ok(r, c, d):
                grid[r][c] = d
                if rec(k + 1):
                    return True
                grid[r][c] = 0
        return False

    return grid if rec(0) else None

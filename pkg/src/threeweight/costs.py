"""Generic left-node cost functions.

A minimizer is any object with a ``minimize`` method taking padded batches:

    minimize(n, w, mask, nodes, ties, rho0) -> (x, w_out)

``n`` and ``w`` are (k, d) arrays of incoming messages and weight codes for
k nodes, ``mask`` flags the real (non-padding) slots, ``nodes`` holds the
global left-node ids (for tie-break streams) and ``rho0`` is the standard
weight.  It returns the proximal beliefs and outgoing weight codes with the
same shape.  Padding slots are ignored by the caller.
"""

from __future__ import annotations

import numpy as np

from .graph import INFINITE, STANDARD


class UnboundedCost(ArithmeticError):
    """The proximal subproblem has no minimizer."""


class ZeroCost:
    """f = 0: the proximal step returns the incoming messages unchanged."""

    name = "zero"

    def minimize(self, n, w, mask, nodes, ties, rho0):
        return n.copy(), np.full(n.shape, STANDARD, dtype=np.int8)


class QuadraticCost:
    """Convex quadratic ``0.5 x'Qx - b'x`` over the node's variables.

    Always emits standard weights.  Incoming infinite weights pin their
    coordinates to the message value; zero weights drop the proximal term,
    which needs the remaining block of ``Q`` to be positive definite.
    """

    name = "quadratic"

    def __init__(self, Q, b):
        self.Q = np.atleast_2d(np.asarray(Q, dtype=float))
        self.b = np.atleast_1d(np.asarray(b, dtype=float))
        if self.Q.shape != (len(self.b), len(self.b)):
            raise ValueError("Q must be square and match b")
        if not np.allclose(self.Q, self.Q.T):
            raise ValueError("Q must be symmetric")

    def prox(self, n, w, rho0):
        d = len(self.b)
        n = np.asarray(n, dtype=float)[:d]
        w = np.asarray(w)[:d]
        rho = np.where(w == STANDARD, rho0, 0.0)
        fixed = w == INFINITE
        free = ~fixed
        x = n.copy()
        if free.any():
            A = self.Q[np.ix_(free, free)] + np.diag(rho[free])
            rhs = self.b[free] + rho[free] * n[free] - self.Q[np.ix_(free, fixed)] @ n[fixed]
            try:
                chol = np.linalg.cholesky(A)
            except np.linalg.LinAlgError:
                raise UnboundedCost("proximal subproblem is not strictly convex") from None
            x[free] = np.linalg.solve(chol.T, np.linalg.solve(chol, rhs))
        return x

    def minimize(self, n, w, mask, nodes, ties, rho0):
        x = n.copy()
        d = len(self.b)
        for i in range(n.shape[0]):
            x[i, :d] = self.prox(n[i], w[i], rho0)
        return x, np.full(n.shape, STANDARD, dtype=np.int8)


def quadratic_optimum(costs, variable_count):
    """Closed-form minimizer of a sum of quadratic costs.

    ``costs`` is a sequence of (QuadraticCost, variable ids).
    """
    H = np.zeros((variable_count, variable_count))
    g = np.zeros(variable_count)
    for cost, variables in costs:
        idx = np.asarray(variables)
        H[np.ix_(idx, idx)] += cost.Q
        g[idx] += cost.b
    return np.linalg.solve(H, g)

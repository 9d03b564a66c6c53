"""Dense primal simplex for the maximin mass-covering game.

The hard-distortion PUT reduces to the matrix game

    q* = sup_Q inf_x Q(B(x)),

a linear program over the output simplex.  Instance sizes here are small
(outputs up to a few thousand), so a dense tableau with Bland's rule is
preferred over a sparse solver: it terminates deterministically, and the
optimal dual of the same tableau is the minimax certificate
inf_mu max_y sum_x mu(x) 1(y in B(x)) that bounds q* from above.

The game is solved through the standard positive-value transform: q* > 0
because every ball is nonempty, so

    max 1'v  s.t.  A'v <= 1, v >= 0        (A[x, y] = 1(y in B(x)))

has optimum 1/q*; v/1'v is the optimal mu and the constraint duals u
give Q* = u/1'u.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import AlphaleakError

_PIVOT_EPS = 1e-11


class SimplexSolution(NamedTuple):
    x: np.ndarray
    duals: np.ndarray
    objective: float


class UnboundedProgramError(AlphaleakError):
    pass


def simplex_max(c: np.ndarray, A: np.ndarray, b: np.ndarray) -> SimplexSolution:
    """Maximize c'x subject to Ax <= b, x >= 0, with b >= 0.

    Nonnegative b makes the slack basis feasible, so no phase-1 is needed.
    Entering and leaving variables follow Bland's smallest-index rule,
    which cannot cycle.  Returns the primal solution, the duals of the
    inequality rows, and the objective value.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    m, n = A.shape
    if np.any(b < 0):
        raise ValueError("simplex_max requires b >= 0")

    # Tableau: columns = structural vars, slacks, rhs; last row = reduced costs.
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n : n + m] = np.eye(m)
    T[:m, -1] = b
    T[m, :n] = -c
    basis = np.arange(n, n + m)

    while True:
        reduced = T[m, : n + m]
        candidates = np.flatnonzero(reduced < -_PIVOT_EPS)
        if candidates.size == 0:
            break
        j = int(candidates[0])  # Bland: smallest index enters
        col = T[:m, j]
        rows = np.flatnonzero(col > _PIVOT_EPS)
        if rows.size == 0:
            raise UnboundedProgramError("objective unbounded above")
        ratios = T[rows, -1] / col[rows]
        best = ratios.min()
        ties = rows[ratios <= best + _PIVOT_EPS * (1.0 + abs(best))]
        i = int(ties[np.argmin(basis[ties])])  # Bland: smallest basic index leaves
        # Pivot on (i, j).
        T[i] /= T[i, j]
        for r in range(m + 1):
            if r != i and T[r, j] != 0.0:
                T[r] -= T[r, j] * T[i]
        basis[i] = j

    x = np.zeros(n + m)
    x[basis] = T[:m, -1]
    duals = T[m, n : n + m].copy()
    return SimplexSolution(x[:n], duals, float(T[m, -1]))


class GameSolution(NamedTuple):
    value: float  # q* = sup_Q inf_x Q(B(x))
    q: np.ndarray  # optimal output distribution Q*
    mu: np.ndarray  # optimal input distribution (minimax certificate)
    gap: float  # max_y (mu A)_y - min_x (A q)_x, >= 0, ~0 at optimality


def covering_game(ball_matrix: np.ndarray) -> GameSolution:
    """Solve q* = sup_Q inf_x sum_y ball_matrix[x, y] Q(y) for a 0/1
    matrix whose every row has at least one 1."""
    A = np.asarray(ball_matrix, dtype=float)
    sol = simplex_max(np.ones(A.shape[0]), A.T, np.ones(A.shape[1]))
    total = sol.objective
    mu = sol.x / sol.x.sum()
    q = sol.duals / sol.duals.sum()
    value = 1.0 / total
    primal_value = float((A @ q).min())
    dual_value = float((mu @ A).max())
    return GameSolution(primal_value, q, mu, dual_value - primal_value)

"""One-shot matrix-game solvers.

Zero-sum values/strategies via linear programming (with a pure-saddle fast
path that preserves exact arithmetic), and utilitarian correlated equilibria
via LP over joint distributions.  These are the stage-game kernels used by
the stochastic-game solvers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import linprog

from folkegal.games import GameError

__all__ = [
    "MatrixGame",
    "BimatrixGame",
    "MatrixSolution",
    "solve_zero_sum",
    "zero_sum_value",
    "solve_ce_utilitarian",
]


@dataclass(frozen=True)
class MatrixGame:
    """A zero-sum matrix game; ``payoff[i, j]`` is the row player's utility."""

    payoff: np.ndarray

    def __post_init__(self):
        p = np.ascontiguousarray(np.asarray(self.payoff, dtype=float))
        if p.ndim != 2 or p.size == 0:
            raise GameError("payoff must be a nonempty 2-D array")
        if not np.isfinite(p).all():
            raise GameError("payoff entries must be finite")
        p.setflags(write=False)
        object.__setattr__(self, "payoff", p)

    @property
    def shape(self) -> tuple[int, int]:
        return self.payoff.shape


@dataclass(frozen=True)
class BimatrixGame:
    """A general-sum two-player matrix game."""

    payoff1: np.ndarray
    payoff2: np.ndarray

    def __post_init__(self):
        p1 = np.ascontiguousarray(np.asarray(self.payoff1, dtype=float))
        p2 = np.ascontiguousarray(np.asarray(self.payoff2, dtype=float))
        if p1.ndim != 2 or p1.size == 0 or p1.shape != p2.shape:
            raise GameError("payoff tables must be nonempty 2-D arrays of equal shape")
        if not (np.isfinite(p1).all() and np.isfinite(p2).all()):
            raise GameError("payoff entries must be finite")
        p1.setflags(write=False)
        p2.setflags(write=False)
        object.__setattr__(self, "payoff1", p1)
        object.__setattr__(self, "payoff2", p2)

    @property
    def shape(self) -> tuple[int, int]:
        return self.payoff1.shape


class MatrixSolution(NamedTuple):
    value: float
    row_mix: np.ndarray
    col_mix: np.ndarray


def zero_sum_value(payoff: np.ndarray) -> float:
    """Value of a zero-sum matrix game (row maximizes), without strategies.

    Fast path for the common case where only the number is needed: a pure
    saddle point is detected by exact comparisons (no arithmetic on the
    entries, so e.g. an all-zero block keeps the exact value 0.0); otherwise
    the LP runs.
    """
    M = np.asarray(payoff, dtype=float)
    row_min = M.min(axis=1)
    maximin = row_min.max()
    col_max = M.max(axis=0)
    minimax = col_max.min()
    if maximin >= minimax:  # pure saddle (maximin <= minimax always holds)
        return float(maximin)
    return solve_zero_sum(MatrixGame(M)).value


def solve_zero_sum(g: MatrixGame) -> MatrixSolution:
    """Compute the minimax value and optimal mixed strategies.

    The row player maximizes ``payoff``; the column player minimizes.  The
    returned strategies are maximin/minimax optimal within 1e-9.
    """
    M = g.payoff
    m, n = M.shape

    # Pure saddle fast path: exact value, lexicographically first optimal
    # pure strategies, no floating-point residue from the LP.
    row_min = M.min(axis=1)
    maximin = row_min.max()
    col_max = M.max(axis=0)
    minimax = col_max.min()
    if maximin >= minimax:
        i = int(np.argmax(row_min))
        j = int(np.argmin(col_max))
        row = np.zeros(m)
        col = np.zeros(n)
        row[i] = 1.0
        col[j] = 1.0
        return MatrixSolution(float(maximin), row, col)

    # Row LP: maximize v subject to M^T x >= v, sum x = 1, x >= 0.
    c = np.zeros(m + 1)
    c[-1] = -1.0
    A_ub = np.hstack([-M.T, np.ones((n, 1))])
    b_ub = np.zeros(n)
    A_eq = np.zeros((1, m + 1))
    A_eq[0, :m] = 1.0
    b_eq = np.ones(1)
    bounds = [(0.0, None)] * m + [(None, None)]
    res_row = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs")
    if not res_row.success:  # pragma: no cover - LP on a bounded polytope
        raise GameError(f"zero-sum LP failed: {res_row.message}")
    row = np.clip(res_row.x[:m], 0.0, None)
    row /= row.sum()
    value = float(res_row.x[-1])

    # Column LP: minimize u subject to M y <= u, sum y = 1, y >= 0.
    c2 = np.zeros(n + 1)
    c2[-1] = 1.0
    A_ub2 = np.hstack([M, -np.ones((m, 1))])
    b_ub2 = np.zeros(m)
    A_eq2 = np.zeros((1, n + 1))
    A_eq2[0, :n] = 1.0
    res_col = linprog(c2, A_ub=A_ub2, b_ub=b_ub2, A_eq=A_eq2, b_eq=b_eq,
                      bounds=[(0.0, None)] * n + [(None, None)], method="highs")
    if not res_col.success:  # pragma: no cover
        raise GameError(f"zero-sum dual LP failed: {res_col.message}")
    col = np.clip(res_col.x[:n], 0.0, None)
    col /= col.sum()

    return MatrixSolution(value, row, col)


def solve_ce_utilitarian(g: BimatrixGame) -> np.ndarray:
    """Utilitarian correlated equilibrium of a bimatrix game.

    Returns a joint distribution over action pairs maximizing the payoff sum
    subject to the correlated-equilibrium rationality constraints (no player
    gains by deviating from a recommended action), within 1e-9 slack.
    """
    A1, A2 = g.payoff1, g.payoff2
    m, n = g.shape

    # Fast path: if some sum-maximizing pure joint action is also a pure Nash
    # equilibrium, the point mass on it is a utilitarian CE (nothing can beat
    # the pointwise maximum of the sum).  Scan in lexicographic order so ties
    # resolve deterministically.
    total = A1 + A2
    best = total.max()
    for i, j in zip(*np.nonzero(total >= best - 1e-12)):
        if A1[i, j] >= A1[:, j].max() - 1e-12 and A2[i, j] >= A2[i, :].max() - 1e-12:
            dist = np.zeros((m, n))
            dist[i, j] = 1.0
            return dist

    # LP over joint distributions p[i, j].
    nv = m * n
    c = -(total).ravel()  # maximize the sum

    rows_ub = []
    # Player 1: for each recommended i and deviation i', the conditional gain
    # sum_j p[i, j] (A1[i', j] - A1[i, j]) must be <= 0.
    for i in range(m):
        for i2 in range(m):
            if i2 == i:
                continue
            row = np.zeros((m, n))
            row[i, :] = A1[i2, :] - A1[i, :]
            rows_ub.append(row.ravel())
    # Player 2 symmetric.
    for j in range(n):
        for j2 in range(n):
            if j2 == j:
                continue
            row = np.zeros((m, n))
            row[:, j] = A2[:, j2] - A2[:, j]
            rows_ub.append(row.ravel())

    A_ub = np.array(rows_ub) if rows_ub else None
    b_ub = np.zeros(len(rows_ub)) if rows_ub else None
    A_eq = np.ones((1, nv))
    b_eq = np.ones(1)
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
                  bounds=[(0.0, None)] * nv, method="highs")
    if not res.success:  # pragma: no cover - uniform play is always feasible? no:
        # the CE polytope is nonempty (a Nash equilibrium exists), but guard anyway
        raise GameError(f"correlated-equilibrium LP failed: {res.message}")
    dist = np.clip(res.x.reshape(m, n), 0.0, None)
    dist /= dist.sum()
    return dist

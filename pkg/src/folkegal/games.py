"""Core data structures for two-player discounted stochastic games.

A :class:`StochasticGame` couples two reward tables with a shared sparse
transition kernel over joint actions.  This module also provides the policy
representations used throughout the package, exact vector-valued policy
evaluation, payoff-space geometry (egalitarian values, line-side tests,
convex mixes), and JSON (de)serialization.

Conventions
-----------
* States are integers ``0 .. n_states-1``; joint actions are pairs
  ``(a1, a2)`` with the flat index ``(s * A1 + a1) * A2 + a2``.
* ``gamma`` is both the per-step discount and the continuation probability
  of the stage game; it must be strictly below 1.
* Terminal states are absorbing and reward-free for both players.
"""

from __future__ import annotations

import enum
import json
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp

__all__ = [
    "GameError",
    "IncompletePolicyError",
    "Side",
    "PayoffPoint",
    "AdvantagePoint",
    "StochasticGame",
    "JointPolicy",
    "MixedPolicy",
    "evaluate_joint",
    "evaluate_mixed_pair",
    "evaluate_correlated",
    "egal_value",
    "line_side",
    "mix_points",
    "game_to_dict",
    "game_from_dict",
    "game_to_json",
    "game_from_json",
]

#: Largest reduced system handled by a direct dense solve during policy
#: evaluation; larger systems fall back to iterative evaluation.
DENSE_EVAL_LIMIT = 2000

_DIST_TOL = 1e-12


class GameError(ValueError):
    """Raised for malformed games, policies, or geometry arguments."""


class IncompletePolicyError(GameError):
    """A state reachable under the evaluated policy has no prescription."""


class Side(enum.Enum):
    """Location of a payoff point relative to the egalitarian line."""

    LEFT = "left"
    RIGHT = "right"
    ON = "on"


@dataclass(frozen=True)
class PayoffPoint:
    """A pair of expected discounted returns, one per player."""

    p1: float
    p2: float

    def as_array(self) -> np.ndarray:
        return np.array([self.p1, self.p2], dtype=float)

    def advantage_over(self, v: "PayoffPoint") -> "AdvantagePoint":
        return AdvantagePoint(self.p1 - v.p1, self.p2 - v.p2)

    def __iter__(self):
        yield self.p1
        yield self.p2


@dataclass(frozen=True)
class AdvantagePoint:
    """A payoff pair translated by the disagreement point: ``a_i = p_i - v_i``."""

    a1: float
    a2: float

    def minimum(self) -> float:
        return min(self.a1, self.a2)


def _as_csr(transitions, n_rows: int, n_states: int) -> sp.csr_matrix:
    if sp.issparse(transitions):
        mat = transitions.tocsr().astype(float)
    else:
        arr = np.asarray(transitions, dtype=float)
        if arr.ndim == 4:  # (S, A1, A2, S)
            arr = arr.reshape(n_rows, n_states)
        mat = sp.csr_matrix(arr)
    if mat.shape != (n_rows, n_states):
        raise GameError(
            f"transition matrix has shape {mat.shape}, expected {(n_rows, n_states)}"
        )
    return mat


@dataclass(frozen=True)
class StochasticGame:
    """A finite two-player discounted stochastic game.

    Attributes
    ----------
    rewards1, rewards2:
        Arrays of shape ``(S, A1, A2)`` holding each player's per-step
        utility for every state and joint action.
    transitions:
        Sparse CSR matrix of shape ``(S*A1*A2, S)``; row ``flat_index(s,a1,a2)``
        is the successor distribution for that state/joint action.
    terminal:
        Boolean mask of absorbing, reward-free states.
    u_max:
        Bound on per-step reward magnitude.  Computed from the tables unless
        supplied (a caller may pass a looser problem-level bound).
    """

    n_states: int
    n_actions1: int
    n_actions2: int
    rewards1: np.ndarray
    rewards2: np.ndarray
    transitions: sp.csr_matrix
    gamma: float
    start: int
    terminal: np.ndarray
    u_max: float = 0.0
    state_names: tuple[str, ...] | None = None
    action_names1: tuple[str, ...] | None = None
    action_names2: tuple[str, ...] | None = None

    def __post_init__(self):
        S, A1, A2 = self.n_states, self.n_actions1, self.n_actions2
        if S < 1 or A1 < 1 or A2 < 1:
            raise GameError("need at least one state and one action per player")
        if not (0.0 <= self.gamma < 1.0):
            raise GameError(f"gamma must lie in [0, 1), got {self.gamma}")
        if not (0 <= self.start < S):
            raise GameError(f"start state {self.start} out of range")

        r1 = np.ascontiguousarray(np.asarray(self.rewards1, dtype=float))
        r2 = np.ascontiguousarray(np.asarray(self.rewards2, dtype=float))
        if r1.shape != (S, A1, A2) or r2.shape != (S, A1, A2):
            raise GameError(
                f"reward tables must have shape {(S, A1, A2)}, "
                f"got {r1.shape} and {r2.shape}"
            )
        if not (np.isfinite(r1).all() and np.isfinite(r2).all()):
            raise GameError("reward tables must be finite")

        term = np.asarray(self.terminal, dtype=bool)
        if term.shape != (S,):
            raise GameError(f"terminal mask must have shape ({S},)")

        trans = _as_csr(self.transitions, S * A1 * A2, S)
        if trans.nnz and trans.data.min() < -_DIST_TOL:
            raise GameError("transition probabilities must be nonnegative")
        row_sums = np.asarray(trans.sum(axis=1)).ravel()
        bad = np.nonzero(np.abs(row_sums - 1.0) > 1e-12)[0]
        if bad.size:
            s, rem = divmod(int(bad[0]), A1 * A2)
            a1, a2 = divmod(rem, A2)
            raise GameError(
                f"transition distribution at state {s}, joint action ({a1}, {a2}) "
                f"sums to {row_sums[bad[0]]!r}, expected 1"
            )

        # Terminal states must be absorbing and reward-free.
        for s in np.nonzero(term)[0]:
            lo = s * A1 * A2
            block = trans[lo : lo + A1 * A2, :]
            diag = block[:, s].toarray().ravel()
            if not np.all(diag == 1.0):
                raise GameError(f"terminal state {s} is not absorbing")
            if np.any(r1[s] != 0.0) or np.any(r2[s] != 0.0):
                raise GameError(f"terminal state {s} has nonzero reward")

        u = float(max(np.abs(r1).max(), np.abs(r2).max()))
        u_max = float(self.u_max) if self.u_max else u
        if u_max + 1e-12 < u:
            raise GameError(f"u_max={u_max} smaller than largest reward magnitude {u}")

        for name, n in (("state_names", S), ("action_names1", A1), ("action_names2", A2)):
            val = getattr(self, name)
            if val is not None and len(val) != n:
                raise GameError(f"{name} must have length {n}")

        r1.setflags(write=False)
        r2.setflags(write=False)
        term.setflags(write=False)
        object.__setattr__(self, "rewards1", r1)
        object.__setattr__(self, "rewards2", r2)
        object.__setattr__(self, "terminal", term)
        object.__setattr__(self, "transitions", trans)
        object.__setattr__(self, "u_max", u_max)

    # ------------------------------------------------------------------
    @property
    def n_joint(self) -> int:
        return self.n_actions1 * self.n_actions2

    def flat_index(self, s: int, a1: int, a2: int) -> int:
        return (s * self.n_actions1 + a1) * self.n_actions2 + a2

    def expected_next_values(self, values: np.ndarray) -> np.ndarray:
        """Return ``T @ values`` as a flat ``(S*A1*A2,)`` array."""
        return self.transitions @ np.asarray(values, dtype=float)

    def q_tables(self, values1: np.ndarray, values2: np.ndarray):
        """One-step lookahead tables ``r + gamma * T v`` for both players."""
        shape = (self.n_states, self.n_actions1, self.n_actions2)
        q1 = self.rewards1 + self.gamma * self.expected_next_values(values1).reshape(shape)
        q2 = self.rewards2 + self.gamma * self.expected_next_values(values2).reshape(shape)
        return q1, q2

    def payoff_bound(self) -> float:
        """Upper bound on any return magnitude: ``u_max / (1 - gamma)``."""
        return self.u_max / (1.0 - self.gamma)


# ----------------------------------------------------------------------
# Policies
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class JointPolicy:
    """A deterministic joint stationary policy (one joint action per state).

    Entries of ``-1`` mark states with no prescription; evaluation fails if
    such a state is reachable.
    """

    actions1: np.ndarray
    actions2: np.ndarray

    def __post_init__(self):
        a1 = np.asarray(self.actions1, dtype=np.int64)
        a2 = np.asarray(self.actions2, dtype=np.int64)
        if a1.shape != a2.shape or a1.ndim != 1:
            raise GameError("joint policy arrays must be 1-D and congruent")
        a1.setflags(write=False)
        a2.setflags(write=False)
        object.__setattr__(self, "actions1", a1)
        object.__setattr__(self, "actions2", a2)

    @classmethod
    def from_mapping(cls, n_states: int, choice: Mapping[int, tuple[int, int]]) -> "JointPolicy":
        a1 = np.full(n_states, -1, dtype=np.int64)
        a2 = np.full(n_states, -1, dtype=np.int64)
        for s, (x, y) in choice.items():
            a1[s], a2[s] = x, y
        return cls(a1, a2)

    def defined(self, s: int) -> bool:
        return self.actions1[s] >= 0 and self.actions2[s] >= 0

    def joint_dists(self, game: StochasticGame) -> np.ndarray:
        """One-hot per-state joint distributions, zero rows where undefined."""
        if len(self.actions1) != game.n_states:
            raise GameError("policy size does not match game")
        dists = np.zeros((game.n_states, game.n_actions1, game.n_actions2))
        for s in range(game.n_states):
            if self.defined(s):
                dists[s, self.actions1[s], self.actions2[s]] = 1.0
        return dists


@dataclass(frozen=True)
class MixedPolicy:
    """A per-player stationary mixed policy.

    ``probs`` has shape ``(S, A_player)``.  Rows must sum to 1; an all-zero
    row marks a state with no prescription (an error if reached during
    evaluation).
    """

    player: int
    probs: np.ndarray

    def __post_init__(self):
        if self.player not in (1, 2):
            raise GameError("player must be 1 or 2")
        p = np.ascontiguousarray(np.asarray(self.probs, dtype=float))
        if p.ndim != 2:
            raise GameError("mixed policy must be a 2-D array")
        if p.min(initial=0.0) < -_DIST_TOL:
            raise GameError("mixed policy has negative probabilities")
        sums = p.sum(axis=1)
        ok = (np.abs(sums - 1.0) <= 1e-12) | (sums == 0.0)
        if not ok.all():
            s = int(np.nonzero(~ok)[0][0])
            raise GameError(f"mixed policy row {s} sums to {sums[s]!r}")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @classmethod
    def pure(cls, player: int, actions: Sequence[int], n_actions: int) -> "MixedPolicy":
        acts = np.asarray(actions, dtype=np.int64)
        probs = np.zeros((len(acts), n_actions))
        for s, a in enumerate(acts):
            if a >= 0:
                probs[s, a] = 1.0
        return cls(player, probs)

    @classmethod
    def uniform(cls, player: int, n_states: int, n_actions: int) -> "MixedPolicy":
        return cls(player, np.full((n_states, n_actions), 1.0 / n_actions))

    def defined(self, s: int) -> bool:
        return bool(self.probs[s].sum() > 0.0)


# ----------------------------------------------------------------------
# Exact policy evaluation
# ----------------------------------------------------------------------


def _reachable_support(game: StochasticGame, dists: np.ndarray) -> list[int]:
    """Non-terminal states reachable from the start under ``dists``.

    Returns states in BFS discovery order.  Raises
    :class:`IncompletePolicyError` when a reached non-terminal state carries
    no probability mass.
    """
    seen = {game.start}
    order: list[int] = []
    queue = deque([game.start])
    A2 = game.n_actions2
    while queue:
        s = queue.popleft()
        if game.terminal[s]:
            continue
        row = dists[s]
        total = row.sum()
        if abs(total - 1.0) > 1e-9:
            raise IncompletePolicyError(
                f"incomplete policy: reachable state {s} has total action "
                f"probability {total!r}"
            )
        order.append(s)
        for a1, a2 in zip(*np.nonzero(row > 0.0)):
            flat = game.flat_index(s, int(a1), int(a2))
            lo, hi = game.transitions.indptr[flat], game.transitions.indptr[flat + 1]
            for nxt in game.transitions.indices[lo:hi]:
                nxt = int(nxt)
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
    return order


def _evaluate_dists(game: StochasticGame, dists: np.ndarray, tol: float) -> PayoffPoint:
    """Expected discounted returns from the start state under per-state joint
    action distributions ``dists`` of shape ``(S, A1, A2)``."""
    if tol <= 0:
        raise GameError("tol must be positive")
    if dists.shape != (game.n_states, game.n_actions1, game.n_actions2):
        raise GameError("joint distribution array has wrong shape")
    if game.terminal[game.start]:
        return PayoffPoint(0.0, 0.0)

    order = _reachable_support(game, dists)
    n = len(order)
    pos = {s: i for i, s in enumerate(order)}

    # Mixing matrix W (n, S*A1*A2): row i holds state order[i]'s joint-action
    # weights at the matching flat indices.  Expected rewards and transitions
    # under the policy are then single sparse products.
    rows, cols, vals = [], [], []
    for i, s in enumerate(order):
        nz1, nz2 = np.nonzero(dists[s] > 0.0)
        for a1, a2 in zip(nz1, nz2):
            rows.append(i)
            cols.append(game.flat_index(s, int(a1), int(a2)))
            vals.append(dists[s, a1, a2])
    W = sp.csr_matrix(
        (vals, (rows, cols)), shape=(n, game.n_states * game.n_joint)
    )
    r = np.column_stack([W @ game.rewards1.ravel(), W @ game.rewards2.ravel()])
    P_full = (W @ game.transitions).tocsc()

    # Columns outside the reached non-terminal set contribute no future value
    # (terminal states are worthless; unreached states are unreachable).
    P = P_full[:, order].toarray() if n <= DENSE_EVAL_LIMIT else P_full[:, order].tocsr()

    if n <= DENSE_EVAL_LIMIT:
        A = np.eye(n) - game.gamma * P
        V = np.linalg.solve(A, r)
    else:
        V = np.zeros((n, 2))
        target = tol * (1.0 - game.gamma)
        for _ in range(10_000_000):
            V_new = r + game.gamma * (P @ V)
            if np.abs(V_new - V).max() <= target:
                V = V_new
                break
            V = V_new
        else:  # pragma: no cover - defensive
            raise GameError("policy evaluation failed to converge")

    i0 = pos[game.start]
    return PayoffPoint(float(V[i0, 0]), float(V[i0, 1]))


def evaluate_joint(game: StochasticGame, pi: JointPolicy, tol: float = 1e-9) -> PayoffPoint:
    """Both players' expected discounted returns from the start under joint
    execution of the deterministic policy ``pi``.

    Unreachable states may be left unspecified; a reachable non-terminal
    state without a prescription raises :class:`IncompletePolicyError`.
    """
    return _evaluate_dists(game, pi.joint_dists(game), tol)


def evaluate_mixed_pair(
    game: StochasticGame, m1: MixedPolicy, m2: MixedPolicy, tol: float = 1e-9
) -> PayoffPoint:
    """Returns from the start when the players independently randomize
    according to ``m1`` and ``m2`` at every state."""
    if m1.player != 1 or m2.player != 2:
        raise GameError("evaluate_mixed_pair expects (player-1, player-2) policies")
    if m1.probs.shape != (game.n_states, game.n_actions1):
        raise GameError("player-1 policy shape does not match game")
    if m2.probs.shape != (game.n_states, game.n_actions2):
        raise GameError("player-2 policy shape does not match game")
    dists = np.einsum("si,sj->sij", m1.probs, m2.probs)
    return _evaluate_dists(game, dists, tol)


def evaluate_correlated(
    game: StochasticGame, dists: np.ndarray, tol: float = 1e-9
) -> PayoffPoint:
    """Returns from the start under per-state correlated joint-action
    distributions (shape ``(S, A1, A2)``, rows summing to 1)."""
    return _evaluate_dists(game, np.asarray(dists, dtype=float), tol)


# ----------------------------------------------------------------------
# Payoff-space geometry
# ----------------------------------------------------------------------


def egal_value(x: PayoffPoint, v: PayoffPoint) -> float:
    """The egalitarian value of ``x`` relative to the disagreement point:
    ``min(x1 - v1, x2 - v2)``."""
    return min(x.p1 - v.p1, x.p2 - v.p2)


def line_side(x: PayoffPoint, v: PayoffPoint, tol: float = 1e-9) -> Side:
    """Which side of the egalitarian line (equal advantages) ``x`` lies on.

    ``Right`` means player 1's advantage exceeds player 2's by more than
    ``tol``; ``Left`` the reverse; ``On`` within tolerance.
    """
    if tol < 0:
        raise GameError("tol must be nonnegative")
    d = (x.p1 - v.p1) - (x.p2 - v.p2)
    if abs(d) <= tol:
        return Side.ON
    return Side.RIGHT if d > 0 else Side.LEFT


def mix_points(L: PayoffPoint, R: PayoffPoint, lam: float) -> PayoffPoint:
    """Convex combination ``lam * L + (1 - lam) * R``."""
    if not (0.0 <= lam <= 1.0):
        raise GameError(f"mixing weight must lie in [0, 1], got {lam}")
    return PayoffPoint(
        lam * L.p1 + (1.0 - lam) * R.p1,
        lam * L.p2 + (1.0 - lam) * R.p2,
    )


# ----------------------------------------------------------------------
# Serialization
# ----------------------------------------------------------------------

GAME_SCHEMA_VERSION = "folkegal-game/1"


def game_to_dict(game: StochasticGame) -> dict:
    """JSON-ready document with explicit state/action lists and sparse
    reward/transition entries."""
    S, A1, A2 = game.n_states, game.n_actions1, game.n_actions2
    states = list(game.state_names) if game.state_names else [f"s{i}" for i in range(S)]
    acts1 = list(game.action_names1) if game.action_names1 else [f"a{i}" for i in range(A1)]
    acts2 = list(game.action_names2) if game.action_names2 else [f"b{i}" for i in range(A2)]

    rewards = []
    nz = np.nonzero((game.rewards1 != 0.0) | (game.rewards2 != 0.0))
    for s, a1, a2 in zip(*nz):
        rewards.append(
            [int(s), int(a1), int(a2), float(game.rewards1[s, a1, a2]), float(game.rewards2[s, a1, a2])]
        )

    transitions = []
    coo = game.transitions.tocoo()
    for flat, nxt, p in zip(coo.row, coo.col, coo.data):
        s, rem = divmod(int(flat), A1 * A2)
        a1, a2 = divmod(rem, A2)
        transitions.append([s, a1, a2, int(nxt), float(p)])

    return {
        "schema": GAME_SCHEMA_VERSION,
        "states": states,
        "actions1": acts1,
        "actions2": acts2,
        "gamma": game.gamma,
        "start": int(game.start),
        "terminal": [int(s) for s in np.nonzero(game.terminal)[0]],
        "u_max": game.u_max,
        "rewards": rewards,
        "transitions": transitions,
    }


def game_from_dict(doc: Mapping) -> StochasticGame:
    """Inverse of :func:`game_to_dict`."""
    if doc.get("schema") != GAME_SCHEMA_VERSION:
        raise GameError(f"unsupported game schema: {doc.get('schema')!r}")
    states = list(doc["states"])
    acts1, acts2 = list(doc["actions1"]), list(doc["actions2"])
    S, A1, A2 = len(states), len(acts1), len(acts2)

    r1 = np.zeros((S, A1, A2))
    r2 = np.zeros((S, A1, A2))
    for s, a1, a2, x, y in doc["rewards"]:
        r1[s, a1, a2] = x
        r2[s, a1, a2] = y

    rows, cols, vals = [], [], []
    for s, a1, a2, nxt, p in doc["transitions"]:
        rows.append((s * A1 + a1) * A2 + a2)
        cols.append(nxt)
        vals.append(p)
    trans = sp.csr_matrix((vals, (rows, cols)), shape=(S * A1 * A2, S))

    terminal = np.zeros(S, dtype=bool)
    terminal[list(doc["terminal"])] = True

    return StochasticGame(
        n_states=S,
        n_actions1=A1,
        n_actions2=A2,
        rewards1=r1,
        rewards2=r2,
        transitions=trans,
        gamma=float(doc["gamma"]),
        start=int(doc["start"]),
        terminal=terminal,
        u_max=float(doc.get("u_max", 0.0)),
        state_names=tuple(states),
        action_names1=tuple(acts1),
        action_names2=tuple(acts2),
    )


def game_to_json(game: StochasticGame, **kwargs) -> str:
    return json.dumps(game_to_dict(game), **kwargs)


def game_from_json(text: str) -> StochasticGame:
    return game_from_dict(json.loads(text))

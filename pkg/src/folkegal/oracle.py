"""Brute-force ground truth for small games.

Enumerates every deterministic stationary joint policy, evaluates each
exactly, and keeps the convex hull of the payoff points — the feasible set
a small game's planners search implicitly.  The egalitarian point is then
read straight off the hull: the best minimum-advantage point over a convex
polygon always lies on its boundary (pushing toward (+1, +1) improves both
advantage coordinates), so scanning vertices and equal-advantage line
crossings is exhaustive.

Enumeration walks reachable closures rather than full action tables: a
policy only needs prescriptions on states it can actually reach, and the
number of distinct closures is usually astronomically smaller than
``n_joint ** n_states``.  The walk aborts once ``cap`` closures have been
produced, since a game that large needs property-based checks instead of
brute force.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .games import (
    GameError,
    JointPolicy,
    PayoffPoint,
    StochasticGame,
    egal_value,
    evaluate_joint,
)
from .solvers import shapley_solve

__all__ = [
    "OracleCapError",
    "PayoffHull",
    "OracleResult",
    "enumerate_policies",
    "build_hull",
    "hull_egal_point",
    "oracle_solve",
]

DEFAULT_CAP = 1_000_000
_PRUNE_EVERY = 50_000


class OracleCapError(GameError):
    """The game has too many reachable policy closures to enumerate."""


@dataclass(frozen=True)
class PayoffHull:
    """Convex hull of the payoffs of all deterministic joint policies.

    ``vertices`` are in convex position, ordered counterclockwise;
    ``generators[i]`` is a policy whose exact evaluation is ``vertices[i]``.
    ``n_policies`` counts every enumerated closure, hull or not.
    """

    vertices: tuple[PayoffPoint, ...]
    generators: tuple[JointPolicy, ...]
    n_policies: int

    def __post_init__(self) -> None:
        if len(self.vertices) != len(self.generators):
            raise GameError("hull vertices and generators must align")


@dataclass(frozen=True)
class OracleResult:
    hull: PayoffHull
    disagreement: PayoffPoint
    egal_point: PayoffPoint
    egal_value: float


def _successors(game: StochasticGame, s: int, a1: int, a2: int) -> Iterator[int]:
    flat = game.flat_index(s, a1, a2)
    lo, hi = game.transitions.indptr[flat], game.transitions.indptr[flat + 1]
    for nxt in game.transitions.indices[lo:hi]:
        yield int(nxt)


def enumerate_policies(
    game: StochasticGame, cap: int = DEFAULT_CAP
) -> Iterator[JointPolicy]:
    """All deterministic joint policies, one per reachable closure.

    Yields policies defined exactly on the non-terminal states reachable
    from the start under their own choices (and ``-1`` elsewhere).  Raises
    :class:`OracleCapError` after ``cap`` yields.
    """
    if cap <= 0:
        raise GameError("cap must be positive")
    if game.terminal[game.start]:
        yield JointPolicy.from_mapping(game.n_states, {})
        return

    produced = 0
    joint = [
        (a1, a2) for a1 in range(game.n_actions1) for a2 in range(game.n_actions2)
    ]
    # Depth-first over pending states: assign the next undecided reachable
    # state, push newly reachable ones, backtrack through joint actions.
    assignment: dict[int, tuple[int, int]] = {}

    def walk(pending: tuple[int, ...]) -> Iterator[JointPolicy]:
        nonlocal produced
        while pending and (
            game.terminal[pending[0]] or pending[0] in assignment
        ):
            pending = pending[1:]
        if not pending:
            produced += 1
            if produced > cap:
                raise OracleCapError(
                    f"more than {cap} policy closures; use property-based "
                    "checks instead of brute-force enumeration"
                )
            yield JointPolicy.from_mapping(game.n_states, assignment)
            return
        s = pending[0]
        rest = pending[1:]
        for a1, a2 in joint:
            assignment[s] = (a1, a2)
            grown = rest + tuple(
                t for t in _successors(game, s, a1, a2) if t not in assignment
            )
            yield from walk(grown)
        del assignment[s]

    yield from walk((game.start,))


def _hull_indices(points: np.ndarray) -> list[int]:
    """Monotone-chain convex hull of an (N, 2) array; indices, CCW, strict."""
    order = np.lexsort((points[:, 1], points[:, 0]))
    chain: list[int] = []

    def cross(o: int, a: int, b: int) -> float:
        return (points[a, 0] - points[o, 0]) * (points[b, 1] - points[o, 1]) - (
            points[a, 1] - points[o, 1]
        ) * (points[b, 0] - points[o, 0])

    def extend(sequence) -> list[int]:
        out: list[int] = []
        for i in sequence:
            i = int(i)
            if out and points[out[-1], 0] == points[i, 0] and points[
                out[-1], 1
            ] == points[i, 1]:
                continue
            while len(out) >= 2 and cross(out[-2], out[-1], i) <= 0.0:
                out.pop()
            out.append(i)
        return out

    lower = extend(order)
    upper = extend(order[::-1])
    chain = lower[:-1] + upper[:-1]
    return chain if chain else [int(order[0])]


def build_hull(
    game: StochasticGame, cap: int = DEFAULT_CAP, tol: float = 1e-9
) -> PayoffHull:
    """Evaluate every enumerated policy and keep the hull of the payoffs.

    Candidates are re-pruned to the running hull every 50k policies so
    memory stays proportional to the hull, not the enumeration.
    """
    pts: list[tuple[float, float]] = []
    pols: list[JointPolicy] = []
    count = 0

    def prune() -> None:
        nonlocal pts, pols
        keep = _hull_indices(np.asarray(pts))
        pts = [pts[i] for i in keep]
        pols = [pols[i] for i in keep]

    for pi in enumerate_policies(game, cap):
        p = evaluate_joint(game, pi, tol)
        pts.append((p.p1, p.p2))
        pols.append(pi)
        count += 1
        if len(pts) >= _PRUNE_EVERY:
            prune()
    prune()
    vertices = tuple(PayoffPoint(x, y) for x, y in pts)
    return PayoffHull(vertices=vertices, generators=tuple(pols), n_policies=count)


def hull_egal_point(hull: PayoffHull, v: PayoffPoint) -> tuple[PayoffPoint, float]:
    """Best minimum-advantage point of the hull relative to ``v``.

    Checks every vertex and every crossing of a hull edge with the
    equal-advantage line; the optimum of a min of increasing linear
    functions over a polygon is always among these.
    """
    if not hull.vertices:
        raise GameError("empty hull")
    best = hull.vertices[0]
    best_val = egal_value(best, v)
    for p in hull.vertices[1:]:
        val = egal_value(p, v)
        if val > best_val:
            best, best_val = p, val
    n = len(hull.vertices)
    for i in range(n):
        a = hull.vertices[i]
        b = hull.vertices[(i + 1) % n]
        da = (a.p1 - v.p1) - (a.p2 - v.p2)
        db = (b.p1 - v.p1) - (b.p2 - v.p2)
        if da * db < 0.0:
            t = db / (db - da)
            p = PayoffPoint(t * a.p1 + (1.0 - t) * b.p1, t * a.p2 + (1.0 - t) * b.p2)
            val = egal_value(p, v)
            if val > best_val:
                best, best_val = p, val
    return best, best_val


def oracle_solve(
    game: StochasticGame, eps: float, cap: int = DEFAULT_CAP
) -> OracleResult:
    """Brute-force egalitarian solution: enumerated hull + line scan.

    The disagreement point still comes from the adversarial solver (at
    ``eps / 4``) — it is a minimax over mixed policies, which deterministic
    enumeration cannot bound — but the feasible set and the egalitarian
    point over it are exhaustive ground truth.
    """
    if eps <= 0:
        raise GameError("eps must be positive")
    hull = build_hull(game, cap)
    v = PayoffPoint(
        shapley_solve(game, 1, eps / 4.0).value,
        shapley_solve(game, 2, eps / 4.0).value,
    )
    point, value = hull_egal_point(hull, v)
    return OracleResult(hull=hull, disagreement=v, egal_point=point, egal_value=value)

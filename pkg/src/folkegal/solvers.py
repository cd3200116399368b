"""Value-iteration solvers for two-player discounted stochastic games.

* :func:`shapley_solve` — adversarial solve of one player's guaranteed value;
  each sweep backs every state up through the local zero-sum matrix game.
* :func:`solve_mdp_w` — joint-control solve of the ``w``-scalarized MDP,
  returning the greedy deterministic joint policy and its vector payoff.
* :func:`friend_vi` — each player optimizes its own reward over joint actions
  as if the opponent were helping, then the two extracted components are
  executed together (which need not be an equilibrium).
* :func:`security_profile` — both players' defensive policies and the payoff
  of executing them jointly.
* :func:`ce_vi` — correlated-equilibrium value iteration; may fail to
  converge, which is reported rather than raised.

All solvers start from zero-initialized value tables, stop when the sup-norm
residual drops to ``eps * (1 - gamma) / (2 * gamma)`` (a single sweep suffices
when ``gamma == 0``), and break argmax ties lexicographically by joint-action
index so runs are reproducible across platforms.

The greedy policy extracted from an eps-accurate value table can lose more
than eps, so :func:`shapley_solve` and :func:`solve_mdp_w` certify their
output policies (by best-response value iteration and by exact evaluation,
respectively) and geometrically tighten the residual target until the
certificate holds.  Accuracy requests below ~1e-10 may fail to certify
because LP solver tolerances dominate at that scale.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .games import (
    GameError,
    JointPolicy,
    MixedPolicy,
    PayoffPoint,
    StochasticGame,
    evaluate_correlated,
    evaluate_joint,
    evaluate_mixed_pair,
)
from .matrix import BimatrixGame, MatrixGame, solve_ce_utilitarian, solve_zero_sum

__all__ = [
    "ZeroSumSolution",
    "WeightedSolution",
    "FriendSolution",
    "SecurityProfile",
    "CorrelatedSolution",
    "best_response_value",
    "best_response_policy",
    "shapley_solve",
    "solve_mdp_w",
    "friend_vi",
    "security_profile",
    "ce_vi",
    "vi_sweep_bound",
]

log = logging.getLogger(__name__)

#: Gap between cached lower/upper stage-value bounds below which the cached
#: mixes are reused instead of running a fresh LP.
_PINCH_TOL = 1e-11

#: Rounds of residual-target tightening before certification gives up.
_MAX_TIGHTEN = 8

#: Extra sweeps allowed beyond the geometric worst-case bound.
_CAP_MARGIN = 16


def _residual_target(gamma: float, eps: float) -> float:
    """Sup-norm residual that makes the value table eps-accurate."""
    if gamma == 0.0:
        return math.inf  # one exact sweep; any residual is acceptable
    return eps * (1.0 - gamma) / (2.0 * gamma)


def _sweep_cap(gamma: float, u_max: float, target: float) -> int:
    """Worst-case sweeps to push the residual below ``target`` starting from
    zero tables (first residual is at most ``u_max``, then shrinks by a
    factor of gamma per sweep), plus a safety margin."""
    if gamma == 0.0 or u_max == 0.0 or not math.isfinite(target) or target >= u_max:
        return 1 + _CAP_MARGIN
    return 1 + _CAP_MARGIN + int(math.ceil(math.log(target / u_max) / math.log(gamma)))


def vi_sweep_bound(game: StochasticGame, eps: float) -> int:
    """Upper bound on the sweeps value iteration needs for accuracy ``eps``."""
    if eps <= 0:
        raise GameError("eps must be positive")
    if game.gamma == 0.0 or game.u_max == 0.0:
        return 1
    target = _residual_target(game.gamma, eps)
    if target >= game.u_max:
        return 1
    return 1 + int(math.ceil(math.log(target / game.u_max) / math.log(game.gamma)))


# ----------------------------------------------------------------------
# Solution containers
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class ZeroSumSolution:
    """Result of an adversarial solve on one player's reward.

    ``defender`` is the maximizer's stationary policy and guarantees at least
    ``value - eps`` against any opponent; ``attacker`` is the opponent's
    punishment policy and holds the maximizer to at most ``value + eps``.
    """

    value: float
    defender: MixedPolicy
    attacker: MixedPolicy
    state_values: np.ndarray
    maximizer: int
    sweeps: int
    residuals: tuple[float, ...]

    def __post_init__(self):
        self.state_values.setflags(write=False)


@dataclass(frozen=True)
class WeightedSolution:
    """Greedy joint policy for the scalarized MDP and its vector payoff.

    ``scalar`` always equals ``weight * payoff.p1 + (1 - weight) * payoff.p2``
    and is certified to be within eps of the optimal scalarized value.
    """

    weight: float
    policy: JointPolicy
    payoff: PayoffPoint
    scalar: float
    state_values: np.ndarray
    sweeps: int
    residuals: tuple[float, ...]

    def __post_init__(self):
        self.state_values.setflags(write=False)


@dataclass(frozen=True)
class FriendSolution:
    """Jointly executed optimistic policies and what each player hoped for."""

    payoff: PayoffPoint
    p1_policy: MixedPolicy
    p2_policy: MixedPolicy
    ideal: PayoffPoint


@dataclass(frozen=True)
class SecurityProfile:
    """Both defensive policies, their joint payoff, and the two guarantees."""

    payoff: PayoffPoint
    d1: MixedPolicy
    d2: MixedPolicy
    guarantees: PayoffPoint


@dataclass(frozen=True)
class CorrelatedSolution:
    """Stationary per-state joint recommendations and their exact payoff."""

    payoff: PayoffPoint
    dists: np.ndarray
    converged: bool
    sweeps: int

    def __post_init__(self):
        self.dists.setflags(write=False)


# ----------------------------------------------------------------------
# Adversarial (zero-sum) value iteration
# ----------------------------------------------------------------------


def _stage_tables(game: StochasticGame, values: np.ndarray, maximizer: int) -> np.ndarray:
    """Per-state lookahead matrices on the maximizer's reward, oriented so the
    maximizer owns the rows."""
    reward = game.rewards1 if maximizer == 1 else game.rewards2
    q = reward + game.gamma * game.expected_next_values(values).reshape(reward.shape)
    return q if maximizer == 1 else np.swapaxes(q, 1, 2)


def _stage_value(M: np.ndarray, cached) -> tuple[float, object]:
    """Value of one stage matrix: exact pure saddle if present, else cached
    mixes when their bound gap is pinched tight, else a fresh LP."""
    rowmin = M.min(axis=1)
    maximin = rowmin.max()
    minimax = M.max(axis=0).min()
    if maximin >= minimax:  # pure saddle; both sides exact matrix entries
        return float(maximin), cached
    if cached is not None:
        x, y = cached
        lower = float((x @ M).min())
        upper = float((M @ y).max())
        if upper - lower <= _PINCH_TOL:
            return 0.5 * (lower + upper), cached
    sol = solve_zero_sum(MatrixGame(M))
    return sol.value, (sol.row_mix, sol.col_mix)


def _zero_sum_sweeps(game, maximizer, values, target, cache, label):
    """Run sweeps until the residual drops below ``target``; returns the new
    table and the residual history."""
    cap = _sweep_cap(game.gamma, game.u_max, target)
    residuals = []
    for sweep in range(cap):
        q = _stage_tables(game, values, maximizer)
        new = np.zeros(game.n_states)
        for s in range(game.n_states):
            if game.terminal[s]:
                continue
            new[s], cache[s] = _stage_value(q[s], cache[s])
        res = float(np.abs(new - values).max())
        residuals.append(res)
        values = new
        log.debug("%s sweep=%d residual=%.3e", label, sweep, res)
        if res <= target:
            return values, residuals
    raise GameError("value iteration failed to reach its residual target")


def _extract_zero_sum_policies(game, maximizer, values, cache):
    """Defender/attacker mixed policies greedy at the converged table."""
    q = _stage_tables(game, values, maximizer)
    n_def = q.shape[1]
    n_att = q.shape[2]
    X = np.zeros((game.n_states, n_def))
    Y = np.zeros((game.n_states, n_att))
    for s in range(game.n_states):
        if game.terminal[s]:
            continue
        M = q[s]
        rowmin = M.min(axis=1)
        colmax = M.max(axis=0)
        if rowmin.max() >= colmax.min():
            X[s, int(np.argmax(rowmin))] = 1.0
            Y[s, int(np.argmin(colmax))] = 1.0
            continue
        if cache[s] is not None:
            x, y = cache[s]
            if float((M @ y).max()) - float((x @ M).min()) <= _PINCH_TOL:
                X[s], Y[s] = x, y
                continue
        sol = solve_zero_sum(MatrixGame(M))
        X[s], Y[s] = sol.row_mix, sol.col_mix
        cache[s] = (sol.row_mix, sol.col_mix)
    if maximizer == 1:
        return MixedPolicy(1, X), MixedPolicy(2, Y)
    return MixedPolicy(2, X), MixedPolicy(1, Y)


def _response_values(game, owner, fixed, minimize, target):
    """Best-response value table against the fixed mixed policy ``fixed``:
    the free player picks actions to minimize (or maximize) ``owner``'s
    discounted reward.  Returns the table and its accuracy slack."""
    reward = game.rewards1 if owner == 1 else game.rewards2
    live = ~game.terminal
    values = np.zeros(game.n_states)
    cap = _sweep_cap(game.gamma, game.u_max, target)
    res = 0.0
    for _ in range(cap):
        q = reward + game.gamma * game.expected_next_values(values).reshape(reward.shape)
        if fixed.player == 1:
            w = np.einsum("sa,sab->sb", fixed.probs, q)
        else:
            w = np.einsum("sb,sab->sa", fixed.probs, q)
        new = np.where(live, w.min(axis=1) if minimize else w.max(axis=1), 0.0)
        res = float(np.abs(new - values).max())
        values = new
        if res <= target:
            break
    else:
        raise GameError("best-response value iteration failed to converge")
    slack = 0.0 if game.gamma == 0.0 else game.gamma * res / (1.0 - game.gamma)
    return values, slack


def best_response_value(game: StochasticGame, fixed: MixedPolicy, eps: float) -> float:
    """Upper bound on what ``fixed``'s opponent can earn against it.

    With one player pinned to the stationary mixed policy ``fixed``, the other
    faces a plain MDP on its own reward; the returned start-state value is its
    optimum plus the iteration slack, so it conservatively caps every response.
    """
    if eps <= 0:
        raise GameError("eps must be positive")
    responder = 2 if fixed.player == 1 else 1
    target = _residual_target(game.gamma, eps)
    values, slack = _response_values(game, responder, fixed, False, target)
    return float(values[game.start]) + slack


def best_response_policy(
    game: StochasticGame, fixed: MixedPolicy, eps: float
) -> tuple[np.ndarray, float]:
    """Greedy best-response actions against a fixed stationary mixed policy.

    Returns the responding player's per-state pure action array (greedy at
    the converged response table, ties to the lowest index) and the response
    value at the start state.
    """
    if eps <= 0:
        raise GameError("eps must be positive")
    responder = 2 if fixed.player == 1 else 1
    target = _residual_target(game.gamma, eps)
    values, _ = _response_values(game, responder, fixed, False, target)
    reward = game.rewards1 if responder == 1 else game.rewards2
    q = reward + game.gamma * game.expected_next_values(values).reshape(reward.shape)
    if fixed.player == 1:
        w = np.einsum("sa,sab->sb", fixed.probs, q)
    else:
        w = np.einsum("sb,sab->sa", fixed.probs, q)
    actions = w.argmax(axis=1).astype(np.int64)
    return actions, float(values[game.start])


def shapley_solve(game: StochasticGame, maximizer: int, eps: float) -> ZeroSumSolution:
    """Solve the zero-sum game on ``maximizer``'s reward (opponent adversarial).

    The returned ``value`` is within eps of the true minimax value at the
    start state.  Both output policies are certified by best-response value
    iteration: the defender's guarantee is at least ``value - eps`` and the
    attacker caps the maximizer at ``value + eps``; on certificate failure the
    residual target is tightened fourfold and iteration resumes warm-started.
    """
    if maximizer not in (1, 2):
        raise GameError("maximizer must be 1 or 2")
    if eps <= 0:
        raise GameError("eps must be positive")

    values = np.zeros(game.n_states)
    cache: list = [None] * game.n_states
    target = _residual_target(game.gamma, eps)
    history: list[float] = []

    for _ in range(_MAX_TIGHTEN):
        values, residuals = _zero_sum_sweeps(
            game, maximizer, values, target, cache, f"shapley[p{maximizer}]"
        )
        history.extend(residuals)
        defender, attacker = _extract_zero_sum_policies(game, maximizer, values, cache)
        value = float(values[game.start])

        br_target = _residual_target(game.gamma, eps / 8.0)
        guarantee, g_slack = _response_values(game, maximizer, defender, True, br_target)
        if guarantee[game.start] - g_slack < value - eps:
            target /= 4.0
            continue
        cap_vals, c_slack = _response_values(game, maximizer, attacker, False, br_target)
        if cap_vals[game.start] + c_slack > value + eps:
            target /= 4.0
            continue
        return ZeroSumSolution(
            value=value,
            defender=defender,
            attacker=attacker,
            state_values=values,
            maximizer=maximizer,
            sweeps=len(history),
            residuals=tuple(history),
        )
    raise GameError("could not certify the adversarial policies")


# ----------------------------------------------------------------------
# Scalarized joint-control MDP
# ----------------------------------------------------------------------


def solve_mdp_w(game: StochasticGame, w: float, eps: float) -> WeightedSolution:
    """Optimal joint control of the MDP with reward ``w*r1 + (1-w)*r2``.

    Returns the greedy deterministic joint policy (argmax ties broken by
    smallest joint-action index) together with its exactly evaluated vector
    payoff; the scalarized payoff is certified within eps of optimal.
    """
    if not (0.0 <= w <= 1.0):
        raise GameError(f"weight must lie in [0, 1], got {w}")
    if eps <= 0:
        raise GameError("eps must be positive")

    flat_r = (w * game.rewards1 + (1.0 - w) * game.rewards2).reshape(
        game.n_states, game.n_joint
    )
    live = ~game.terminal
    values = np.zeros(game.n_states)
    target = _residual_target(game.gamma, eps)
    history: list[float] = []

    for _ in range(_MAX_TIGHTEN):
        cap = _sweep_cap(game.gamma, game.u_max, target)
        res = math.inf
        for sweep in range(cap):
            q = flat_r + game.gamma * game.expected_next_values(values).reshape(flat_r.shape)
            new = np.where(live, q.max(axis=1), 0.0)
            res = float(np.abs(new - values).max())
            history.append(res)
            values = new
            log.debug("mdp[w=%.6f] sweep=%d residual=%.3e", w, sweep, res)
            if res <= target:
                break
        else:
            raise GameError("value iteration failed to reach its residual target")

        q = flat_r + game.gamma * game.expected_next_values(values).reshape(flat_r.shape)
        best = q.argmax(axis=1)  # first occurrence = smallest joint index
        a1, a2 = np.divmod(best, game.n_actions2)
        policy = JointPolicy(np.where(live, a1, -1), np.where(live, a2, -1))
        payoff = evaluate_joint(game, policy)
        scalar = w * payoff.p1 + (1.0 - w) * payoff.p2

        if game.gamma == 0.0:
            break  # greedy at the exact one-step table is exactly optimal
        slack = game.gamma * res / (1.0 - game.gamma)
        if scalar >= float(values[game.start]) + slack - eps:
            break  # certified: optimal scalar is at most values[start]+slack
        target /= 4.0
    else:
        raise GameError("could not certify the greedy joint policy")

    return WeightedSolution(
        weight=float(w),
        policy=policy,
        payoff=payoff,
        scalar=float(scalar),
        state_values=values,
        sweeps=len(history),
        residuals=tuple(history),
    )


# ----------------------------------------------------------------------
# Baselines
# ----------------------------------------------------------------------


def friend_vi(game: StochasticGame, eps: float) -> FriendSolution:
    """Each player optimizes its own reward over joint actions (as if the
    opponent were cooperating), keeps its own action component, and the two
    components are executed together."""
    if eps <= 0:
        raise GameError("eps must be positive")
    own1 = solve_mdp_w(game, 1.0, eps)
    own2 = solve_mdp_w(game, 0.0, eps)
    p1 = MixedPolicy.pure(1, own1.policy.actions1, game.n_actions1)
    p2 = MixedPolicy.pure(2, own2.policy.actions2, game.n_actions2)
    payoff = evaluate_mixed_pair(game, p1, p2)
    return FriendSolution(
        payoff=payoff,
        p1_policy=p1,
        p2_policy=p2,
        ideal=PayoffPoint(own1.payoff.p1, own2.payoff.p2),
    )


def security_profile(game: StochasticGame, eps: float) -> SecurityProfile:
    """Defensive policies for both players and their jointly executed payoff."""
    sol1 = shapley_solve(game, 1, eps)
    sol2 = shapley_solve(game, 2, eps)
    payoff = evaluate_mixed_pair(game, sol1.defender, sol2.defender)
    return SecurityProfile(
        payoff=payoff,
        d1=sol1.defender,
        d2=sol2.defender,
        guarantees=PayoffPoint(sol1.value, sol2.value),
    )


def ce_vi(
    game: StochasticGame, eps: float, max_sweeps: int | None = None
) -> CorrelatedSolution:
    """Correlated-equilibrium value iteration.

    Each sweep solves the utilitarian correlated equilibrium of every state's
    Q-bimatrix and backs up both players' expectations.  The iteration has no
    convergence guarantee; it stops at the usual residual target or after
    ``max_sweeps`` (default: ten times the adversarial sweep bound) with
    ``converged=False``.  The final per-state distributions are evaluated
    exactly from the start state either way.
    """
    if eps <= 0:
        raise GameError("eps must be positive")
    if max_sweeps is None:
        max_sweeps = 10 * vi_sweep_bound(game, eps)
    if max_sweeps < 1:
        raise GameError("max_sweeps must be at least 1")

    v1 = np.zeros(game.n_states)
    v2 = np.zeros(game.n_states)
    target = _residual_target(game.gamma, eps)
    dists = np.zeros((game.n_states, game.n_actions1, game.n_actions2))
    # Reuse a state's distribution while its Q-tables are unchanged at solver
    # precision; late sweeps then skip the LP entirely.
    cache: list = [None] * game.n_states
    live = [s for s in range(game.n_states) if not game.terminal[s]]

    converged = False
    sweeps = 0
    for sweep in range(max_sweeps):
        sweeps = sweep + 1
        q1, q2 = game.q_tables(v1, v2)
        new1 = np.zeros(game.n_states)
        new2 = np.zeros(game.n_states)
        for s in live:
            entry = cache[s]
            if (
                entry is not None
                and float(np.abs(q1[s] - entry[0]).max()) <= _PINCH_TOL
                and float(np.abs(q2[s] - entry[1]).max()) <= _PINCH_TOL
            ):
                p = entry[2]
            else:
                p = solve_ce_utilitarian(BimatrixGame(q1[s], q2[s]))
                cache[s] = (q1[s].copy(), q2[s].copy(), p)
            dists[s] = p
            new1[s] = float((p * q1[s]).sum())
            new2[s] = float((p * q2[s]).sum())
        res = max(float(np.abs(new1 - v1).max()), float(np.abs(new2 - v2).max()))
        v1, v2 = new1, new2
        log.debug("ce sweep=%d residual=%.3e", sweep, res)
        if res <= target:
            converged = True
            break

    payoff = evaluate_correlated(game, dists)
    return CorrelatedSolution(payoff=payoff, dists=dists, converged=converged, sweeps=sweeps)

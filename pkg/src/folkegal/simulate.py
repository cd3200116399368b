"""Monte-Carlo playout of equilibrium profiles.

Each round is one play of the stage stochastic game with the discount
realized as a continuation coin: after every step the round survives with
probability ``gamma``, so a round's undiscounted reward sum is an unbiased
sample of the discounted value.  Rounds are truncated at the horizon where
the remaining discounted mass falls below ``1e-6`` of the per-step bound,
a negligible bias documented by :func:`horizon_cap`.

Alternating profiles realize their mixing weight by greedy fractional
alternation: round ``t`` (0-based) plays the left policy exactly when the
number of left rounds so far is strictly below ``lam * (t + 1)``, which
keeps the empirical frequency within ``1/t`` of ``lam`` deterministically.

Deviation handling follows grim-trigger monitoring of the deterministic
on-path policies: the first observed off-path action by the deviator
(always player 1 here) switches the opponent to its punishment policy from
the next step on, permanently, across round boundaries.  Two deviator
models are provided: ``best_response_once`` best-responds to the round-0
on-path policy and, once punished, best-responds to the punishment policy
(the strongest rational deviation); ``random`` plays uniform actions
forever.  Defensive profiles have no deterministic path to monitor, so the
opponent simply keeps playing its defensive policy.

All randomness comes from one ``numpy`` PCG64 generator seeded by the
caller.  Draws occur in a fixed order — without a deviator, rounds are
grouped by policy (left block, then right) and processed in chunks, each
step drawing mixed actions (player 1, then 2), then the transition, then
the continuation coin; deviator runs draw in the same per-step order along
a single sequential trajectory — so equal seeds give bit-identical reports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .egalitarian import EquilibriumProfile, Mode
from .games import GameError, JointPolicy, MixedPolicy, PayoffPoint, StochasticGame
from .solvers import best_response_policy

__all__ = [
    "SimulationReport",
    "horizon_cap",
    "alternation_sequence",
    "simulate_profile",
]

DEVIATORS = ("none", "best_response_once", "random")
_MASS_CUTOFF = 1e-6
_CHUNK = 16384


def horizon_cap(gamma: float) -> int:
    """Steps after which a round's remaining discounted mass is negligible.

    Smallest ``k >= 1`` with ``gamma**k < 1e-6 * (1 - gamma)``; the reward
    ignored by truncating there is below ``1e-6 * u_max`` in expectation.
    """
    if not 0.0 <= gamma < 1.0:
        raise GameError("gamma must lie in [0, 1)")
    if gamma == 0.0:
        return 1
    k = math.log(_MASS_CUTOFF * (1.0 - gamma)) / math.log(gamma)
    return max(1, math.ceil(k))


def alternation_sequence(lam: float, rounds: int) -> np.ndarray:
    """Boolean round plan (True = left policy) under greedy alternation."""
    if not 0.0 <= lam <= 1.0:
        raise GameError("lam must lie in [0, 1]")
    if rounds < 1:
        raise GameError("rounds must be positive")
    out = np.empty(rounds, dtype=bool)
    n_left = 0
    for t in range(rounds):
        left = n_left < lam * (t + 1)
        out[t] = left
        n_left += left
    return out


@dataclass(frozen=True)
class SimulationReport:
    """Empirical round-average payoffs of a profile playout."""

    rounds: int
    seed: int
    deviator: str
    horizon: int
    mean: PayoffPoint
    stderr: PayoffPoint
    target: PayoffPoint
    left_rounds: int | None = None
    deviator_player: int | None = None
    deviator_average: float | None = None
    equilibrium_average: float | None = None

    def as_dict(self) -> dict:
        return {
            "rounds": self.rounds,
            "seed": self.seed,
            "deviator": self.deviator,
            "horizon": self.horizon,
            "mean": [self.mean.p1, self.mean.p2],
            "stderr": [self.stderr.p1, self.stderr.p2],
            "target": [self.target.p1, self.target.p2],
            "left_rounds": self.left_rounds,
            "deviator_player": self.deviator_player,
            "deviator_average": self.deviator_average,
            "equilibrium_average": self.equilibrium_average,
        }


# ---------------------------------------------------------------------------
# per-player action sources


def _pure_source(actions: np.ndarray) -> tuple[str, np.ndarray]:
    return ("pure", np.asarray(actions, dtype=np.int64))


def _mixed_source(probs: np.ndarray) -> tuple[str, np.ndarray]:
    return ("mixed", np.cumsum(probs, axis=1))


def _draw(source: tuple[str, np.ndarray], states: np.ndarray, rng) -> np.ndarray:
    kind, table = source
    if kind == "pure":
        return table[states]
    rows = table[states]
    u = rng.random(len(states))
    idx = (rows < u[:, None]).sum(axis=1)
    return np.minimum(idx, rows.shape[1] - 1)


def _joint_sources(game: StochasticGame, policy: JointPolicy):
    return _pure_source(policy.actions1), _pure_source(policy.actions2)


def _mixed_pair_sources(d1: MixedPolicy, d2: MixedPolicy):
    return _mixed_source(d1.probs), _mixed_source(d2.probs)


# ---------------------------------------------------------------------------
# batched equilibrium-path rounds


def _run_batch(
    game: StochasticGame,
    cum_trans: np.ndarray,
    source1,
    source2,
    episodes: int,
    horizon: int,
    rng,
) -> np.ndarray:
    """Round reward sums (episodes, 2) for one fixed policy pair."""
    sums = np.zeros((episodes, 2))
    a1_stride = game.n_actions2
    state_stride = game.n_actions1 * game.n_actions2
    for lo in range(0, episodes, _CHUNK):
        n = min(_CHUNK, episodes - lo)
        states = np.full(n, game.start, dtype=np.int64)
        idx = np.arange(lo, lo + n)
        if game.terminal[game.start]:
            continue
        for _ in range(horizon):
            a1 = _draw(source1, states, rng)
            a2 = _draw(source2, states, rng)
            sums[idx, 0] += game.rewards1[states, a1, a2]
            sums[idx, 1] += game.rewards2[states, a1, a2]
            flat = states * state_stride + a1 * a1_stride + a2
            u = rng.random(len(states))
            nxt = (cum_trans[flat] < u[:, None]).sum(axis=1)
            states = np.minimum(nxt, game.n_states - 1)
            cont = rng.random(len(states)) < game.gamma
            keep = cont & ~game.terminal[states]
            if not keep.any():
                break
            states = states[keep]
            idx = idx[keep]
    return sums


def _path_sources(profile: EquilibriumProfile, left: bool):
    if profile.mode is Mode.DEFENSIVE:
        return _mixed_pair_sources(profile.defender1, profile.defender2)
    policy = profile.left_policy if left else profile.right_policy
    return _joint_sources(profile.game, policy)


def _simulate_path(
    profile: EquilibriumProfile, rounds: int, horizon: int, rng
) -> tuple[np.ndarray, int | None]:
    game = profile.game
    cum_trans = np.cumsum(game.transitions.toarray(), axis=1)
    if profile.mode is Mode.DEFENSIVE:
        s1, s2 = _path_sources(profile, True)
        return _run_batch(game, cum_trans, s1, s2, rounds, horizon, rng), None
    plan = alternation_sequence(profile.left_weight, rounds)
    n_left = int(plan.sum())
    sums = np.zeros((rounds, 2))
    if n_left:
        s1, s2 = _path_sources(profile, True)
        sums[plan] = _run_batch(game, cum_trans, s1, s2, n_left, horizon, rng)
    if rounds - n_left:
        s1, s2 = _path_sources(profile, False)
        sums[~plan] = _run_batch(
            game, cum_trans, s1, s2, rounds - n_left, horizon, rng
        )
    return sums, n_left


# ---------------------------------------------------------------------------
# sequential deviator trajectory (player 1 deviates)


def _simulate_deviator(
    profile: EquilibriumProfile,
    rounds: int,
    horizon: int,
    rng,
    deviator: str,
    eps: float,
) -> tuple[np.ndarray, int | None]:
    game = profile.game
    cum_trans = np.cumsum(game.transitions.toarray(), axis=1)
    alternating = profile.mode is Mode.ALTERNATING
    plan = (
        alternation_sequence(profile.left_weight, rounds)
        if alternating
        else np.ones(rounds, dtype=bool)
    )

    if alternating:
        threat = profile.threat1  # punishes player 1, played by player 2
        threat_cum = np.cumsum(threat.probs, axis=1)
        round0 = profile.left_policy if plan[0] else profile.right_policy
        opp0 = MixedPolicy.pure(2, round0.actions2, game.n_actions2)
        br_onpath, _ = best_response_policy(game, opp0, eps)
        br_threat, _ = best_response_policy(game, threat, eps)
    else:
        defend_cum = np.cumsum(profile.defender2.probs, axis=1)
        opp = profile.defender2
        br_onpath, _ = best_response_policy(game, opp, eps)
        br_threat = br_onpath

    sums = np.zeros((rounds, 2))
    triggered = False
    for t in range(rounds):
        if alternating:
            path = profile.left_policy if plan[t] else profile.right_policy
        s = game.start
        for _ in range(horizon):
            if game.terminal[s]:
                break
            # player 1 (the deviator)
            if deviator == "random":
                a1 = int(rng.integers(game.n_actions1))
            elif triggered:
                a1 = int(br_threat[s])
            else:
                a1 = int(br_onpath[s])
            # player 2 (monitor): threat once triggered, else the path
            if alternating:
                if triggered:
                    u = rng.random()
                    a2 = int(min((threat_cum[s] < u).sum(), game.n_actions2 - 1))
                else:
                    a2 = int(path.actions2[s])
            else:
                u = rng.random()
                a2 = int(min((defend_cum[s] < u).sum(), game.n_actions2 - 1))
            sums[t, 0] += game.rewards1[s, a1, a2]
            sums[t, 1] += game.rewards2[s, a1, a2]
            if alternating and not triggered and a1 != int(path.actions1[s]):
                triggered = True  # detected now; punishment from next step
            flat = (s * game.n_actions1 + a1) * game.n_actions2 + a2
            u = rng.random()
            s = int(min((cum_trans[flat] < u).sum(), game.n_states - 1))
            if rng.random() >= game.gamma:
                break
    n_left = int(plan.sum()) if alternating else None
    return sums, n_left


def simulate_profile(
    profile: EquilibriumProfile,
    rounds: int,
    seed: int = 0,
    deviator: str = "none",
    eps: float = 1e-3,
) -> SimulationReport:
    """Play ``rounds`` stage games under the profile and report averages.

    ``deviator='none'`` follows the equilibrium path exactly (vectorized).
    The other modes replace player 1 by a deviating agent along a single
    sequential trajectory with grim-trigger monitoring; the report then
    carries the deviator's empirical average next to the analytic
    equilibrium-path value it should not beat by more than eps plus noise.
    """
    if rounds < 1:
        raise GameError("rounds must be positive")
    if deviator not in DEVIATORS:
        raise GameError(f"deviator must be one of {DEVIATORS}")
    rng = np.random.default_rng(seed)
    horizon = horizon_cap(profile.game.gamma)

    if deviator == "none":
        sums, n_left = _simulate_path(profile, rounds, horizon, rng)
    else:
        sums, n_left = _simulate_deviator(
            profile, rounds, horizon, rng, deviator, eps
        )

    mean = sums.mean(axis=0)
    stderr = sums.std(axis=0, ddof=1) / math.sqrt(rounds) if rounds > 1 else (
        np.zeros(2)
    )
    report = SimulationReport(
        rounds=rounds,
        seed=seed,
        deviator=deviator,
        horizon=horizon,
        mean=PayoffPoint(float(mean[0]), float(mean[1])),
        stderr=PayoffPoint(float(stderr[0]), float(stderr[1])),
        target=profile.target,
        left_rounds=n_left,
        deviator_player=None if deviator == "none" else 1,
        deviator_average=None if deviator == "none" else float(mean[0]),
        equilibrium_average=None if deviator == "none" else profile.target.p1,
    )
    return report

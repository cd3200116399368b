"""Egalitarian equilibrium construction for two-player stochastic games.

The driver :func:`folk_egal` builds a repeated-game equilibrium around the
egalitarian point — the feasible payoff pair maximizing the players' minimum
advantage over their security values:

1. two zero-sum solves give the disagreement point ``v``, each player's
   defensive policy, and each player's punishment policy;
2. two scalarized control solves (weights 1 and 0) give the extreme flank
   points ``R0`` (best for player 1) and ``L0`` (best for player 2);
3. :func:`egal_search` walks the upper-right frontier of the feasible set by
   repeatedly solving the scalarized game at the weight where the two flanks
   tie, until no weighted solve improves on the flank chord;
4. the crossing of the final flank segment with the equal-advantage line is
   the target; if its egalitarian value is below ``eps`` the profile is
   *Defensive* (both players simply play their security policies), otherwise
   it is *Alternating*: the two flank policies are alternated with frequency
   ``left_weight``, defended by grim-trigger threats.

Accuracy budget: of the caller's ``eps``, half goes to the zero-sum solves,
a quarter to the weighted solves and the improvement test, and a quarter is
left for intersection arithmetic, so the returned target's egalitarian value
is within ``eps`` of optimal over the searched frontier.

Everything here is a pure function of its inputs; the two zero-sum solves
and the two flank solves are independent and safe to run concurrently,
though this implementation runs them sequentially.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from .games import (
    JointPolicy,
    MixedPolicy,
    PayoffPoint,
    Side,
    StochasticGame,
    egal_value,
    evaluate_mixed_pair,
    line_side,
    mix_points,
)
from .solvers import (
    WeightedSolution,
    best_response_value,
    shapley_solve,
    solve_mdp_w,
)

__all__ = [
    "Mode",
    "SearchIteration",
    "SearchTrace",
    "EgalSearchResult",
    "EquilibriumProfile",
    "EnforceabilityReport",
    "PlayerMargins",
    "balance",
    "intersect",
    "iteration_bound",
    "default_initial_area",
    "egal_search",
    "folk_egal",
    "check_enforceable",
    "profile_to_dict",
    "trace_to_dict",
]

log = logging.getLogger(__name__)

#: Improvement test threshold and flank tolerances are this fraction of eps.
_BUDGET_SPLIT = 4.0
_DEGENERATE_DEN = 1e-12
_AREA_SLACK = 1e-9
_MIX_TOL = 1e-6


class Mode(Enum):
    DEFENSIVE = "Defensive"
    ALTERNATING = "Alternating"


def balance(left: PayoffPoint, right: PayoffPoint) -> float:
    """Weight ``w`` at which the two points earn equal scalarized value.

    Solves ``w*L1 + (1-w)*L2 = w*R1 + (1-w)*R2`` and clamps to [0, 1]; a
    degenerate denominator (coincident or axis-parallel-degenerate points)
    yields the neutral weight 0.5.
    """
    den = (left.p1 - right.p1) + (right.p2 - left.p2)
    if abs(den) <= _DEGENERATE_DEN:
        return 0.5
    w = (right.p2 - left.p2) / den
    return min(1.0, max(0.0, w))


def intersect(
    left: PayoffPoint, right: PayoffPoint, v: PayoffPoint
) -> tuple[float, PayoffPoint]:
    """Mixing share putting ``lam*left + (1-lam)*right`` on the equal-advantage line.

    ``left`` must lie weakly left of the line through ``v`` (player 2
    advantaged or balanced) and ``right`` weakly right; the crossing of the
    segment with the line then exists and is returned with its share.
    """
    d_left = (left.p1 - v.p1) - (left.p2 - v.p2)
    d_right = (right.p1 - v.p1) - (right.p2 - v.p2)
    if d_left > 0.0 and d_right > 0.0 or d_left < 0.0 and d_right < 0.0:
        raise ValueError("points on same side")
    if d_right == d_left:
        lam = 0.5
    else:
        lam = d_right / (d_right - d_left)
    return lam, mix_points(left, right, lam)


def iteration_bound(nu0: float, eps: float) -> int:
    """Iterations guaranteeing the active triangle shrinks below eps² / 2.

    Each accepted point at most halves the triangle's area, so
    ``T = ceil(log2(2 * nu0 / eps**2))`` suffices (never negative).
    """
    if nu0 < 0.0:
        raise ValueError("initial area must be nonnegative")
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    ratio = 2.0 * nu0 / (eps * eps)
    # ratio <= 1 also covers subnormal nu0 underflowing the division to 0,
    # where log2 would raise instead of reporting "already below the floor"
    if ratio <= 1.0:
        return 0
    return math.ceil(math.log2(ratio))


def default_initial_area(game: StochasticGame) -> float:
    """Half the bounding square of the feasible set: (2*U_max/(1-gamma))² / 2."""
    span = 2.0 * game.u_max / (1.0 - game.gamma)
    return span * span / 2.0


@dataclass(frozen=True)
class SearchIteration:
    """One frontier solve: flanks on entry, the weight tried, its result.

    ``area`` is the active triangle (flanks plus support-line apex) measured
    on entry; ``point`` is the weighted solve's payoff, whether or not it
    improved on the flank chord.
    """

    left: PayoffPoint
    right: PayoffPoint
    weight: float
    point: PayoffPoint | None
    area: float
    policy: JointPolicy | None = None


@dataclass(frozen=True)
class SearchTrace:
    """Log of an egalitarian frontier search."""

    iterations: tuple[SearchIteration, ...]
    nu0: float
    eps: float
    cap: int
    stop_reason: str

    def __len__(self) -> int:
        return len(self.iterations)


@dataclass(frozen=True)
class EgalSearchResult:
    point: PayoffPoint
    left_weight: float
    left_policy: JointPolicy
    right_policy: JointPolicy
    left_payoff: PayoffPoint
    right_payoff: PayoffPoint
    trace: SearchTrace


def _support_apex(
    w_left: float,
    c_left: Fraction,
    w_right: float,
    c_right: Fraction,
) -> tuple[Fraction, Fraction] | None:
    """Crossing of the two flank support lines ``w*x + (1-w)*y = c``."""
    wl, wr = Fraction(w_left), Fraction(w_right)
    det = wl - wr
    if det == 0:
        return None
    x = (c_left * (1 - wr) - c_right * (1 - wl)) / det
    y = (wl * c_right - wr * c_left) / det
    return x, y


def _triangle_area(
    left: PayoffPoint, right: PayoffPoint, apex: tuple[Fraction, Fraction] | None
) -> float:
    if apex is None:
        return 0.0
    lx, ly = Fraction(left.p1), Fraction(left.p2)
    rx, ry = Fraction(right.p1), Fraction(right.p2)
    ax, ay = apex
    cross = (rx - lx) * (ay - ly) - (ax - lx) * (ry - ly)
    return float(abs(cross) / 2)


def _scalar(point: PayoffPoint, w: float) -> float:
    return w * point.p1 + (1.0 - w) * point.p2


def egal_search(
    game: StochasticGame,
    left0: WeightedSolution,
    right0: WeightedSolution,
    cap: int,
    v: PayoffPoint,
    eps: float,
) -> EgalSearchResult:
    """Frontier walk maximizing the minimum advantage over ``v``.

    ``left0``/``right0`` are weighted solutions whose payoffs flank the
    equal-advantage line (left weakly favors player 2, right weakly favors
    player 1).  Repeatedly solves the scalarized game at the flank-balancing
    weight; a solve that fails to beat the flank chord by more than
    ``eps / 4`` ends the search, as does the iteration cap.  The result
    mixes the final flanks at the line crossing.

    The trace logs one row per weighted solve — flanks, weight, solved
    point, and the active-triangle area on entry — and areas at least halve
    between consecutive rows.  A row that would break that guarantee (a
    floating-point pathology) aborts the search instead of being logged.
    """
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    if cap < 0:
        raise ValueError("iteration cap must be nonnegative")
    tol = eps / _BUDGET_SPLIT
    if line_side(left0.payoff, v, tol) is Side.RIGHT:
        raise ValueError("left flank lies right of the egalitarian line")
    if line_side(right0.payoff, v, tol) is Side.LEFT:
        raise ValueError("right flank lies left of the egalitarian line")

    left, right = left0, right0
    w_left, w_right = left0.weight, right0.weight
    rows: list[SearchIteration] = []
    nu0 = 0.0
    stop = "iterations_exhausted" if cap > 0 else "iteration_cap_zero"
    prev_area: float | None = None

    for _ in range(cap):
        # Support constants are exact dot products in Fraction arithmetic so
        # the apex and area see consistent geometry.
        c_left = Fraction(w_left) * Fraction(left.payoff.p1) + (
            1 - Fraction(w_left)
        ) * Fraction(left.payoff.p2)
        c_right = Fraction(w_right) * Fraction(right.payoff.p1) + (
            1 - Fraction(w_right)
        ) * Fraction(right.payoff.p2)
        apex = _support_apex(w_left, c_left, w_right, c_right)
        area = _triangle_area(left.payoff, right.payoff, apex)
        if prev_area is None:
            nu0 = area
        elif area > prev_area / 2.0 + _AREA_SLACK:
            stop = "area_stall"
            log.warning(
                "frontier triangle failed to halve (%.3e -> %.3e); stopping",
                prev_area,
                area,
            )
            break

        w = balance(left.payoff, right.payoff)
        solved = solve_mdp_w(game, w, eps / _BUDGET_SPLIT)
        rows.append(
            SearchIteration(
                left=left.payoff,
                right=right.payoff,
                weight=w,
                point=solved.payoff,
                area=area,
                policy=solved.policy,
            )
        )
        prev_area = area
        if solved.scalar <= _scalar(left.payoff, w) + tol:
            stop = "no_improvement"
            break
        d = (solved.payoff.p1 - v.p1) - (solved.payoff.p2 - v.p2)
        if d > 0.0:
            right, w_right = solved, w
        else:
            left, w_left = solved, w

    lam, point = intersect(left.payoff, right.payoff, v)
    trace = SearchTrace(
        iterations=tuple(rows), nu0=nu0, eps=eps, cap=cap, stop_reason=stop
    )
    return EgalSearchResult(
        point=point,
        left_weight=lam,
        left_policy=left.policy,
        right_policy=right.policy,
        left_payoff=left.payoff,
        right_payoff=right.payoff,
        trace=trace,
    )


@dataclass(frozen=True)
class EquilibriumProfile:
    """A playable repeated-game profile targeting the egalitarian point.

    Defensive mode: both players play their zero-sum defensive policies
    forever (the feasible set offers no minimum-advantage gain above eps).
    Alternating mode: play ``left_policy`` a ``left_weight`` fraction of
    rounds and ``right_policy`` otherwise; any observed deviation by player
    ``i`` triggers the opponent's punishment policy ``threat_i`` forever.
    """

    game: StochasticGame
    mode: Mode
    disagreement: PayoffPoint
    target: PayoffPoint
    egalitarian: float
    defender1: MixedPolicy
    defender2: MixedPolicy
    left_weight: float | None = None
    left_policy: JointPolicy | None = None
    right_policy: JointPolicy | None = None
    left_payoff: PayoffPoint | None = None
    right_payoff: PayoffPoint | None = None
    threat1: MixedPolicy | None = None
    threat2: MixedPolicy | None = None

    def __post_init__(self) -> None:
        alternating_fields = (
            self.left_weight,
            self.left_policy,
            self.right_policy,
            self.left_payoff,
            self.right_payoff,
            self.threat1,
            self.threat2,
        )
        if self.mode is Mode.ALTERNATING:
            if any(f is None for f in alternating_fields):
                raise ValueError("alternating profile is missing flank data")
            if not 0.0 <= self.left_weight <= 1.0:
                raise ValueError("left_weight must lie in [0, 1]")
            mixed = mix_points(self.left_payoff, self.right_payoff, self.left_weight)
            if (
                abs(mixed.p1 - self.target.p1) > _MIX_TOL
                or abs(mixed.p2 - self.target.p2) > _MIX_TOL
            ):
                raise ValueError("target does not match the flank mixture")
        else:
            if any(f is not None for f in alternating_fields):
                raise ValueError("defensive profile carries alternating fields")


def folk_egal(
    game: StochasticGame, eps: float
) -> tuple[EquilibriumProfile, SearchTrace]:
    """Construct an eps-equilibrium of the repeated game around the egalitarian point.

    Runs the full pipeline described in the module docstring.  The returned
    trace covers the frontier search (empty if an extreme flank already sat
    on or across the equal-advantage line).  The number of weighted solves
    is ``2 + len(trace)``, at most ``2 + iteration_bound(...)``.
    """
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    sol1 = shapley_solve(game, maximizer=1, eps=eps / 2.0)
    sol2 = shapley_solve(game, maximizer=2, eps=eps / 2.0)
    v = PayoffPoint(sol1.value, sol2.value)

    right0 = solve_mdp_w(game, 1.0, eps / _BUDGET_SPLIT)
    left0 = solve_mdp_w(game, 0.0, eps / _BUDGET_SPLIT)
    tol = eps / _BUDGET_SPLIT

    if line_side(right0.payoff, v, tol) is not Side.RIGHT:
        # Player 1's best point already favors player 2: the whole feasible
        # set sits weakly left, so the frontier search has nothing to do.
        result = _degenerate_result(right0, 0.0, v, eps, "right_point_not_right")
    elif line_side(left0.payoff, v, tol) is not Side.LEFT:
        result = _degenerate_result(left0, 1.0, v, eps, "left_point_not_left")
    else:
        cap = iteration_bound(default_initial_area(game), eps)
        result = egal_search(game, left0, right0, cap, v, eps)

    target = result.point
    egal = egal_value(target, v)
    if egal <= eps:
        played = evaluate_mixed_pair(game, sol1.defender, sol2.defender)
        profile = EquilibriumProfile(
            game=game,
            mode=Mode.DEFENSIVE,
            disagreement=v,
            target=played,
            egalitarian=egal_value(played, v),
            defender1=sol1.defender,
            defender2=sol2.defender,
        )
    else:
        profile = EquilibriumProfile(
            game=game,
            mode=Mode.ALTERNATING,
            disagreement=v,
            target=target,
            egalitarian=egal,
            defender1=sol1.defender,
            defender2=sol2.defender,
            left_weight=result.left_weight,
            left_policy=result.left_policy,
            right_policy=result.right_policy,
            left_payoff=result.left_payoff,
            right_payoff=result.right_payoff,
            threat1=sol1.attacker,
            threat2=sol2.attacker,
        )
    return profile, result.trace


def _degenerate_result(
    flank: WeightedSolution, lam: float, v: PayoffPoint, eps: float, reason: str
) -> EgalSearchResult:
    trace = SearchTrace(iterations=(), nu0=0.0, eps=eps, cap=0, stop_reason=reason)
    return EgalSearchResult(
        point=flank.payoff,
        left_weight=lam,
        left_policy=flank.policy,
        right_policy=flank.policy,
        left_payoff=flank.payoff,
        right_payoff=flank.payoff,
        trace=trace,
    )


@dataclass(frozen=True)
class PlayerMargins:
    """Enforceability arithmetic for one player (all margins want >= 0)."""

    target: float
    security: float
    participation_margin: float
    deviation_value: float | None = None
    deviation_margin: float | None = None


@dataclass(frozen=True)
class EnforceabilityReport:
    passed: bool
    mode: Mode
    eps: float
    player1: PlayerMargins
    player2: PlayerMargins

    def as_dict(self) -> dict:
        def entry(m: PlayerMargins) -> dict:
            return {
                "target": m.target,
                "security": m.security,
                "participation_margin": m.participation_margin,
                "deviation_value": m.deviation_value,
                "deviation_margin": m.deviation_margin,
            }

        return {
            "passed": self.passed,
            "mode": self.mode.value,
            "eps": self.eps,
            "player1": entry(self.player1),
            "player2": entry(self.player2),
        }


def check_enforceable(profile: EquilibriumProfile, eps: float) -> EnforceabilityReport:
    """Verify the profile is an eps-equilibrium of the repeated game.

    Participation: each player's target payoff must be at least its security
    value minus eps.  Deterrence (Alternating mode): a deviator faces its
    punishment policy forever after, so its long-run round average is capped
    by its best response against that fixed policy; that cap must not exceed
    the security value plus eps.  Failures are reported, never raised.
    """
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    game = profile.game
    v = profile.disagreement
    margins: list[PlayerMargins] = []
    for i, (target_i, v_i) in enumerate(
        ((profile.target.p1, v.p1), (profile.target.p2, v.p2)), start=1
    ):
        deviation = deviation_margin = None
        if profile.mode is Mode.ALTERNATING:
            threat = profile.threat1 if i == 1 else profile.threat2
            # The response cap is certified (converged value plus iteration
            # slack), so the comparison below stays sound at any tolerance;
            # measuring at eps/4 keeps the checker's own noise well inside
            # the eps allowance it is auditing.
            deviation = best_response_value(game, threat, eps / 4.0)
            deviation_margin = (v_i + eps) - deviation
        margins.append(
            PlayerMargins(
                target=target_i,
                security=v_i,
                participation_margin=target_i - (v_i - eps),
                deviation_value=deviation,
                deviation_margin=deviation_margin,
            )
        )
    p1, p2 = margins
    passed = p1.participation_margin >= 0.0 and p2.participation_margin >= 0.0
    if profile.mode is Mode.ALTERNATING:
        passed = passed and p1.deviation_margin >= 0.0 and p2.deviation_margin >= 0.0
    return EnforceabilityReport(
        passed=passed, mode=profile.mode, eps=eps, player1=p1, player2=p2
    )


# ---------------------------------------------------------------------------
# serialization (plain dicts for the CLI and file outputs)


def _point_dict(p: PayoffPoint | None) -> list[float] | None:
    return None if p is None else [p.p1, p.p2]


def profile_to_dict(profile: EquilibriumProfile) -> dict:
    return {
        "mode": profile.mode.value,
        "disagreement": _point_dict(profile.disagreement),
        "target": _point_dict(profile.target),
        "egalitarian": profile.egalitarian,
        "lambda": profile.left_weight,
        "left_payoff": _point_dict(profile.left_payoff),
        "right_payoff": _point_dict(profile.right_payoff),
    }


def trace_to_dict(trace: SearchTrace) -> dict:
    return {
        "nu0": trace.nu0,
        "eps": trace.eps,
        "cap": trace.cap,
        "stop_reason": trace.stop_reason,
        "iterations": [
            {
                "left": _point_dict(row.left),
                "right": _point_dict(row.right),
                "weight": row.weight,
                "point": _point_dict(row.point),
                "area": row.area,
            }
            for row in trace.iterations
        ],
    }

"""Core container and evaluation tests for folkegal.games."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from folkegal import (
    GameError,
    IncompletePolicyError,
    JointPolicy,
    MixedPolicy,
    PayoffPoint,
    Side,
    StochasticGame,
    egal_value,
    evaluate_correlated,
    evaluate_joint,
    evaluate_mixed_pair,
    game_from_json,
    game_to_json,
    line_side,
    mix_points,
)

from oracles import eval_mixed, eval_pure_joint, random_game


def single_state_game(r1, r2, gamma):
    """One-state self-loop game with 2x2 stage rewards."""
    r1 = np.asarray(r1, dtype=float).reshape(1, 2, 2)
    r2 = np.asarray(r2, dtype=float).reshape(1, 2, 2)
    T = np.ones((4, 1))
    return StochasticGame(
        n_states=1,
        n_actions1=2,
        n_actions2=2,
        rewards1=r1,
        rewards2=r2,
        transitions=T,
        gamma=gamma,
        start=0,
        terminal=np.array([False]),
    )


def corridor_game():
    """Three-step chain: two -1 steps, then a 99 step into the terminal."""
    n = 4
    r1 = np.zeros((n, 1, 1))
    r1[0] = -1.0
    r1[1] = -1.0
    r1[2] = 99.0
    T = np.zeros((n, n))
    T[0, 1] = T[1, 2] = T[2, 3] = T[3, 3] = 1.0
    return StochasticGame(
        n_states=n,
        n_actions1=1,
        n_actions2=1,
        rewards1=r1,
        rewards2=np.zeros_like(r1),
        transitions=T,
        gamma=0.95,
        start=0,
        terminal=np.array([False, False, False, True]),
    )


class TestEvaluateJoint:
    def test_self_loop_geometric_sum(self):
        g = single_state_game([[1, 0], [0, 0]], [[3, 0], [0, 0]], 0.5)
        pi = JointPolicy(actions1=(0,), actions2=(0,))
        p = evaluate_joint(g, pi)
        assert p.p1 == pytest.approx(2.0, abs=1e-12)
        assert p.p2 == pytest.approx(6.0, abs=1e-12)

    def test_terminal_start_yields_zero(self):
        g = StochasticGame(
            n_states=1,
            n_actions1=2,
            n_actions2=2,
            rewards1=np.zeros((1, 2, 2)),
            rewards2=np.zeros((1, 2, 2)),
            transitions=np.ones((4, 1)),
            gamma=0.9,
            start=0,
            terminal=np.array([True]),
        )
        p = evaluate_joint(g, JointPolicy(actions1=(0,), actions2=(0,)))
        assert (p.p1, p.p2) == (0.0, 0.0)

    def test_terminal_with_nonzero_reward_rejected(self):
        with pytest.raises(GameError):
            StochasticGame(
                n_states=1,
                n_actions1=2,
                n_actions2=2,
                rewards1=np.full((1, 2, 2), 5.0),
                rewards2=np.zeros((1, 2, 2)),
                transitions=np.ones((4, 1)),
                gamma=0.9,
                start=0,
                terminal=np.array([True]),
            )

    def test_corridor_discounting(self):
        p = evaluate_joint(corridor_game(), JointPolicy((0, 0, 0, 0), (0, 0, 0, 0)))
        assert p.p1 == pytest.approx(87.3975, abs=1e-9)
        assert p.p2 == 0.0

    def test_undefined_reachable_state_raises(self):
        g = corridor_game()
        pi = JointPolicy.from_mapping(4, {0: (0, 0), 2: (0, 0)})
        with pytest.raises(IncompletePolicyError):
            evaluate_joint(g, pi)

    def test_undefined_unreachable_state_is_fine(self):
        # state 2 unreachable once state 1 self-loops
        T = np.zeros((4, 4))
        T[0, 1] = T[1, 1] = T[2, 3] = T[3, 3] = 1.0
        rewards = np.ones((4, 1, 1))
        rewards[3] = 0.0
        g = StochasticGame(
            n_states=4,
            n_actions1=1,
            n_actions2=1,
            rewards1=rewards,
            rewards2=np.zeros((4, 1, 1)),
            transitions=T,
            gamma=0.5,
            start=0,
            terminal=np.array([False, False, False, True]),
        )
        pi = JointPolicy.from_mapping(4, {0: (0, 0), 1: (0, 0)})
        p = evaluate_joint(g, pi)
        assert p.p1 == pytest.approx(2.0, abs=1e-12)


class TestEvaluateMixed:
    def test_matching_pennies_uniform_is_zero(self):
        g = single_state_game([[1, -1], [-1, 1]], [[-1, 1], [1, -1]], 0.5)
        u1 = MixedPolicy.uniform(1, 1, 2)
        u2 = MixedPolicy.uniform(2, 1, 2)
        p = evaluate_mixed_pair(g, u1, u2)
        assert p.p1 == pytest.approx(0.0, abs=1e-12)
        assert p.p2 == pytest.approx(0.0, abs=1e-12)

    def test_quarter_weight_stage_expectation(self):
        g = single_state_game([[4, 0], [0, 0]], [[0, 0], [0, 0]], 0.0)
        u1 = MixedPolicy.uniform(1, 1, 2)
        u2 = MixedPolicy.uniform(2, 1, 2)
        p = evaluate_mixed_pair(g, u1, u2)
        assert p.p1 == pytest.approx(1.0, abs=1e-12)

    def test_deterministic_mixed_matches_joint(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            g = random_game(rng, 4, 2, 3, 0.8)
            a1 = rng.integers(0, 2, 4)
            a2 = rng.integers(0, 3, 4)
            pj = evaluate_joint(g, JointPolicy(tuple(a1), tuple(a2)))
            pm = evaluate_mixed_pair(
                g,
                MixedPolicy.pure(1, a1, 2),
                MixedPolicy.pure(2, a2, 3),
            )
            assert pm.p1 == pytest.approx(pj.p1, abs=2e-9)
            assert pm.p2 == pytest.approx(pj.p2, abs=2e-9)

    def test_matches_dense_linear_solve(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            g = random_game(rng, 5, 2, 2, 0.9)
            probs1 = rng.dirichlet(np.ones(2), size=5)
            probs2 = rng.dirichlet(np.ones(2), size=5)
            got = evaluate_mixed_pair(
                g, MixedPolicy(player=1, probs=probs1), MixedPolicy(player=2, probs=probs2)
            )
            want = eval_mixed(g, probs1, probs2)
            assert got.p1 == pytest.approx(want[0], abs=1e-8)
            assert got.p2 == pytest.approx(want[1], abs=1e-8)


def test_evaluate_correlated_uniform_pennies():
    g = single_state_game([[1, -1], [-1, 1]], [[-1, 1], [1, -1]], 0.5)
    dists = np.full((1, 2, 2), 0.25)
    p = evaluate_correlated(g, dists)
    assert p.p1 == pytest.approx(0.0, abs=1e-12)
    assert p.p2 == pytest.approx(0.0, abs=1e-12)


class TestGeometry:
    @pytest.mark.parametrize(
        "x, v, want",
        [
            (PayoffPoint(5.0, 4.0), PayoffPoint(2.0, 1.0), 3.0),
            (PayoffPoint(3.0, 7.0), PayoffPoint(1.0, 2.0), 2.0),
            (PayoffPoint(2.0, 1.0), PayoffPoint(2.0, 1.0), 0.0),
        ],
    )
    def test_egal_value(self, x, v, want):
        assert egal_value(x, v) == pytest.approx(want, abs=0)

    @pytest.mark.parametrize(
        "x, want",
        [
            (PayoffPoint(2.0, 2.0), Side.ON),
            (PayoffPoint(5.0, 1.0), Side.RIGHT),
            (PayoffPoint(1.0, 5.0), Side.LEFT),
        ],
    )
    def test_line_side(self, x, want):
        assert line_side(x, PayoffPoint(0.0, 0.0)) is want

    def test_line_side_tolerance_band(self):
        v = PayoffPoint(0.0, 0.0)
        assert line_side(PayoffPoint(1.0, 1.0 + 1e-12), v) is Side.ON
        assert line_side(PayoffPoint(1.0, 1.0 + 1e-6), v, tol=1e-9) is Side.LEFT

    def test_mix_points_endpoints_and_midpoint(self):
        L = PayoffPoint(0.0, 2.0)
        R = PayoffPoint(2.0, 0.0)
        assert mix_points(L, R, 1.0) == L
        assert mix_points(L, R, 0.0) == R
        mid = mix_points(L, R, 0.5)
        assert (mid.p1, mid.p2) == (1.0, 1.0)

    def test_mix_points_near_diagonal(self):
        m = mix_points(PayoffPoint(79.6, 77.7), PayoffPoint(77.7, 79.6), 0.5)
        assert m.p1 == pytest.approx(78.65, abs=1e-12)
        assert m.p2 == pytest.approx(78.65, abs=1e-12)

    def test_advantage_minimum(self):
        adv = PayoffPoint(5.0, 4.0).advantage_over(PayoffPoint(2.0, 1.0))
        assert adv.minimum() == 3.0


point = st.tuples(
    st.floats(-100, 100, allow_nan=False), st.floats(-100, 100, allow_nan=False)
).map(lambda t: PayoffPoint(*t))


@given(point, point, st.floats(0.0, 1.0))
def test_mix_points_stays_in_box(L, R, lam):
    m = mix_points(L, R, lam)
    lo1, hi1 = sorted((L.p1, R.p1))
    lo2, hi2 = sorted((L.p2, R.p2))
    assert lo1 - 1e-9 <= m.p1 <= hi1 + 1e-9
    assert lo2 - 1e-9 <= m.p2 <= hi2 + 1e-9


@given(point, point, st.floats(-50, 50))
def test_egal_value_translation_invariant(x, v, c):
    shifted = egal_value(PayoffPoint(x.p1 + c, x.p2 + c), PayoffPoint(v.p1 + c, v.p2 + c))
    assert shifted == pytest.approx(egal_value(x, v), abs=1e-7)


@given(point, point)
def test_egal_value_bounded_by_each_advantage(x, v):
    e = egal_value(x, v)
    assert e <= x.p1 - v.p1 + 1e-12
    assert e <= x.p2 - v.p2 + 1e-12


@given(point, point)
def test_line_side_matches_advantage_order(x, v):
    adv1, adv2 = x.p1 - v.p1, x.p2 - v.p2
    side = line_side(x, v, tol=1e-9)
    if side is Side.RIGHT:
        assert adv1 > adv2
    elif side is Side.LEFT:
        assert adv2 > adv1
    else:
        assert abs(adv1 - adv2) <= 1e-9 * max(1.0, abs(adv1), abs(adv2)) + 1e-9


@settings(deadline=None, max_examples=25)
@given(st.integers(0, 10_000))
def test_evaluate_joint_matches_oracle(seed):
    rng = np.random.default_rng(seed)
    g = random_game(rng, 3, 2, 2, float(rng.uniform(0.0, 0.95)))
    a1 = tuple(int(a) for a in rng.integers(0, 2, 3))
    a2 = tuple(int(a) for a in rng.integers(0, 2, 3))
    got = evaluate_joint(g, JointPolicy(a1, a2))
    want = eval_pure_joint(g, a1, a2)
    assert got.p1 == pytest.approx(want[0], abs=1e-8)
    assert got.p2 == pytest.approx(want[1], abs=1e-8)


class TestValidation:
    def base_kwargs(self):
        return dict(
            n_states=2,
            n_actions1=2,
            n_actions2=2,
            rewards1=np.zeros((2, 2, 2)),
            rewards2=np.zeros((2, 2, 2)),
            transitions=np.tile(np.array([[1.0, 0.0]]), (8, 1)),
            gamma=0.5,
            start=0,
            terminal=np.array([False, False]),
        )

    def test_reward_shape_mismatch(self):
        kw = self.base_kwargs()
        kw["rewards1"] = np.zeros((2, 2, 3))
        with pytest.raises(GameError):
            StochasticGame(**kw)

    def test_transition_rows_must_be_distributions(self):
        kw = self.base_kwargs()
        T = kw["transitions"].copy()
        T[3] = [0.7, 0.7]
        kw["transitions"] = T
        with pytest.raises(GameError):
            StochasticGame(**kw)

    def test_gamma_range(self):
        kw = self.base_kwargs()
        kw["gamma"] = 1.0
        with pytest.raises(GameError):
            StochasticGame(**kw)

    def test_start_out_of_range(self):
        kw = self.base_kwargs()
        kw["start"] = 5
        with pytest.raises(GameError):
            StochasticGame(**kw)

    def test_mixed_policy_rows_must_be_distributions(self):
        with pytest.raises(GameError):
            MixedPolicy(player=1, probs=np.array([[0.5, 0.6]]))

    def test_mixed_policy_zero_row_means_undefined(self):
        m = MixedPolicy(player=1, probs=np.array([[0.0, 0.0], [1.0, 0.0]]))
        assert not m.defined(0)
        assert m.defined(1)

    def test_joint_policy_sentinel(self):
        pi = JointPolicy.from_mapping(3, {1: (0, 1)})
        assert not pi.defined(0)
        assert pi.defined(1)
        assert pi.actions1[0] == -1


def test_json_round_trip():
    rng = np.random.default_rng(42)
    g = random_game(rng, 3, 2, 3, 0.85)
    back = game_from_json(game_to_json(g))
    assert back.n_states == g.n_states
    assert back.gamma == g.gamma
    assert back.start == g.start
    np.testing.assert_array_equal(back.rewards1, g.rewards1)
    np.testing.assert_array_equal(back.rewards2, g.rewards2)
    np.testing.assert_array_equal(back.terminal, g.terminal)
    np.testing.assert_allclose(
        back.transitions.toarray(), g.transitions.toarray(), atol=1e-15
    )


def test_payoff_bound_dominates_rewards():
    rng = np.random.default_rng(5)
    g = random_game(rng, 3, 2, 2, 0.9)
    bound = g.payoff_bound()
    assert bound >= np.abs(g.rewards1).max() / (1 - g.gamma) - 1e-12
    assert bound >= np.abs(g.rewards2).max() / (1 - g.gamma) - 1e-12

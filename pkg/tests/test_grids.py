"""Map parsing, rendering, and compilation tests for the gridworld frontend."""

from __future__ import annotations

import numpy as np
import pytest

from folkegal import (
    BUILTIN_NAMES,
    GridSpec,
    ParseError,
    builtin_game,
    compile_grid,
    parse_grid,
    render_grid,
    solve_mdp_w,
)
from folkegal.grids import ACTION_NAMES, MAX_CELLS, N_ACTIONS

# action indices, for readability below
N, S, E, W, STAND = range(5)


class TestParse:
    def test_minimal_single_pawn_map(self):
        spec = parse_grid("A.1\n")
        assert (spec.width, spec.height) == (3, 1)
        assert spec.start_a == (0, 0)
        assert spec.start_b is None
        assert spec.goals == frozenset({((0, 2), "A")})
        assert spec.gamma == 0.95
        assert spec.step_cost == -1.0
        assert spec.goal_reward == 100.0

    def test_two_pawn_map_with_headers(self):
        spec = parse_grid("gamma: 0.9\nstep_cost: -2\n\nA.B\n")
        assert spec.gamma == 0.9
        assert spec.step_cost == -2.0
        assert spec.start_b == (0, 2)

    def test_semi_wall_edge(self):
        spec = parse_grid("A:1\n")
        assert spec.width == 2
        assert spec.semi_walls == frozenset({(((0, 0)), (0, 1))})

    def test_start_b_header_may_sit_on_a_goal(self):
        spec = parse_grid("start_b: 0,2\n\nA.1\n")
        assert spec.start_b == (0, 2)
        assert ((0, 2), "A") in spec.goals

    @pytest.mark.parametrize(
        "text, line, col",
        [
            ("A.X\n", 1, 3),
            ("A.\n...\n", 2, 3),
            (":A1\n", 1, 1),
            ("A1:\n", 1, 3),
            ("A.1\nA..\n", 2, 1),
        ],
    )
    def test_errors_carry_position(self, text, line, col):
        with pytest.raises(ParseError) as exc:
            parse_grid(text)
        assert exc.value.line == line
        assert exc.value.col == col

    def test_missing_start_a(self):
        with pytest.raises(ParseError, match="missing start 'A'"):
            parse_grid("..1\n")

    def test_unknown_header_key(self):
        with pytest.raises(ParseError, match="unknown header key"):
            parse_grid("speed: 3\n\nA.1\n")

    def test_bad_start_header_format(self):
        with pytest.raises(ParseError, match="wants 'row,col'"):
            parse_grid("start_b: nope\n\nA.1\n")

    def test_duplicate_header(self):
        with pytest.raises(ParseError, match="duplicate header"):
            parse_grid("gamma: 0.9\ngamma: 0.8\n\nA.1\n")

    def test_start_on_wall_rejected(self):
        with pytest.raises(ValueError, match="wall"):
            parse_grid("start_b: 0,1\n\nA#.\n")

    def test_cell_budget_enforced(self):
        with pytest.raises(ValueError, match="cells"):
            parse_grid("A" + "." * MAX_CELLS + "\n")


class TestRender:
    @pytest.mark.parametrize("name", BUILTIN_NAMES)
    def test_round_trip_builtins(self, name):
        spec = builtin_game(name)
        assert parse_grid(render_grid(spec)) == spec

    def test_round_trip_preserves_semi_walls(self):
        spec = parse_grid("A:.\n.:1\n")
        assert parse_grid(render_grid(spec)) == spec

    def test_vertical_semi_wall_unrepresentable(self):
        spec = GridSpec(
            width=1,
            height=2,
            semi_walls=frozenset({((0, 0), (1, 0))}),
            start_a=(0, 0),
        )
        with pytest.raises(ValueError):
            render_grid(spec)


class TestCompileBasics:
    def test_builtin_state_counts(self, boards):
        # two-pawn boards have E*(E-1)+1 states for E open cells
        want = {
            "coordination": 31,
            "chicken": 73,
            "prisoners_dilemma": 91,
            "compromise": 31,
            "asymmetric": 57,
        }
        for name, game in boards.items():
            assert game.n_states == want[name], name
            assert game.n_actions1 == N_ACTIONS
            assert game.terminal[-1]
            assert game.terminal.sum() == 1

    def test_compile_is_deterministic(self):
        spec = builtin_game("chicken")
        g1, g2 = compile_grid(spec), compile_grid(spec)
        np.testing.assert_array_equal(g1.rewards1, g2.rewards1)
        assert (g1.transitions != g2.transitions).nnz == 0
        assert g1.start == g2.start

    def test_single_pawn_two_step_value(self):
        # two moves east: -1 + 0.95 * (-1 + 0.95 * 100)
        game = compile_grid(parse_grid("A.1\n"))
        sol = solve_mdp_w(game, 1.0, 1e-6)
        assert sol.payoff.p1 == pytest.approx(88.3, abs=1e-6)
        assert sol.payoff.p2 == pytest.approx(0.0, abs=1e-9)

    def test_action_names_attached(self, boards):
        assert boards["coordination"].action_names1 == ACTION_NAMES


def state_table(spec):
    """Reconstruct compile_grid's documented state order: ordered cell pairs."""
    cells = spec.open_cells
    if spec.start_b is None:
        states = [(a, None) for a in cells]
    else:
        states = [(a, b) for a in cells for b in cells if a != b]
    return states, {s: i for i, s in enumerate(states)}


class TestMovement:
    def test_goal_entry_scores_and_terminates(self):
        spec = parse_grid("A1\n")
        game = compile_grid(spec)
        states, sid = state_table(spec)
        s = sid[((0, 0), None)]
        flat = (s * N_ACTIONS + E) * N_ACTIONS + STAND
        # step cost plus gamma-discounted goal bonus, paid on entry
        assert game.rewards1[s, E, STAND] == pytest.approx(-1 + 0.95 * 100)
        row = game.transitions.toarray()[flat]
        assert row[game.n_states - 1] == 1.0

    def test_other_players_goal_is_inert(self):
        spec = parse_grid("A2\n")
        game = compile_grid(spec)
        states, sid = state_table(spec)
        s = sid[((0, 0), None)]
        assert game.rewards1[s, E, STAND] == pytest.approx(-1.0)
        row = game.transitions.toarray()[(s * N_ACTIONS + E) * N_ACTIONS + STAND]
        assert row[sid[((0, 1), None)]] == 1.0

    def test_semi_wall_passes_half_the_time(self):
        spec = parse_grid("A:1\n")
        game = compile_grid(spec)
        states, sid = state_table(spec)
        s = sid[((0, 0), None)]
        assert game.rewards1[s, E, STAND] == pytest.approx(-1 + 0.5 * 0.95 * 100)
        row = game.transitions.toarray()[(s * N_ACTIONS + E) * N_ACTIONS + STAND]
        assert row[game.n_states - 1] == pytest.approx(0.5)
        assert row[s] == pytest.approx(0.5)

    def test_wall_and_border_bounce(self):
        spec = parse_grid("A#\n")
        game = compile_grid(spec)
        states, sid = state_table(spec)
        s = sid[((0, 0), None)]
        T = game.transitions.toarray()
        for a in (N, S, E, W):
            row = T[(s * N_ACTIONS + a) * N_ACTIONS + STAND]
            assert row[s] == 1.0

    def test_standing_still_is_free(self):
        spec = parse_grid("A.1\n")
        game = compile_grid(spec)
        states, sid = state_table(spec)
        s = sid[((0, 0), None)]
        assert game.rewards1[s, STAND, STAND] == 0.0
        assert game.rewards1[s, E, STAND] == -1.0

    def test_shared_target_coin_flip(self):
        spec = parse_grid("A.B\n")
        game = compile_grid(spec)
        states, sid = state_table(spec)
        s = sid[((0, 0), (0, 2))]
        assert game.start == s
        T = game.transitions.toarray()
        row = T[(s * N_ACTIONS + E) * N_ACTIONS + W]
        assert row[sid[((0, 1), (0, 2))]] == pytest.approx(0.5)
        assert row[sid[((0, 0), (0, 1))]] == pytest.approx(0.5)

    def test_head_on_swap_blocked(self):
        spec = parse_grid("AB.\n")
        game = compile_grid(spec)
        states, sid = state_table(spec)
        s = sid[((0, 0), (0, 1))]
        T = game.transitions.toarray()
        row = T[(s * N_ACTIONS + E) * N_ACTIONS + W]
        assert row[s] == 1.0

    def test_bounce_off_stationary_pawn(self):
        spec = parse_grid("AB.\n")
        game = compile_grid(spec)
        states, sid = state_table(spec)
        s = sid[((0, 0), (0, 1))]
        T = game.transitions.toarray()
        row = T[(s * N_ACTIONS + E) * N_ACTIONS + STAND]
        assert row[s] == 1.0

    def test_entering_a_vacated_cell(self):
        spec = parse_grid("AB.\n")
        game = compile_grid(spec)
        states, sid = state_table(spec)
        s = sid[((0, 0), (0, 1))]
        T = game.transitions.toarray()
        row = T[(s * N_ACTIONS + E) * N_ACTIONS + E]
        assert row[sid[((0, 1), (0, 2))]] == 1.0

    def test_simultaneous_private_goals(self):
        spec = parse_grid("1A.B2\n")
        game = compile_grid(spec)
        states, sid = state_table(spec)
        s = sid[((0, 1), (0, 3))]
        assert game.rewards1[s, W, E] == pytest.approx(-1 + 0.95 * 100)
        assert game.rewards2[s, W, E] == pytest.approx(-1 + 0.95 * 100)
        row = game.transitions.toarray()[(s * N_ACTIONS + W) * N_ACTIONS + E]
        assert row[game.n_states - 1] == 1.0

    def test_both_pawns_pay_their_own_step_cost(self):
        spec = parse_grid("A.B\n")
        game = compile_grid(spec)
        states, sid = state_table(spec)
        s = sid[((0, 0), (0, 2))]
        assert game.rewards1[s, E, STAND] == -1.0
        assert game.rewards2[s, E, STAND] == 0.0
        assert game.rewards2[s, STAND, W] == -1.0


def mirror_columns(width):
    return lambda cell: (cell[0], width - 1 - cell[1])


def mirror_rows(height):
    return lambda cell: (height - 1 - cell[0], cell[1])


_EW_SWAP = np.array([N, S, W, E, STAND])
_NS_SWAP = np.array([S, N, E, W, STAND])


@pytest.mark.parametrize(
    "name, axis, perm",
    [
        ("coordination", "cols", _EW_SWAP),
        ("prisoners_dilemma", "cols", _EW_SWAP),
        ("compromise", "cols", _EW_SWAP),
        ("chicken", "rows", _NS_SWAP),
    ],
)
def test_player_swap_isomorphism(name, axis, perm, boards):
    """Each symmetric board maps onto itself under pawn swap + board mirror.

    The check is exhaustive over the compiled arrays: player 1's reward table
    equals player 2's under the state/action relabeling, and the transition
    kernel commutes with it.  This is the structural fact behind the
    symmetric benchmark targets.
    """
    spec = builtin_game(name)
    game = boards[name]
    mirror = mirror_columns(spec.width) if axis == "cols" else mirror_rows(spec.height)
    states, sid = state_table(spec)
    n = len(states)
    sigma = np.empty(game.n_states, dtype=int)
    for i, (a, b) in enumerate(states):
        sigma[i] = sid[(mirror(b), mirror(a))]
    sigma[n] = n  # terminal maps to itself
    assert sigma[game.start] == game.start

    r1, r2 = game.rewards1, game.rewards2
    np.testing.assert_allclose(
        r1, r2[np.ix_(sigma, perm, perm)].transpose(0, 2, 1), atol=1e-12
    )
    T = game.transitions.toarray().reshape(game.n_states, N_ACTIONS, N_ACTIONS, -1)
    np.testing.assert_allclose(
        T,
        T[np.ix_(sigma, perm, perm, sigma)].transpose(0, 2, 1, 3),
        atol=1e-12,
    )


def test_chicken_has_semi_walls():
    spec = builtin_game("chicken")
    assert len(spec.semi_walls) == 2


def test_asymmetric_board_parameters():
    spec = builtin_game("asymmetric")
    assert spec.step_cost == -10.0
    assert spec.start_b == (0, 6)
    assert spec.gamma == 0.95


def test_builtin_unknown_name():
    with pytest.raises(ValueError, match="unknown builtin"):
        builtin_game("checkers")

"""ASCII grid-game parser and compiler.

Two pawns, A and B, occupy distinct cells of a small rectangular grid and
simultaneously pick one of five actions (N, S, E, W, stand).  Moves are
deterministic except for two sources of randomness: a *semi-passable wall*
on an edge lets the mover through with probability 1/2 per attempt, and two
pawns stepping into the same empty cell are resolved by a fair coin (the
loser stays put).  Pawns never pass through walls or through each other.
Each compass move costs ``step_cost`` whether or not it succeeds; ``stand``
is free.  A pawn *entering* one of its own goal cells (or a shared goal)
ends the game and earns ``goal_reward``; simultaneous entries on distinct
cells pay both pawns.  Standing on a goal at the start of a step neither
scores nor blocks the game from continuing.

The reward tables fold the terminal bonus into the entering step as
``step_cost + gamma * goal_reward * P(enter)``, i.e. the bonus is banked one
tick after the move that wins it.  This matches the benchmark payoff tables
(e.g. a one-step score at gamma=0.95, cost -10 is worth -10 + 0.95*100 = 85).

Map format (see also ``parse_grid``):

* optional ``key: value`` header lines, then the map rows;
* cell characters: ``#`` wall, ``.`` empty, ``A``/``B`` starts,
  ``1``/``2`` private goals, ``$`` shared goal;
* a ``:`` between two cells of a row marks a semi-passable edge
  (vertical semi-edges have no text form and are data-only);
* header keys: ``gamma``, ``step_cost``, ``goal_reward``, ``start_a``,
  ``start_b`` (``row,col``, zero-based) for starts that sit on goal cells.

Coordinates are ``(row, col)`` with row 0 at the top.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator

import numpy as np
from scipy import sparse

from .games import StochasticGame

__all__ = [
    "MAX_CELLS",
    "BUILTIN_NAMES",
    "Cell",
    "GridSpec",
    "GridState",
    "ParseError",
    "parse_grid",
    "render_grid",
    "compile_grid",
    "builtin_game",
]

MAX_CELLS = 64

Cell = tuple[int, int]

#: Action order used everywhere: index 0..4.
ACTION_NAMES = ("N", "S", "E", "W", "stand")
_DELTAS = ((-1, 0), (1, 0), (0, 1), (0, -1), (0, 0))
N_ACTIONS = 5

_WALL, _EMPTY = "#", "."
_GOAL_CHARS = {"1": "A", "2": "B", "$": "shared"}
_OWNER_CHARS = {v: k for k, v in _GOAL_CHARS.items()}
_HEADER_RE = re.compile(r"^([a-z_][a-z0-9_]*)\s*:\s*(\S.*?)\s*$")
_NUMERIC_KEYS = {"gamma", "step_cost", "goal_reward"}
_START_KEYS = {"start_a", "start_b"}


class ParseError(ValueError):
    """Map-text rejection carrying a 1-based ``line``/``col`` position."""

    def __init__(self, message: str, line: int, col: int) -> None:
        super().__init__(f"{message} (line {line}, column {col})")
        self.message = message
        self.line = line
        self.col = col


def _canonical_edge(a: Cell, b: Cell) -> tuple[Cell, Cell]:
    return (a, b) if a <= b else (b, a)


@dataclass(frozen=True)
class GridSpec:
    """A validated grid-game description (geometry plus scalar parameters).

    ``walls`` are blocked cells, ``semi_walls`` canonical pairs of adjacent
    open cells, ``goals`` pairs of ``(cell, owner)`` with owner one of
    ``"A"``, ``"B"``, ``"shared"``.  ``start_b`` may be ``None``: the game
    then has a single pawn and player 2 is a costless spectator.
    """

    width: int
    height: int
    walls: frozenset[Cell] = frozenset()
    semi_walls: frozenset[tuple[Cell, Cell]] = frozenset()
    start_a: Cell = (0, 0)
    start_b: Cell | None = None
    goals: frozenset[tuple[Cell, str]] = frozenset()
    step_cost: float = -1.0
    goal_reward: float = 100.0
    gamma: float = 0.95

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ValueError("grid dimensions must be positive")
        if self.width * self.height > MAX_CELLS:
            raise ValueError(
                f"grid has {self.width * self.height} cells; limit is {MAX_CELLS}"
            )
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError("gamma must lie in [0, 1)")
        for cell in self.walls:
            self._check_bounds(cell, "wall")
        starts = [("A", self.start_a)]
        if self.start_b is not None:
            starts.append(("B", self.start_b))
            if self.start_b == self.start_a:
                raise ValueError("starts must be distinct cells")
        for label, cell in starts:
            self._check_bounds(cell, f"start {label}")
            if cell in self.walls:
                raise ValueError(f"start {label} sits on a wall at {cell}")
        owners = set()
        for cell, owner in self.goals:
            self._check_bounds(cell, "goal")
            if cell in self.walls:
                raise ValueError(f"goal on a wall at {cell}")
            if owner not in ("A", "B", "shared"):
                raise ValueError(f"unknown goal owner {owner!r}")
            owners.add((cell, owner))
        for a, b in self.semi_walls:
            self._check_bounds(a, "semi-wall cell")
            self._check_bounds(b, "semi-wall cell")
            if (a, b) != _canonical_edge(a, b):
                raise ValueError("semi-wall pairs must be stored in sorted order")
            if abs(a[0] - b[0]) + abs(a[1] - b[1]) != 1:
                raise ValueError(f"semi-wall between non-adjacent cells {a} and {b}")
            if a in self.walls or b in self.walls:
                raise ValueError("semi-wall touches a wall cell")

    def _check_bounds(self, cell: Cell, what: str) -> None:
        r, c = cell
        if not (0 <= r < self.height and 0 <= c < self.width):
            raise ValueError(f"{what} out of bounds at {cell}")

    @property
    def open_cells(self) -> list[Cell]:
        """All non-wall cells in row-major order."""
        return [
            (r, c)
            for r in range(self.height)
            for c in range(self.width)
            if (r, c) not in self.walls
        ]

    def goal_owners(self, cell: Cell) -> frozenset[str]:
        return frozenset(owner for c, owner in self.goals if c == cell)


@dataclass(frozen=True)
class GridState:
    """Pawn positions, or the absorbing terminal marker.

    ``pos_b`` is ``None`` both in single-pawn games and at the terminal.
    """

    pos_a: Cell | None
    pos_b: Cell | None = None
    terminal: bool = False

    def __post_init__(self) -> None:
        if self.terminal:
            if self.pos_a is not None or self.pos_b is not None:
                raise ValueError("terminal state carries no positions")
        elif self.pos_a is None:
            raise ValueError("non-terminal state needs a position for A")
        elif self.pos_b is not None and self.pos_b == self.pos_a:
            raise ValueError("pawns must occupy distinct cells")


TERMINAL_STATE = GridState(None, None, terminal=True)


# ---------------------------------------------------------------------------
# parsing / rendering


def _parse_row(line: str, lineno: int, want_cells: int | None):
    """Split one map line into cell chars and within-row semi-edge flags."""
    cells: list[tuple[str, int]] = []  # (char, 1-based column)
    semis: list[int] = []  # semi between cell index i and i+1
    expect_cell = True
    for col, ch in enumerate(line, start=1):
        if expect_cell:
            if ch == ":":
                raise ParseError("semi-wall marker needs a cell on each side", lineno, col)
            if ch not in _GOAL_CHARS and ch not in (_WALL, _EMPTY, "A", "B"):
                raise ParseError(f"unknown map character {ch!r}", lineno, col)
            cells.append((ch, col))
            expect_cell = False
        elif ch == ":":
            semis.append(len(cells) - 1)
            expect_cell = True
        else:
            # plain adjacency: this char starts the next cell
            if ch not in _GOAL_CHARS and ch not in (_WALL, _EMPTY, "A", "B"):
                raise ParseError(f"unknown map character {ch!r}", lineno, col)
            cells.append((ch, col))
    if expect_cell and cells:
        raise ParseError("semi-wall marker needs a cell on each side", lineno, len(line))
    if want_cells is not None and len(cells) != want_cells:
        raise ParseError(
            f"expected {want_cells} cells in this row, found {len(cells)}",
            lineno,
            len(line),
        )
    return cells, semis


def _parse_start(value: str, key: str, lineno: int) -> Cell:
    m = re.fullmatch(r"\s*(-?\d+)\s*,\s*(-?\d+)\s*", value)
    if m is None:
        raise ParseError(f"{key} wants 'row,col'", lineno, 1)
    return (int(m.group(1)), int(m.group(2)))


def parse_grid(text: str) -> GridSpec:
    """Parse the documented ASCII map format into a validated GridSpec.

    Raises :class:`ParseError` (with 1-based line/column) on unknown
    characters, ragged rows, duplicate or missing starts, and malformed
    headers.  Geometry violations surfaced by GridSpec validation are
    re-raised as plain ``ValueError``.
    """
    headers: dict[str, str] = {}
    header_lines: dict[str, int] = {}
    rows: list[list[tuple[str, int]]] = []
    row_semis: list[list[int]] = []
    map_lines: list[int] = []
    in_map = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip()
        if not line.strip():
            if in_map:
                in_map = False  # blank line closes the map block
            continue
        m = _HEADER_RE.match(line)
        if m and not rows and not in_map:
            key, value = m.group(1), m.group(2)
            if key not in _NUMERIC_KEYS | _START_KEYS:
                raise ParseError(f"unknown header key {key!r}", lineno, 1)
            if key in headers:
                raise ParseError(f"duplicate header {key!r}", lineno, 1)
            headers[key] = value
            header_lines[key] = lineno
            continue
        if rows and not in_map:
            raise ParseError("content after the map block", lineno, 1)
        in_map = True
        want = len(rows[0]) if rows else None
        cells, semis = _parse_row(line, lineno, want)
        rows.append(cells)
        row_semis.append(semis)
        map_lines.append(lineno)
    if not rows:
        raise ParseError("no map rows found", max(len(text.splitlines()), 1), 1)

    height, width = len(rows), len(rows[0])
    walls: set[Cell] = set()
    goals: set[tuple[Cell, str]] = set()
    starts: dict[str, tuple[Cell, int, int]] = {}
    for r, cells in enumerate(rows):
        for c, (ch, col) in enumerate(cells):
            lineno = map_lines[r]
            if ch == _WALL:
                walls.add((r, c))
            elif ch in _GOAL_CHARS:
                goals.add(((r, c), _GOAL_CHARS[ch]))
            elif ch in ("A", "B"):
                if ch in starts:
                    raise ParseError(f"duplicate start {ch!r}", lineno, col)
                starts[ch] = ((r, c), lineno, col)

    semi_walls: set[tuple[Cell, Cell]] = set()
    for r, semis in enumerate(row_semis):
        for i in semis:
            semi_walls.add(_canonical_edge((r, i), (r, i + 1)))

    def start_from(key: str, char: str) -> Cell | None:
        if key in headers:
            if char in starts:
                raise ParseError(
                    f"start {char!r} given both in the map and as a header",
                    header_lines[key],
                    1,
                )
            return _parse_start(headers[key], key, header_lines[key])
        if char in starts:
            return starts[char][0]
        return None

    start_a = start_from("start_a", "A")
    if start_a is None:
        raise ParseError("missing start 'A'", map_lines[-1], 1)
    start_b = start_from("start_b", "B")

    numbers = {}
    for key in _NUMERIC_KEYS:
        if key in headers:
            try:
                numbers[key] = float(headers[key])
            except ValueError:
                raise ParseError(
                    f"header {key!r} wants a number, got {headers[key]!r}",
                    header_lines[key],
                    1,
                ) from None
    return GridSpec(
        width=width,
        height=height,
        walls=frozenset(walls),
        semi_walls=frozenset(semi_walls),
        start_a=start_a,
        start_b=start_b,
        goals=frozenset(goals),
        **numbers,
    )


def render_grid(spec: GridSpec) -> str:
    """Inverse of :func:`parse_grid` for specs the text format can express.

    Starts that sit on goal cells are emitted as headers; vertical
    semi-walls have no textual form and raise ``ValueError``.
    """
    for a, b in spec.semi_walls:
        if a[0] != b[0]:
            raise ValueError(
                f"vertical semi-wall {a}-{b} has no text form; keep such specs as data"
            )
    goal_at = {cell: owner for cell, owner in spec.goals}
    char = {}
    for r in range(spec.height):
        for c in range(spec.width):
            cell = (r, c)
            if cell in spec.walls:
                char[cell] = _WALL
            elif cell in goal_at:
                char[cell] = _OWNER_CHARS[goal_at[cell]]
            else:
                char[cell] = _EMPTY
    lines = []
    for key, default in (("gamma", 0.95), ("step_cost", -1.0), ("goal_reward", 100.0)):
        value = getattr(spec, key)
        if value != default:
            lines.append(f"{key}: {value:g}")
    for key, cell in (("start_a", spec.start_a), ("start_b", spec.start_b)):
        if cell is None:
            continue
        if cell in goal_at:
            lines.append(f"{key}: {cell[0]},{cell[1]}")
        else:
            char[cell] = "A" if key == "start_a" else "B"
    semi_cols = {
        (a[0], a[1]): True for a, b in spec.semi_walls
    }  # keyed by the left cell
    for r in range(spec.height):
        parts = []
        for c in range(spec.width):
            parts.append(char[(r, c)])
            if c + 1 < spec.width and semi_cols.get((r, c)):
                parts.append(":")
        lines.append("".join(parts))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# compilation


def _move_branches(
    spec: GridSpec, pos: Cell, action: int
) -> list[tuple[Cell, float]]:
    """Resolve one pawn's intent against walls, edges and semi-walls."""
    dr, dc = _DELTAS[action]
    target = (pos[0] + dr, pos[1] + dc)
    r, c = target
    if (dr, dc) == (0, 0):
        return [(pos, 1.0)]
    if not (0 <= r < spec.height and 0 <= c < spec.width) or target in spec.walls:
        return [(pos, 1.0)]
    if _canonical_edge(pos, target) in spec.semi_walls:
        return [(target, 0.5), (pos, 0.5)]
    return [(target, 1.0)]


def _settle(ca: Cell, cb: Cell, ta: Cell, tb: Cell) -> list[tuple[Cell, Cell, float]]:
    """Resolve the two pawns' post-semi targets into final positions.

    Targets here have already survived wall/bounds/semi checks, so a target
    equal to the pawn's own cell means "not moving".  A pawn may enter the
    cell the other pawn is vacating, but not trade places with it head-on.
    """
    if ta == cb and tb == ca:
        return [(ca, cb, 1.0)]  # head-on swap: nobody passes through
    if ta == tb:
        if ta == ca or tb == cb:
            return [(ca, cb, 1.0)]  # mover bounces off the stationary pawn
        return [(ta, cb, 0.5), (ca, tb, 0.5)]  # shared target: coin flip
    return [(ta, tb, 1.0)]


def _scores(spec: GridSpec, old: Cell, new: Cell, player: str) -> bool:
    if new == old:
        return False
    owners = spec.goal_owners(new)
    return player in owners or "shared" in owners


def _joint_outcomes(
    spec: GridSpec, ca: Cell, cb: Cell, a1: int, a2: int
) -> Iterator[tuple[Cell, Cell, float]]:
    for ta, pa in _move_branches(spec, ca, a1):
        for tb, pb in _move_branches(spec, cb, a2):
            for na, nb, ps in _settle(ca, cb, ta, tb):
                yield na, nb, pa * pb * ps


def compile_grid(spec: GridSpec) -> StochasticGame:
    """Compile a GridSpec into a StochasticGame over ordered position pairs.

    States are all ordered pairs of distinct open cells (row-major in both
    coordinates) plus one absorbing terminal; with no B pawn the states are
    just A's cells.  The construction is deterministic: identical specs
    yield bit-identical games.
    """
    cells = spec.open_cells
    index = {cell: i for i, cell in enumerate(cells)}
    if spec.start_a not in index:
        raise ValueError("start A is not an open cell")
    phantom = spec.start_b is None
    if not phantom and spec.start_b not in index:
        raise ValueError("start B is not an open cell")

    if phantom:
        states: list[tuple[Cell, Cell | None]] = [(c, None) for c in cells]
    else:
        states = [(a, b) for a in cells for b in cells if a != b]
    state_id = {s: i for i, s in enumerate(states)}
    n_states = len(states) + 1
    terminal = n_states - 1

    gamma = spec.gamma
    bonus = gamma * spec.goal_reward
    rewards1 = np.zeros((n_states, N_ACTIONS, N_ACTIONS))
    rewards2 = np.zeros_like(rewards1)
    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []

    def flat(s: int, a1: int, a2: int) -> int:
        return (s * N_ACTIONS + a1) * N_ACTIONS + a2

    for s, (ca, cb) in enumerate(states):
        for a1 in range(N_ACTIONS):
            move_cost1 = spec.step_cost if a1 != 4 else 0.0
            for a2 in range(N_ACTIONS):
                r1 = move_cost1
                r2 = 0.0 if phantom or a2 == 4 else spec.step_cost
                dest: dict[int, float] = {}
                if phantom:
                    outcomes = (
                        (na, None, p) for na, p in _move_branches(spec, ca, a1)
                    )
                else:
                    outcomes = _joint_outcomes(spec, ca, cb, a1, a2)
                for na, nb, p in outcomes:
                    if p == 0.0:
                        continue
                    sa = _scores(spec, ca, na, "A")
                    sb = (not phantom) and _scores(spec, cb, nb, "B")
                    if sa:
                        r1 += p * bonus
                    if sb:
                        r2 += p * bonus
                    nxt = terminal if (sa or sb) else state_id[(na, nb)]
                    dest[nxt] = dest.get(nxt, 0.0) + p
                rewards1[s, a1, a2] = r1
                rewards2[s, a1, a2] = r2
                f = flat(s, a1, a2)
                for nxt in sorted(dest):
                    rows.append(f)
                    cols.append(nxt)
                    vals.append(dest[nxt])
    for a1 in range(N_ACTIONS):
        for a2 in range(N_ACTIONS):
            rows.append(flat(terminal, a1, a2))
            cols.append(terminal)
            vals.append(1.0)

    transitions = sparse.csr_matrix(
        (vals, (rows, cols)),
        shape=(n_states * N_ACTIONS * N_ACTIONS, n_states),
    )
    start = state_id[(spec.start_a, None if phantom else spec.start_b)]
    terminal_mask = np.zeros(n_states, dtype=bool)
    terminal_mask[terminal] = True

    def name(state: tuple[Cell, Cell | None]) -> str:
        a, b = state
        return f"A{a}" if b is None else f"A{a}|B{b}"

    return StochasticGame(
        n_states=n_states,
        n_actions1=N_ACTIONS,
        n_actions2=N_ACTIONS,
        rewards1=rewards1,
        rewards2=rewards2,
        transitions=transitions,
        gamma=gamma,
        start=start,
        terminal=terminal_mask,
        state_names=tuple(name(s) for s in states) + ("terminal",),
        action_names1=ACTION_NAMES,
        action_names2=ACTION_NAMES,
    )


# ---------------------------------------------------------------------------
# benchmark games
#
# The five boards are reconstructions: the original figures survive only as
# prose, so each layout below is reverse-engineered from the described
# strategies and the published payoff tables, and the docstring of
# ``builtin_game`` records the defining constraints per board.

_BUILTIN_TEXT = {
    # Mirror-image private goals; players cross the open row without
    # colliding and score simultaneously in three moves.
    "coordination": """\
2.1
A.B
""",
    # One shared goal in the middle, two shared goals in the far column,
    # and semi-passable edges guarding each pawn's short side exit.  Both
    # prefer the two-move middle route via the shared choke cell.
    "chicken": """\
$.:A
.$.
$.:B
""",
    # Shared goal one move from each pawn (defect = race, coin flip),
    # private goals two moves away; cooperating means one pawn waits a turn
    # so both enter simultaneously.
    "prisoners_dilemma": """\
1...2
.A$B.
""",
    # A two-cell upper pocket over a four-cell corridor; each pawn stands
    # between the other and its goal, so progress requires stepping aside.
    "compromise": """\
#..#
2AB1
""",
    # Single corridor: B starts on A's near goal; A's far goal is a decoy
    # (B can trail one square behind and score first); the spare cell on
    # the right lets B step aside.  Larger step cost keeps loitering dear.
    "asymmetric": """\
step_cost: -10
start_b: 0,6

1.2..A1.
""",
}

BUILTIN_NAMES = tuple(sorted(_BUILTIN_TEXT))


def builtin_game(name: str) -> GridSpec:
    """Return the named benchmark board as a GridSpec.

    Known names: coordination, chicken, prisoners_dilemma, compromise,
    asymmetric.  All use gamma = 0.95 and goal reward 100; the step cost is
    -1 except for ``asymmetric`` (-10).
    """
    try:
        text = _BUILTIN_TEXT[name]
    except KeyError:
        raise ValueError(
            f"unknown builtin game {name!r}; choose from {', '.join(BUILTIN_NAMES)}"
        ) from None
    return parse_grid(text)

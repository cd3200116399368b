"""Command-line harness.

Four subcommands cover the benchmarking workflow:

* ``solve``     — run one solver on one game, print payoffs and diagnostics;
* ``oracle``    — brute-force feasible hull and egalitarian point (small games);
* ``simulate``  — Monte-Carlo playout of the constructed equilibrium profile;
* ``reproduce`` — all builtin boards x all solvers, as one comparison table.

Games come from ``--game`` (a builtin board name or a game JSON file) or
``--map`` (a gridworld map file).  ``--format`` selects human tables
(default), JSON validating :data:`folkegal.schemas.REPORT_SCHEMA`, or CSV
with a fixed column set per command.  Exit code 0 on success (including a
correlated solver that reports ``converged=false``); 2 on bad input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from .egalitarian import check_enforceable, folk_egal
from .games import GameError, PayoffPoint, StochasticGame, game_from_json
from .grids import BUILTIN_NAMES, ParseError, builtin_game, compile_grid, parse_grid
from .oracle import oracle_solve
from .simulate import DEVIATORS, simulate_profile
from .solvers import ce_vi, friend_vi, security_profile

__all__ = ["RunConfig", "main", "build_parser"]

SOLVERS = ("folkegal", "security", "friend", "ce")
FORMATS = ("table", "json", "csv")


@dataclass(frozen=True)
class RunConfig:
    """One resolved CLI invocation."""

    command: str
    game: str | None = None
    map_path: str | None = None
    solver: str = "folkegal"
    eps: float = 0.1
    max_sweeps: int | None = None
    seed: int = 0
    rounds: int = 10_000
    deviator: str = "none"
    cap: int = 1_000_000
    fmt: str = "table"
    out: str | None = None

    def __post_init__(self) -> None:
        if self.eps <= 0:
            raise GameError("eps must be positive")
        if self.fmt not in FORMATS:
            raise GameError(f"format must be one of {FORMATS}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="folkegal",
        description="Egalitarian-equilibrium solvers for two-player "
        "stochastic games.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, game_source: bool = True) -> None:
        if game_source:
            p.add_argument(
                "--game",
                help=f"builtin board ({', '.join(BUILTIN_NAMES)}) or a game "
                "JSON file",
            )
            p.add_argument("--map", dest="map_path", help="gridworld map file")
        p.add_argument("--eps", type=float, default=0.1)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--format", dest="fmt", choices=FORMATS, default="table")
        p.add_argument("--out", help="write the report to this path")

    p_solve = sub.add_parser("solve", help="run one solver on one game")
    common(p_solve)
    p_solve.add_argument("--solver", choices=SOLVERS, default="folkegal")
    p_solve.add_argument(
        "--max-sweeps",
        type=int,
        default=None,
        help="sweep budget for the correlated solver",
    )

    p_oracle = sub.add_parser(
        "oracle", help="brute-force hull and egalitarian point"
    )
    common(p_oracle)
    p_oracle.add_argument(
        "--cap",
        type=int,
        default=1_000_000,
        help="abort enumeration beyond this many policies",
    )

    p_sim = sub.add_parser("simulate", help="play out the equilibrium profile")
    common(p_sim)
    p_sim.add_argument("--rounds", type=int, default=10_000)
    p_sim.add_argument("--deviator", choices=DEVIATORS, default="none")

    p_rep = sub.add_parser(
        "reproduce", help="all builtin boards x all solvers"
    )
    common(p_rep, game_source=False)
    return parser


def _load_game(config: RunConfig) -> tuple[StochasticGame, str]:
    if (config.game is None) == (config.map_path is None):
        raise GameError("exactly one of --game and --map is required")
    if config.map_path is not None:
        path = Path(config.map_path)
        if not path.is_file():
            raise GameError(f"map file not found: {path}")
        return compile_grid(parse_grid(path.read_text())), path.stem
    name = config.game
    if name in BUILTIN_NAMES:
        return compile_grid(builtin_game(name)), name
    path = Path(name)
    if path.is_file():
        return game_from_json(path.read_text()), path.stem
    raise GameError(
        f"unknown game {name!r}: not a builtin "
        f"({', '.join(BUILTIN_NAMES)}) and not a file"
    )


def _pt(p: PayoffPoint | None) -> list[float] | None:
    return None if p is None else [float(p.p1), float(p.p2)]


# ---------------------------------------------------------------------------
# command implementations (each returns the JSON-shaped report dict)


def cmd_solve(config: RunConfig) -> dict:
    game, label = _load_game(config)
    report: dict = {
        "command": "solve",
        "game": label,
        "solver": config.solver,
        "eps": config.eps,
        "seed": config.seed,
        "converged": True,
        "mode": None,
        "lambda": None,
        "disagreement": None,
        "egalitarian": None,
        "enforceable": None,
        "trace": None,
        "guarantees": None,
        "ideal": None,
        "sweeps": None,
    }
    if config.solver == "folkegal":
        profile, trace = folk_egal(game, config.eps)
        enforce = check_enforceable(profile, config.eps)
        report.update(
            payoffs=_pt(profile.target),
            mode=profile.mode.value,
            **{"lambda": profile.left_weight},
            disagreement=_pt(profile.disagreement),
            egalitarian=profile.egalitarian,
            enforceable=enforce.as_dict(),
            trace={
                "iterations": len(trace),
                "stop_reason": trace.stop_reason,
                "nu0": trace.nu0,
                "cap": trace.cap,
                "weighted_solves": 2 + len(trace),
            },
        )
    elif config.solver == "security":
        sol = security_profile(game, config.eps)
        report.update(payoffs=_pt(sol.payoff), guarantees=_pt(sol.guarantees))
    elif config.solver == "friend":
        sol = friend_vi(game, config.eps)
        report.update(payoffs=_pt(sol.payoff), ideal=_pt(sol.ideal))
    else:
        kwargs = {} if config.max_sweeps is None else {"max_sweeps": config.max_sweeps}
        sol = ce_vi(game, config.eps, **kwargs)
        report.update(
            payoffs=_pt(sol.payoff), converged=sol.converged, sweeps=sol.sweeps
        )
    return report


def cmd_oracle(config: RunConfig) -> dict:
    game, label = _load_game(config)
    result = oracle_solve(game, config.eps, config.cap)
    return {
        "command": "oracle",
        "game": label,
        "eps": config.eps,
        "cap": config.cap,
        "n_policies": result.hull.n_policies,
        "vertices": [_pt(v) for v in result.hull.vertices],
        "disagreement": _pt(result.disagreement),
        "egal_point": _pt(result.egal_point),
        "egal_value": result.egal_value,
    }


def cmd_simulate(config: RunConfig) -> dict:
    game, label = _load_game(config)
    profile, _ = folk_egal(game, config.eps)
    rep = simulate_profile(
        profile,
        rounds=config.rounds,
        seed=config.seed,
        deviator=config.deviator,
        eps=config.eps,
    )
    return {"command": "simulate", "game": label, "eps": config.eps, **rep.as_dict()}


def cmd_reproduce(config: RunConfig) -> dict:
    games: dict = {}
    for name in BUILTIN_NAMES:
        game = compile_grid(builtin_game(name))
        cells: dict = {}
        profile, _ = folk_egal(game, config.eps)
        cells["folkegal"] = {"payoffs": _pt(profile.target), "converged": True}
        sec = security_profile(game, config.eps)
        cells["security"] = {"payoffs": _pt(sec.payoff), "converged": True}
        fri = friend_vi(game, config.eps)
        cells["friend"] = {"payoffs": _pt(fri.payoff), "converged": True}
        ce = ce_vi(game, config.eps)
        cells["ce"] = {"payoffs": _pt(ce.payoff), "converged": ce.converged}
        games[name] = cells
    return {
        "command": "reproduce",
        "eps": config.eps,
        "seed": config.seed,
        "games": games,
    }


# ---------------------------------------------------------------------------
# rendering


def _fmt_pt(p: list[float] | None) -> str:
    return "-" if p is None else f"({p[0]:.4f}, {p[1]:.4f})"


def _table_solve(r: dict) -> str:
    lines = [
        f"game: {r['game']}   solver: {r['solver']}   eps: {r['eps']}",
        f"payoffs: {_fmt_pt(r['payoffs'])}   converged: {r['converged']}",
    ]
    if r["mode"] is not None:
        lines.append(
            f"mode: {r['mode']}   lambda: {r['lambda']:.6f}   "
            f"egalitarian: {r['egalitarian']:.4f}"
        )
        lines.append(f"disagreement: {_fmt_pt(r['disagreement'])}")
        enf = r["enforceable"]
        lines.append(f"enforceable: {'yes' if enf['passed'] else 'NO'}")
        for key in ("player1", "player2"):
            m = enf[key]
            extra = ""
            if m["deviation_value"] is not None:
                extra = (
                    f"   deviation_value={m['deviation_value']:.4f}"
                    f"   deviation_margin={m['deviation_margin']:.4f}"
                )
            lines.append(
                f"  {key}: target={m['target']:.4f}"
                f"   participation_margin={m['participation_margin']:.4f}{extra}"
            )
        t = r["trace"]
        lines.append(
            f"trace: {t['iterations']} iterations   stop: {t['stop_reason']}   "
            f"weighted solves: {t['weighted_solves']} (cap {t['cap']})"
        )
    if r["guarantees"] is not None:
        lines.append(f"guarantees: {_fmt_pt(r['guarantees'])}")
    if r["ideal"] is not None:
        lines.append(f"ideal: {_fmt_pt(r['ideal'])}")
    if r["sweeps"] is not None:
        lines.append(f"sweeps: {r['sweeps']}")
    return "\n".join(lines)


def _table_oracle(r: dict) -> str:
    lines = [
        f"game: {r['game']}   eps: {r['eps']}   policies: {r['n_policies']}",
        f"disagreement: {_fmt_pt(r['disagreement'])}",
        f"egalitarian point: {_fmt_pt(r['egal_point'])}   "
        f"value: {r['egal_value']:.6f}",
        "hull vertices:",
    ]
    lines += [f"  {_fmt_pt(v)}" for v in r["vertices"]]
    return "\n".join(lines)


def _table_simulate(r: dict) -> str:
    lines = [
        f"game: {r['game']}   rounds: {r['rounds']}   seed: {r['seed']}   "
        f"deviator: {r['deviator']}   horizon: {r['horizon']}",
        f"empirical mean: {_fmt_pt(r['mean'])}   stderr: {_fmt_pt(r['stderr'])}",
        f"analytic target: {_fmt_pt(r['target'])}",
    ]
    if r["deviator_average"] is not None:
        lines.append(
            f"deviator (player {r['deviator_player']}) average: "
            f"{r['deviator_average']:.4f}   equilibrium path: "
            f"{r['equilibrium_average']:.4f}"
        )
    return "\n".join(lines)


def _table_reproduce(r: dict) -> str:
    lines = [f"eps: {r['eps']}"]
    for name, cells in r["games"].items():
        lines.append(f"\n=== {name}")
        lines.append(f"{'solver':<10} {'player1':>12} {'player2':>12}")
        for solver in SOLVERS:
            p = cells[solver]["payoffs"]
            mark = "" if cells[solver]["converged"] else "  (not converged)"
            lines.append(f"{solver:<10} {p[0]:>12.4f} {p[1]:>12.4f}{mark}")
    return "\n".join(lines)


def _csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()))
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue().rstrip("\n")


def _csv_rows(r: dict) -> list[dict]:
    if r["command"] == "solve":
        return [
            {
                "game": r["game"],
                "solver": r["solver"],
                "eps": r["eps"],
                "p1": r["payoffs"][0],
                "p2": r["payoffs"][1],
                "mode": r["mode"],
                "lambda": r["lambda"],
                "egalitarian": r["egalitarian"],
                "converged": r["converged"],
            }
        ]
    if r["command"] == "oracle":
        rows = [
            {"kind": "vertex", "p1": v[0], "p2": v[1]} for v in r["vertices"]
        ]
        rows.append(
            {
                "kind": "disagreement",
                "p1": r["disagreement"][0],
                "p2": r["disagreement"][1],
            }
        )
        rows.append(
            {"kind": "egal_point", "p1": r["egal_point"][0], "p2": r["egal_point"][1]}
        )
        return rows
    if r["command"] == "simulate":
        return [
            {
                "game": r["game"],
                "rounds": r["rounds"],
                "seed": r["seed"],
                "deviator": r["deviator"],
                "mean1": r["mean"][0],
                "mean2": r["mean"][1],
                "stderr1": r["stderr"][0],
                "stderr2": r["stderr"][1],
                "target1": r["target"][0],
                "target2": r["target"][1],
                "deviator_average": r["deviator_average"],
            }
        ]
    rows = []
    for name, cells in r["games"].items():
        for solver in SOLVERS:
            p = cells[solver]["payoffs"]
            rows.append(
                {
                    "game": name,
                    "solver": solver,
                    "p1": p[0],
                    "p2": p[1],
                    "converged": cells[solver]["converged"],
                }
            )
    return rows


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2)
    if fmt == "csv":
        return _csv(_csv_rows(report))
    table = {
        "solve": _table_solve,
        "oracle": _table_oracle,
        "simulate": _table_simulate,
        "reproduce": _table_reproduce,
    }
    return table[report["command"]](report)


_COMMANDS = {
    "solve": cmd_solve,
    "oracle": cmd_oracle,
    "simulate": cmd_simulate,
    "reproduce": cmd_reproduce,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    fields = {
        k: v for k, v in vars(args).items() if k in RunConfig.__dataclass_fields__
    }
    try:
        config = RunConfig(**fields)
        report = _COMMANDS[config.command](config)
    except (GameError, ParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    text = render(report, config.fmt)
    if config.out:
        Path(config.out).write_text(text + "\n")
    else:
        print(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())

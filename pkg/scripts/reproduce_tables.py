#!/usr/bin/env python3
"""Reproduce the benchmark comparison table on the five builtin boards.

Runs every solver (folkegal, security, friend, ce) on every builtin grid
game and prints one row per board with wall-clock timing, followed by the
egalitarian-search telemetry (iterations, initial area, weighted-MDP solve
count).  Numbers printed here are the ones quoted in the README.

Usage:
    python3 scripts/reproduce_tables.py [--eps 0.1] [--json out.json]
"""
from __future__ import annotations

import argparse
import json
import time

from folkegal import (
    BUILTIN_NAMES,
    builtin_game,
    ce_vi,
    compile_grid,
    folk_egal,
    friend_vi,
    security_profile,
)


def fmt(point) -> str:
    return f"({point.p1:8.3f}, {point.p2:8.3f})"


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--eps", type=float, default=0.1)
    parser.add_argument("--json", help="also dump the raw numbers to this path")
    args = parser.parse_args()

    header = (
        f"{'board':18s} {'folkegal':>22s} {'security':>22s} "
        f"{'friend':>22s} {'ce':>22s} {'secs':>6s}"
    )
    print(header)
    print("-" * len(header))

    raw: dict = {"eps": args.eps, "boards": {}}
    telemetry = []
    for name in BUILTIN_NAMES:
        t0 = time.perf_counter()
        game = compile_grid(builtin_game(name))
        profile, trace = folk_egal(game, args.eps)
        sec = security_profile(game, args.eps)
        fri = friend_vi(game, args.eps)
        ce = ce_vi(game, args.eps)
        elapsed = time.perf_counter() - t0
        print(
            f"{name:18s} {fmt(profile.target):>22s} {fmt(sec.payoff):>22s} "
            f"{fmt(fri.payoff):>22s} {fmt(ce.payoff):>22s} {elapsed:6.1f}"
        )
        telemetry.append(
            (name, profile.mode.value, profile.left_weight, trace)
        )
        raw["boards"][name] = {
            "folkegal": [profile.target.p1, profile.target.p2],
            "security": [sec.payoff.p1, sec.payoff.p2],
            "friend": [fri.payoff.p1, fri.payoff.p2],
            "ce": [ce.payoff.p1, ce.payoff.p2],
            "mode": profile.mode.value,
            "lambda": profile.left_weight,
            "egalitarian": profile.egalitarian,
            "iterations": len(trace.iterations),
            "nu0": trace.nu0,
            "seconds": elapsed,
        }

    print()
    print(f"{'board':18s} {'mode':12s} {'lambda':>8s} {'iters':>6s} "
          f"{'nu0':>10s} {'solves':>7s} {'stop':>22s}")
    for name, mode, lam, trace in telemetry:
        print(
            f"{name:18s} {mode:12s} {lam:8.4f} {len(trace.iterations):6d} "
            f"{trace.nu0:10.1f} {2 + len(trace.iterations):7d} "
            f"{trace.stop_reason:>22s}"
        )

    if args.json:
        with open(args.json, "w") as fh:
            json.dump(raw, fh, indent=2)
        print(f"\nwrote {args.json}")


if __name__ == "__main__":
    main()

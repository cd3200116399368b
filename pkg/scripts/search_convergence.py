#!/usr/bin/env python3
"""Trace the egalitarian search's triangle shrinkage on one board.

Prints the per-iteration balance weight, candidate point, and remaining
triangle area for the requested builtin (or a user map), so the geometric
halving that bounds the iteration count can be eyeballed directly.

Usage:
    python3 scripts/search_convergence.py --game chicken [--eps 0.1]
"""
from __future__ import annotations

import argparse
from pathlib import Path

from folkegal import (
    BUILTIN_NAMES,
    builtin_game,
    compile_grid,
    folk_egal,
    iteration_bound,
    parse_grid,
)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--game", default="chicken",
                        help=f"builtin name ({', '.join(BUILTIN_NAMES)})")
    parser.add_argument("--map", dest="map_path", help="gridworld map file")
    parser.add_argument("--eps", type=float, default=0.1)
    args = parser.parse_args()

    if args.map_path:
        game = compile_grid(parse_grid(Path(args.map_path).read_text()))
        label = Path(args.map_path).stem
    else:
        game = compile_grid(builtin_game(args.game))
        label = args.game

    profile, trace = folk_egal(game, args.eps)
    print(f"{label}: mode={profile.mode.value} eps={args.eps}")
    print(f"disagreement = ({profile.disagreement.p1:.4f}, "
          f"{profile.disagreement.p2:.4f})")
    print(f"target       = ({profile.target.p1:.4f}, {profile.target.p2:.4f})"
          f"   egalitarian = {profile.egalitarian:.4f}")
    print(f"nu0 = {trace.nu0:.2f}   cap = {trace.cap} "
          f"(a-priori, from the payoff bound; the measured nu0 alone "
          f"would need at most {iteration_bound(trace.nu0, args.eps)})")
    print()
    print(f"{'t':>3s} {'weight':>8s} {'point':>24s} {'area':>12s} {'halved':>7s}")
    prev = None
    for t, row in enumerate(trace.iterations):
        halved = "-" if prev is None else ("yes" if row.area <= prev / 2 + 1e-9 else "NO")
        print(f"{t:3d} {row.weight:8.4f} "
              f"({row.point.p1:10.4f}, {row.point.p2:10.4f}) "
              f"{row.area:12.4f} {halved:>7s}")
        prev = row.area
    print(f"\nstopped: {trace.stop_reason} after {len(trace.iterations)} "
          f"iterations ({2 + len(trace.iterations)} weighted MDP solves)")


if __name__ == "__main__":
    main()

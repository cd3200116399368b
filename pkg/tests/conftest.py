"""Session-scoped fixtures: compiled builtin boards and solved profiles.

Solving every builtin once per session keeps the per-test cost of the
equilibrium checks near zero; individual tests treat these objects as
read-only.
"""

from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from folkegal import BUILTIN_NAMES, builtin_game, compile_grid, folk_egal


@pytest.fixture(scope="session")
def boards():
    return {name: compile_grid(builtin_game(name)) for name in BUILTIN_NAMES}


@pytest.fixture(scope="session")
def profiles(boards):
    """(EquilibriumProfile, SearchTrace) per builtin at eps=0.1."""
    return {name: folk_egal(game, 0.1) for name, game in boards.items()}

"""Egalitarian-equilibrium solvers for two-player repeated stochastic games."""

from folkegal.egalitarian import (
    EgalSearchResult,
    EnforceabilityReport,
    EquilibriumProfile,
    Mode,
    PlayerMargins,
    SearchIteration,
    SearchTrace,
    balance,
    check_enforceable,
    default_initial_area,
    egal_search,
    folk_egal,
    intersect,
    iteration_bound,
    profile_to_dict,
    trace_to_dict,
)
from folkegal.games import (
    AdvantagePoint,
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
    game_from_dict,
    game_from_json,
    game_to_dict,
    game_to_json,
    line_side,
    mix_points,
)
from folkegal.grids import (
    BUILTIN_NAMES,
    GridSpec,
    ParseError,
    builtin_game,
    compile_grid,
    parse_grid,
    render_grid,
)
from folkegal.matrix import (
    BimatrixGame,
    MatrixGame,
    MatrixSolution,
    solve_ce_utilitarian,
    solve_zero_sum,
    zero_sum_value,
)
from folkegal.oracle import (
    OracleCapError,
    OracleResult,
    PayoffHull,
    build_hull,
    enumerate_policies,
    hull_egal_point,
    oracle_solve,
)
from folkegal.simulate import (
    SimulationReport,
    alternation_sequence,
    horizon_cap,
    simulate_profile,
)
from folkegal.solvers import (
    CorrelatedSolution,
    FriendSolution,
    SecurityProfile,
    WeightedSolution,
    ZeroSumSolution,
    best_response_policy,
    best_response_value,
    ce_vi,
    friend_vi,
    security_profile,
    shapley_solve,
    solve_mdp_w,
    vi_sweep_bound,
)

__version__ = "0.1.0"

__all__ = [
    "AdvantagePoint",
    "BUILTIN_NAMES",
    "BimatrixGame",
    "CorrelatedSolution",
    "EgalSearchResult",
    "EnforceabilityReport",
    "EquilibriumProfile",
    "FriendSolution",
    "GameError",
    "GridSpec",
    "IncompletePolicyError",
    "JointPolicy",
    "MatrixGame",
    "MatrixSolution",
    "MixedPolicy",
    "Mode",
    "OracleCapError",
    "OracleResult",
    "ParseError",
    "PayoffHull",
    "PayoffPoint",
    "PlayerMargins",
    "SearchIteration",
    "SearchTrace",
    "SecurityProfile",
    "Side",
    "SimulationReport",
    "StochasticGame",
    "WeightedSolution",
    "ZeroSumSolution",
    "alternation_sequence",
    "balance",
    "best_response_policy",
    "best_response_value",
    "build_hull",
    "builtin_game",
    "ce_vi",
    "check_enforceable",
    "compile_grid",
    "default_initial_area",
    "egal_search",
    "egal_value",
    "enumerate_policies",
    "evaluate_correlated",
    "evaluate_joint",
    "evaluate_mixed_pair",
    "folk_egal",
    "friend_vi",
    "game_from_dict",
    "game_from_json",
    "game_to_dict",
    "game_to_json",
    "horizon_cap",
    "hull_egal_point",
    "intersect",
    "iteration_bound",
    "line_side",
    "mix_points",
    "oracle_solve",
    "parse_grid",
    "profile_to_dict",
    "render_grid",
    "security_profile",
    "shapley_solve",
    "simulate_profile",
    "solve_ce_utilitarian",
    "solve_mdp_w",
    "solve_zero_sum",
    "trace_to_dict",
    "vi_sweep_bound",
    "zero_sum_value",
    "__version__",
]

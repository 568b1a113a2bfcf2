"""Black-box falsification of a reference lateral trajectory predictor.

Failure search is framed as a sequential decision problem whose actions are
RNG seeds: a seed path deterministically reproduces a flight plan, the
predictor's lateral packet, and the episode's miss distance. Searchers
(MCTS with progressive widening, direct Monte Carlo, the cross-entropy
method, route-database sampling) share one SUT evaluation budget and export
replayable episode records.
"""

from .astmdp import AstMdp, AstState, RewardConfig, reward_episodic, reward_standard
from .baselines import (
    CemConfig,
    CemProposalCollapse,
    Route,
    RouteDatabase,
    cem_search,
    direct_monte_carlo,
    generate_route_db,
    load_route_db,
    navdb_sample,
    save_route_db,
)
from .blackbox import EpisodeRecord, EvalResult, SutSimulation
from .environment import (
    Disturbance,
    EnvDistribution,
    FlightPlan,
    SeedPath,
    build_flight_plan,
    load_env_config,
    log_density,
    path_log_likelihood,
    sample_disturbance,
)
from .harness import (
    ExperimentConfig,
    Metrics,
    compute_metrics,
    export_plot_data,
    export_records,
    import_records,
    rel_log,
    replay,
    run_experiment,
)
from .mctspw import BestActionStore, SearchConfig, SearchResult, search
from .trajsut import (
    ArcSegment,
    DefectConfig,
    LateralPacket,
    StraightSegment,
    TrajectorySut,
    angular_extent,
    arc_discrepancy,
    is_event,
    miss_distance,
    predict_lateral,
    turn_radius,
)

__version__ = "0.1.0"

__all__ = [
    "AstMdp",
    "AstState",
    "ArcSegment",
    "BestActionStore",
    "CemConfig",
    "CemProposalCollapse",
    "DefectConfig",
    "Disturbance",
    "EnvDistribution",
    "EpisodeRecord",
    "EvalResult",
    "ExperimentConfig",
    "FlightPlan",
    "LateralPacket",
    "Metrics",
    "RewardConfig",
    "Route",
    "RouteDatabase",
    "SearchConfig",
    "SearchResult",
    "SeedPath",
    "StraightSegment",
    "SutSimulation",
    "TrajectorySut",
    "angular_extent",
    "arc_discrepancy",
    "build_flight_plan",
    "cem_search",
    "compute_metrics",
    "direct_monte_carlo",
    "export_plot_data",
    "export_records",
    "generate_route_db",
    "import_records",
    "is_event",
    "load_env_config",
    "load_route_db",
    "log_density",
    "miss_distance",
    "navdb_sample",
    "path_log_likelihood",
    "predict_lateral",
    "rel_log",
    "replay",
    "reward_episodic",
    "reward_standard",
    "run_experiment",
    "sample_disturbance",
    "save_route_db",
    "search",
    "turn_radius",
]

"""Seeded UAM fleet scheduling: simulator, GA scheduler, baselines, harness."""

from .model import (
    DemandModel,
    RouteNetwork,
    Scenario,
    ScenarioConfig,
    Vertiport,
    q_factor,
)
from .simulator import (
    ConstraintViolation,
    EpisodeLog,
    Event,
    InfeasibleActionError,
    JourneyRecord,
    SimState,
    apply_decision,
    episode_reward,
    feasible_actions,
    has_pending,
    init_episode,
    max_possible_profit,
    next_event,
    profit,
    profit_cents,
)
from .ga import BatchSolution, GAParams, receding_horizon_schedule, solve_batch
from .policies import greedy_policy, random_policy
from .observation import LAYOUT_VERSION, Observation, encode_observation
from .scenario import (
    GenTemplate,
    ScenarioFormatError,
    gen_scenarios,
    load_scenario,
    paper_template,
    save_scenario,
    scenario_hash,
    toy_template,
)
from .stats import TTestResult, paired_t_test
from .harness import (
    Comparison,
    EpisodeRecord,
    ExperimentResult,
    HashMismatchError,
    ReplayError,
    compare,
    export_demonstrations,
    replay,
    run_experiment,
    run_policy_episode,
    write_replay,
)

__version__ = "0.1.0"

__all__ = [
    "BatchSolution",
    "Comparison",
    "ConstraintViolation",
    "DemandModel",
    "EpisodeLog",
    "EpisodeRecord",
    "Event",
    "ExperimentResult",
    "GAParams",
    "GenTemplate",
    "HashMismatchError",
    "InfeasibleActionError",
    "JourneyRecord",
    "LAYOUT_VERSION",
    "Observation",
    "ReplayError",
    "RouteNetwork",
    "Scenario",
    "ScenarioConfig",
    "ScenarioFormatError",
    "SimState",
    "TTestResult",
    "Vertiport",
    "apply_decision",
    "compare",
    "encode_observation",
    "episode_reward",
    "export_demonstrations",
    "feasible_actions",
    "gen_scenarios",
    "greedy_policy",
    "has_pending",
    "init_episode",
    "load_scenario",
    "max_possible_profit",
    "next_event",
    "paired_t_test",
    "paper_template",
    "profit",
    "profit_cents",
    "q_factor",
    "random_policy",
    "receding_horizon_schedule",
    "replay",
    "run_experiment",
    "run_policy_episode",
    "save_scenario",
    "scenario_hash",
    "solve_batch",
    "toy_template",
    "write_replay",
]

"""Finite-horizon treatment planning under partial observability.

Building blocks: a five-bin outcome-change alphabet (`domain`), maximum-
likelihood transition models (`transitions`), belief tracking (`belief`),
cost-per-unit-change utility (`utility`), an exact decision-tree planner
(`planner`, with a compiled backup kernel when available), baseline and
planning policies (`policies`), a seeded world simulator (`simulate`), a
cohort experiment runner (`cohort`), and file/CLI surfaces (`dataio`,
`config`, `cli`).
"""

__version__ = "0.1.0"

from .belief import Belief, ObservationModel, forecast, predict, update
from .cohort import ConstructResult, ConstructSpec, run_construct, sweep_osf
from .domain import (
    MISSING,
    Action,
    DeltaBin,
    Observation,
    ScaleConfig,
    bin_delta,
    delta_from_scores,
    observed,
)
from .errors import (
    CapacityError,
    ConfigError,
    CsvFormatError,
    FitError,
    HorizonError,
    InvalidInputError,
    TreatplanError,
)
from .planner import BackupMode, Plan, SearchNode, build_tree, kernel_name, plan, tree_size
from .policies import DecisionContext, PolicyKind, PolicySpec, decide
from .simulate import (
    EpisodeState,
    PatientAgent,
    SimulationConfig,
    default_world_model,
    generate_population,
    replay_episode,
    run_episode,
    step_world,
)
from .transitions import (
    ModelClass,
    Trajectory,
    TrajectoryDataset,
    TrajectorySession,
    TransitionModel,
    fit,
    next_bin_distribution,
)
from .utility import EpisodeOutcome, cpuc, delta_max_for, osf_adjust

__all__ = [
    "Action",
    "BackupMode",
    "Belief",
    "CapacityError",
    "ConfigError",
    "ConstructResult",
    "ConstructSpec",
    "CsvFormatError",
    "DecisionContext",
    "DeltaBin",
    "EpisodeOutcome",
    "EpisodeState",
    "FitError",
    "HorizonError",
    "InvalidInputError",
    "MISSING",
    "ModelClass",
    "Observation",
    "ObservationModel",
    "PatientAgent",
    "Plan",
    "PolicyKind",
    "PolicySpec",
    "ScaleConfig",
    "SearchNode",
    "SimulationConfig",
    "Trajectory",
    "TrajectoryDataset",
    "TrajectorySession",
    "TransitionModel",
    "TreatplanError",
    "bin_delta",
    "build_tree",
    "cpuc",
    "decide",
    "default_world_model",
    "delta_from_scores",
    "delta_max_for",
    "fit",
    "forecast",
    "generate_population",
    "kernel_name",
    "next_bin_distribution",
    "observed",
    "osf_adjust",
    "plan",
    "predict",
    "replay_episode",
    "run_construct",
    "run_episode",
    "step_world",
    "sweep_osf",
    "tree_size",
    "update",
]

"""Forgetting Beta-Bernoulli agents in a simulated information commons."""

from . import version as epistemic_sim_version
from .belief import BetaBelief, Evidence, as_evidence, n_eq, new_prior
from .config import (
    PRESETS,
    ExperimentConfig,
    dump_config,
    from_mapping,
    load_config,
    preset,
    to_mapping,
)
from .engine import Replication, run, run_replication
from .environment import (
    AccessDistribution,
    Commons,
    GroundTruthSchedule,
    Uniform,
    Zipf,
    consensus_shift,
    draw_candidates,
    observe,
    theta_star,
    theta_vector,
)
from .exceptions import (
    ClockError,
    ConfigError,
    EmptyCandidatesError,
    EpistemicSimError,
    InvalidBeliefError,
    PropositionOutOfRangeError,
    UndefinedEquilibriumError,
    UndefinedMomentsError,
)
from .metrics import (
    MetricsRecord,
    MetricsSeries,
    compute_metrics,
    recovery_time,
    window_mean,
    window_peak,
)
from .store import EpistemicStore, StoreConfig
from .strategy import (
    Random,
    ResetEvent,
    StrategyKind,
    Uncertainty,
    WithSurprisalReset,
    after_observe,
    select,
)

__version__: str = epistemic_sim_version.__version__

__all__ = [
    "AccessDistribution",
    "BetaBelief",
    "ClockError",
    "Commons",
    "ConfigError",
    "EmptyCandidatesError",
    "EpistemicSimError",
    "EpistemicStore",
    "Evidence",
    "ExperimentConfig",
    "GroundTruthSchedule",
    "InvalidBeliefError",
    "MetricsRecord",
    "MetricsSeries",
    "PRESETS",
    "PropositionOutOfRangeError",
    "Random",
    "Replication",
    "ResetEvent",
    "StoreConfig",
    "StrategyKind",
    "Uncertainty",
    "UndefinedEquilibriumError",
    "UndefinedMomentsError",
    "Uniform",
    "WithSurprisalReset",
    "Zipf",
    "after_observe",
    "as_evidence",
    "compute_metrics",
    "consensus_shift",
    "draw_candidates",
    "dump_config",
    "from_mapping",
    "load_config",
    "n_eq",
    "new_prior",
    "observe",
    "preset",
    "recovery_time",
    "run",
    "run_replication",
    "select",
    "theta_star",
    "theta_vector",
    "to_mapping",
    "window_mean",
    "window_peak",
]

"""Key-generation-rate simulation and optimization for movable-antenna arrays.

The library models a multipath channel whose covariance depends on the
antenna positions, evaluates the secret-key rate extractable from two-way
channel probing, and maximizes that rate over the precoding matrix and the
antenna layout with a particle swarm, a projected-gradient method, and an
alternating combination of the two.
"""

from .ao import AoResult, PgdConfig, PgdTrace, pgd_precoder, pso_layout, run_ao
from .baselines import BaselineKind, run_random_baseline, run_upa_baseline, upa_layout
from .channel import (
    analytic_covariance,
    channel_response,
    mc_covariance,
    steering_matrix,
    validate_covariance,
)
from .constraints import (
    FitnessValue,
    PenaltyConfig,
    clamp_region,
    penalized_fitness,
    project_power,
    spacing_penalty,
)
from .experiments import (
    ExperimentConfig,
    cmd_compare,
    cmd_layout,
    cmd_sweep,
    default_config,
    load_config,
    parse_config,
)
from .kgr import KgrNumericalError, kgr, kgr_batch, kgr_gradient, second_order_stats
from .pso import (
    CovarianceModel,
    OptTrace,
    PsoConfig,
    TraceRecord,
    decode,
    encode,
    inertia_weight,
    pso_step,
    run_pso,
)
from .rng import stream
from .scenario import PathSet, Region, Scenario, path_directions, sample_paths

__version__ = "0.1.0"

__all__ = [
    "AoResult",
    "BaselineKind",
    "CovarianceModel",
    "ExperimentConfig",
    "FitnessValue",
    "KgrNumericalError",
    "OptTrace",
    "PathSet",
    "PenaltyConfig",
    "PgdConfig",
    "PgdTrace",
    "PsoConfig",
    "Region",
    "Scenario",
    "TraceRecord",
    "analytic_covariance",
    "channel_response",
    "clamp_region",
    "cmd_compare",
    "cmd_layout",
    "cmd_sweep",
    "decode",
    "default_config",
    "encode",
    "inertia_weight",
    "kgr",
    "kgr_batch",
    "kgr_gradient",
    "load_config",
    "mc_covariance",
    "parse_config",
    "path_directions",
    "pgd_precoder",
    "penalized_fitness",
    "project_power",
    "pso_layout",
    "pso_step",
    "run_ao",
    "run_pso",
    "run_random_baseline",
    "run_upa_baseline",
    "sample_paths",
    "second_order_stats",
    "spacing_penalty",
    "steering_matrix",
    "stream",
    "upa_layout",
    "validate_covariance",
]

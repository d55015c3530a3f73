"""Retained-transmitter intensity and interference for handshake-thinned
bipolar networks: closed-form analysis, numerical quadrature, and a Monte
Carlo simulator."""

from .analysis import (
    InterferenceResult,
    QuadratureConfig,
    QuadratureConvergenceError,
    ThinningType,
    intensity_type1,
    intensity_type2,
    interference_tail_bound,
    mean_interference,
    optimal_lambda_p_type1,
    ordered_pair_retention,
    pair_retention_kernel,
    path_loss,
    retained_intensity,
)
from .experiment import (
    ConfigError,
    ExperimentConfig,
    ExperimentRecord,
    NetworkSpec,
    SweepConvergenceError,
    load_config,
    load_records,
    run_sweep,
    write_records,
)
from .geometry import (
    ConflictEvents,
    Disk,
    ExclusionGeometry,
    NetworkParams,
    PairConfiguration,
    PathLossModel,
    conflict_events,
    exclusion_zone_area,
    lens_area,
    monte_carlo_union_area,
    pair_union_area,
    pair_union_area_batch,
    union_of_disks_area,
    zone_reach,
)
from .simulator import (
    EstimateWithCI,
    PalmResult,
    PointConfiguration,
    SimulationConfig,
    TransceiverPair,
    empirical_intensity,
    palm_interference,
    replication_stream,
    sample_bipolar,
    thin,
    thin_type1,
    thin_type2,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "ConflictEvents",
    "Disk",
    "EstimateWithCI",
    "ExclusionGeometry",
    "ExperimentConfig",
    "ExperimentRecord",
    "InterferenceResult",
    "NetworkParams",
    "NetworkSpec",
    "PairConfiguration",
    "PalmResult",
    "PathLossModel",
    "PointConfiguration",
    "QuadratureConfig",
    "QuadratureConvergenceError",
    "SimulationConfig",
    "SweepConvergenceError",
    "ThinningType",
    "TransceiverPair",
    "conflict_events",
    "empirical_intensity",
    "exclusion_zone_area",
    "intensity_type1",
    "intensity_type2",
    "interference_tail_bound",
    "lens_area",
    "load_config",
    "load_records",
    "mean_interference",
    "monte_carlo_union_area",
    "optimal_lambda_p_type1",
    "ordered_pair_retention",
    "pair_retention_kernel",
    "pair_union_area",
    "pair_union_area_batch",
    "palm_interference",
    "path_loss",
    "replication_stream",
    "retained_intensity",
    "run_sweep",
    "sample_bipolar",
    "thin",
    "thin_type1",
    "thin_type2",
    "union_of_disks_area",
    "write_records",
    "zone_reach",
]

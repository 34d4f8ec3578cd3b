"""Closed-form parameter estimation for parameter-linear dynamical systems.

Systems of the form dx/dt = A(x; t) omega, with the right-hand side linear
in the parameter vector, are fitted to sampled trajectories by stacking the
model matrices against finite-difference derivatives and solving the normal
equations. Shipped models: Lotka-Volterra, SIR, and a seven-compartment
epidemic model with hospital, ICU, and vaccination flows; a vorticity
module estimates Reynolds numbers from flow snapshots by the same route.
"""

from .differentiation import (
    GridField,
    TimeSeries,
    central_diff,
    full_diff,
    spatial_gradient,
    spatial_laplacian,
)
from .epidemic import (
    FixedRates,
    RawDailySeries,
    build_s3i3r_states,
    build_sir_states,
    load_who_csv,
)
from .errors import (
    AllZeroColumn,
    ConfigError,
    DegenerateDenominator,
    DimensionMismatch,
    EstimationError,
    IndexOutOfRange,
    MissingColumn,
    MissingField,
    NegativeCompartment,
    NonFiniteState,
    NonMonotonicDates,
    NonPhysical,
    NonPositivePopulation,
    ParseError,
    RankDeficient,
    RegionTooSmall,
    ShapeMismatch,
    TooFewPoints,
    UnderDetermined,
)
from .estimation import (
    ErrorMetrics,
    EstimationWindow,
    NoiseSpec,
    SweepResult,
    SweepSpec,
    add_noise,
    assemble_from_series,
    estimate_constant,
    estimate_time_varying,
    relative_error_metrics,
    run_sweep,
    subsample_noise_table,
)
from .integrator import (
    ConstantSchedule,
    PiecewiseSchedule,
    SimulationConfig,
    SinusoidalBetaSchedule,
    erk4_step,
    simulate,
)
from .models import (
    ParameterLinearModel,
    eval_rhs,
    get_model,
    lotka_volterra,
    lotka_volterra_matrix,
    register_model,
    s3i3r,
    s3i3r_matrix,
    sir,
    sir_matrix,
)
from .regression import (
    ParameterEstimate,
    ParameterPartition,
    StackedSystem,
    apply_partition,
    recombine_partition,
    solve_ols,
    solve_partitioned,
    solve_ridge,
    solve_single_column,
    stack_systems,
)
from .vorticity import (
    ReynoldsEstimate,
    SensorSet,
    SnapshotStack,
    advected_diffusion_stack,
    assemble_vorticity_system,
    curl_consistency_rms,
    default_wake_region,
    estimate_inverse_re,
    estimate_reynolds,
    load_snapshot_stack,
    manufactured_diffusion_stack,
    sample_sensors,
    shedding_time_step,
    snapshots_from_flat_columns,
    write_snapshot_stack,
)

__version__ = "0.1.0"

__all__ = [
    "AllZeroColumn",
    "ConfigError",
    "ConstantSchedule",
    "DegenerateDenominator",
    "DimensionMismatch",
    "ErrorMetrics",
    "EstimationError",
    "EstimationWindow",
    "FixedRates",
    "GridField",
    "IndexOutOfRange",
    "MissingColumn",
    "MissingField",
    "NegativeCompartment",
    "NoiseSpec",
    "NonFiniteState",
    "NonMonotonicDates",
    "NonPhysical",
    "NonPositivePopulation",
    "ParameterEstimate",
    "ParameterLinearModel",
    "ParameterPartition",
    "ParseError",
    "PiecewiseSchedule",
    "RankDeficient",
    "RawDailySeries",
    "RegionTooSmall",
    "ReynoldsEstimate",
    "SensorSet",
    "ShapeMismatch",
    "SimulationConfig",
    "SinusoidalBetaSchedule",
    "SnapshotStack",
    "StackedSystem",
    "SweepResult",
    "SweepSpec",
    "TimeSeries",
    "TooFewPoints",
    "UnderDetermined",
    "add_noise",
    "advected_diffusion_stack",
    "apply_partition",
    "assemble_from_series",
    "assemble_vorticity_system",
    "build_s3i3r_states",
    "build_sir_states",
    "central_diff",
    "curl_consistency_rms",
    "default_wake_region",
    "erk4_step",
    "estimate_constant",
    "estimate_inverse_re",
    "estimate_reynolds",
    "estimate_time_varying",
    "eval_rhs",
    "full_diff",
    "get_model",
    "load_snapshot_stack",
    "load_who_csv",
    "lotka_volterra",
    "lotka_volterra_matrix",
    "manufactured_diffusion_stack",
    "recombine_partition",
    "register_model",
    "relative_error_metrics",
    "run_sweep",
    "s3i3r",
    "s3i3r_matrix",
    "sample_sensors",
    "shedding_time_step",
    "simulate",
    "sir",
    "sir_matrix",
    "snapshots_from_flat_columns",
    "solve_ols",
    "solve_partitioned",
    "solve_ridge",
    "solve_single_column",
    "spatial_gradient",
    "spatial_laplacian",
    "stack_systems",
    "subsample_noise_table",
    "write_snapshot_stack",
]

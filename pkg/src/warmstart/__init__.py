"""Statevector toolkit for warm-started variational evolution compression.

The package simulates short-timestep compression losses exactly (dense
statevectors, 2 to 12 qubits), estimates their landscape statistics, and
evaluates the closed-form trainability guarantees those landscapes are
supposed to obey: hypercube variance floors, local convexity radii, and
drift bounds for a minimum tracked across timesteps. Real-time evolution,
imaginary-time projection, full unitary learning and state-ensemble
(QML-style) targets share one loss interface.
"""
from .bounds import (
    BoundReport,
    Condition,
    adiabatic_shift_bound,
    adiabatic_step_limits,
    convexity_radius,
    cos2_moment,
    cos2_variance,
    cos4_moment,
    fidelity_variance_bound,
    gershgorin_row_bound,
    imaginary_time_bounds,
    imaginary_time_variance_bound,
    overlap_gap,
    quartic_variance_floor,
    real_time_variance_bound,
    variance_floor,
)
from .circuits import (
    Ansatz,
    ControlledZ,
    Rotation,
    build_hea,
    build_hva,
    parse_circuit,
    serialize_circuit,
)
from .errors import NumericFailure, ValidationError
from .landscape import (
    Cut1D,
    Grid2D,
    HypercubeRegion,
    PathProfile,
    Plane,
    StepSweep,
    VarianceEstimate,
    VarianceSweep,
    cut_1d,
    default_r_grid,
    estimate_variance,
    fit_power_law,
    gradient_along_path,
    grid_2d,
    pca_plane,
    sample_hypercube,
    surface_mean_loss,
    variance_sweep_r,
    variance_vs_dt,
)
from .loss import (
    LossContext,
    StabilizerDataset,
    dataset_orthogonality_defect,
    gradient,
    hessian,
    loss,
    loss_batch,
    mu_min,
    qfi,
    qml_mixed_form_loss,
    sample_stabilizer_dataset,
)
from .models import xx_chain, xz_chain
from .optimize import (
    AdaptiveSchedule,
    AdiabaticTrack,
    CompressionLog,
    CompressionStep,
    JumpReport,
    MinimizeResult,
    MinimumRecord,
    OptimizerOptions,
    adiabatic_track,
    beta_a,
    compress_run,
    detect_minima_jump,
    minimize,
    minimize_function,
    track_velocity,
)
from .pauli import PauliString, PauliSum, parse_hamiltonian, serialize_hamiltonian
from .seeding import derive_seed, rng_for
from .states import (
    StateVector,
    basis_state,
    bell_pair_state,
    dump_statevector_csv,
    evolve_imaginary,
    evolve_real,
    fidelity,
    load_statevector_csv,
    zero_state,
)

__version__ = "0.1.0"

__all__ = [
    "AdaptiveSchedule",
    "AdiabaticTrack",
    "Ansatz",
    "BoundReport",
    "CompressionLog",
    "CompressionStep",
    "Condition",
    "ControlledZ",
    "Cut1D",
    "Grid2D",
    "HypercubeRegion",
    "JumpReport",
    "LossContext",
    "MinimizeResult",
    "MinimumRecord",
    "NumericFailure",
    "OptimizerOptions",
    "PathProfile",
    "PauliString",
    "PauliSum",
    "Plane",
    "Rotation",
    "StabilizerDataset",
    "StateVector",
    "StepSweep",
    "ValidationError",
    "VarianceEstimate",
    "VarianceSweep",
    "adiabatic_shift_bound",
    "adiabatic_step_limits",
    "adiabatic_track",
    "basis_state",
    "bell_pair_state",
    "beta_a",
    "build_hea",
    "build_hva",
    "compress_run",
    "convexity_radius",
    "cos2_moment",
    "cos2_variance",
    "cos4_moment",
    "cut_1d",
    "dataset_orthogonality_defect",
    "default_r_grid",
    "derive_seed",
    "detect_minima_jump",
    "dump_statevector_csv",
    "estimate_variance",
    "evolve_imaginary",
    "evolve_real",
    "fidelity",
    "fidelity_variance_bound",
    "fit_power_law",
    "gershgorin_row_bound",
    "gradient",
    "gradient_along_path",
    "grid_2d",
    "hessian",
    "imaginary_time_bounds",
    "imaginary_time_variance_bound",
    "load_statevector_csv",
    "loss",
    "loss_batch",
    "minimize",
    "minimize_function",
    "mu_min",
    "overlap_gap",
    "parse_circuit",
    "parse_hamiltonian",
    "pca_plane",
    "qfi",
    "qml_mixed_form_loss",
    "quartic_variance_floor",
    "real_time_variance_bound",
    "rng_for",
    "sample_hypercube",
    "sample_stabilizer_dataset",
    "serialize_circuit",
    "serialize_hamiltonian",
    "surface_mean_loss",
    "track_velocity",
    "variance_floor",
    "variance_sweep_r",
    "variance_vs_dt",
    "xx_chain",
    "xz_chain",
    "zero_state",
]

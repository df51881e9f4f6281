"""Numerical laboratory for the focusing inhomogeneous nonlinear Schroedinger
equation with an inverse-square potential: ground-state profiles, sharp
constants, threshold classification of initial data, and radial time
evolution with blow-up detection."""

from .classifier import (
    BlowupStrength,
    Classification,
    DataSymmetry,
    Regime,
    ThresholdAnalysis,
    classify,
    threshold_x0,
    trajectory_criteria,
)
from .evolution import (
    EvolutionConfig,
    ReversibleStepper,
    Trajectory,
    TrajectoryStatus,
    detect_blowup,
    evolve,
    soliton_error,
)
from .functionals import (
    InvariantSnapshot,
    check_momentum_bound,
    check_uncertainty,
    gn_quotient,
    snapshot,
)
from .grid import (
    GridMapping,
    RadialField,
    RadialGrid,
    apply_Pc,
    build_grid,
    hardy_ratio,
    integrate,
)
from .ground_state import (
    GroundStateBundle,
    SolverOptions,
    pohozaev_report,
    rescale_data,
    solve_ground_state,
    thresholds,
)
from .params import DerivedExponents, Params, derived_exponents, validate
from .virial import (
    ExactWeight,
    VirialCutoff,
    build_cutoff,
    check_virial_consistency,
    virial_acceleration,
    virial_rate,
)

__version__ = "0.1.0"

__all__ = [
    "BlowupStrength", "Classification", "DataSymmetry", "Regime",
    "ThresholdAnalysis", "classify", "threshold_x0", "trajectory_criteria",
    "EvolutionConfig", "ReversibleStepper", "Trajectory", "TrajectoryStatus",
    "detect_blowup", "evolve", "soliton_error",
    "InvariantSnapshot", "check_momentum_bound", "check_uncertainty",
    "gn_quotient", "snapshot",
    "GridMapping", "RadialField", "RadialGrid", "apply_Pc", "build_grid",
    "hardy_ratio", "integrate",
    "GroundStateBundle", "SolverOptions", "pohozaev_report", "rescale_data",
    "solve_ground_state", "thresholds",
    "DerivedExponents", "Params", "derived_exponents", "validate",
    "ExactWeight", "VirialCutoff", "build_cutoff", "check_virial_consistency",
    "virial_acceleration", "virial_rate",
    "__version__",
]

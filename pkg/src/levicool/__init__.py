"""Coupled librational-translational dynamics of a levitated ellipsoidal
nanoparticle: trap parameters, steady-state branches, semiclassical
trajectories, synthetic cooling, and a truncated-Fock validation oracle."""

from .cooling import (
    CoolingConfig,
    CoolingResult,
    cooling_sweep,
    effective_detunings,
    eta_tilde,
    feedback_occupation,
    occupancy_dynamics,
    select_operating_branch,
    steady_occupations,
    tms_coupling,
)
from .errors import (
    ConfigurationError,
    DomainError,
    IntegrationError,
    OracleError,
    PreconditionError,
)
from .meanfield import SettleResult, Trajectory, integrate, settle
from .physics import (
    DampingReference,
    Environment,
    ModeParams,
    OpticalResponse,
    ParticleGeometry,
    TrapBeam,
    coefficient_sweep,
    depolarization_factors,
    derive_mode_params,
    gas_damping,
    susceptibilities,
    thermal_occupation,
)
from .steady import (
    AxisSpec,
    BranchSolveResult,
    DriveConfig,
    MultistabilityMap,
    SteadyBranch,
    branch_solve,
    classify_stability,
    sweep,
)

__all__ = [
    "AxisSpec",
    "BranchSolveResult",
    "ConfigurationError",
    "CoolingConfig",
    "CoolingResult",
    "DampingReference",
    "DomainError",
    "DriveConfig",
    "Environment",
    "IntegrationError",
    "ModeParams",
    "MultistabilityMap",
    "OpticalResponse",
    "OracleError",
    "ParticleGeometry",
    "PreconditionError",
    "SettleResult",
    "SteadyBranch",
    "Trajectory",
    "TrapBeam",
    "branch_solve",
    "classify_stability",
    "coefficient_sweep",
    "cooling_sweep",
    "depolarization_factors",
    "derive_mode_params",
    "effective_detunings",
    "eta_tilde",
    "feedback_occupation",
    "gas_damping",
    "integrate",
    "occupancy_dynamics",
    "select_operating_branch",
    "settle",
    "steady_occupations",
    "susceptibilities",
    "sweep",
    "thermal_occupation",
    "tms_coupling",
]

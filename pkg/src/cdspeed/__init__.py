"""Counterdiabatic driving: auxiliary Hamiltonians, cost rates and geometric speeds."""

from .adiabatic import SpectralFrame, fd_coupling_oracle, frame_at, spectral_frame
from .cdrive import COLLECTIVE, DriveProtocol, build_collective, build_individual, total_hamiltonian
from .costspeed import (
    CanonicalEnsemble,
    CostReport,
    SpeedReport,
    canonical_populations,
    collective_cost_rate,
    cost_integral,
    cost_rate_from_operator,
    cost_relation_residual,
    cost_report,
    ensemble_speed,
    equality_condition_gap,
    fisher_metric_spectral,
    fubini_study_metric,
    individual_cost_rate,
    pure_state_metric,
    speed_cost_check_collective,
    speed_cost_check_individual,
    uhlmann_fidelity,
)
from .dynamics import average_speed, propagate, propagate_levels, tracking_fidelity
from .matcore import EigenSystem, commutator, frobenius_norm, hermitian_eig
from .model import HamiltonianTrajectory, LZ3Params, LandauZener, lz2, lz3, lz3_oracle
from .spinops import make_spin, rotation_about_y

__all__ = [
    "average_speed",
    "build_collective",
    "build_individual",
    "canonical_populations",
    "CanonicalEnsemble",
    "COLLECTIVE",
    "collective_cost_rate",
    "commutator",
    "cost_integral",
    "cost_rate_from_operator",
    "cost_relation_residual",
    "cost_report",
    "CostReport",
    "DriveProtocol",
    "EigenSystem",
    "ensemble_speed",
    "equality_condition_gap",
    "fd_coupling_oracle",
    "fisher_metric_spectral",
    "frame_at",
    "frobenius_norm",
    "fubini_study_metric",
    "HamiltonianTrajectory",
    "hermitian_eig",
    "individual_cost_rate",
    "LandauZener",
    "lz2",
    "lz3",
    "lz3_oracle",
    "LZ3Params",
    "make_spin",
    "propagate",
    "propagate_levels",
    "pure_state_metric",
    "rotation_about_y",
    "spectral_frame",
    "SpectralFrame",
    "speed_cost_check_collective",
    "speed_cost_check_individual",
    "SpeedReport",
    "total_hamiltonian",
    "tracking_fidelity",
    "uhlmann_fidelity",
]

__version__ = "0.1.0"

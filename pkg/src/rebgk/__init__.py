"""Relativistic BGK relaxation for a four-species reactive gas mixture (1 + 2 <-> 3 + 4)."""
from .auxsolver import (
    AuxiliaryState,
    SolverError,
    SolverInputs,
    SolverOptions,
    evaluate_attractor,
    in_feasible_domain,
    phi,
    refine_on_grid,
    solve_parameters,
)
from .bessel import besselK, besselK_scaled
from .config import RunConfig, case1_config, case2_config, load_config
from .core import (
    DistributionState,
    MomentumGrid,
    PhysicalConstants,
    SpeciesParams,
    make_grid,
    make_species,
    validate_state,
)
from .dynamics import RelaxationModel, entropy, entropy_production, rhs, rk4_step, run
from .moments import juttner_M, quad, species_moments

__version__ = "0.1.0"

__all__ = [
    "AuxiliaryState", "DistributionState", "MomentumGrid", "PhysicalConstants", "RelaxationModel",
    "RunConfig", "SolverError", "SolverInputs", "SolverOptions", "SpeciesParams",
    "besselK", "besselK_scaled", "case1_config", "case2_config", "entropy", "entropy_production",
    "evaluate_attractor", "in_feasible_domain", "juttner_M", "load_config", "make_grid", "make_species",
    "phi", "quad", "refine_on_grid", "rhs", "rk4_step", "run", "solve_parameters", "species_moments",
    "validate_state",
]

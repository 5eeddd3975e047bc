"""Pseudospectral laboratory for BBM-type Boussinesq systems with bore data."""

__version__ = "0.1.0"

from .bore import BoreProfile, State, compose_2d, gaussian, low_high_split, make_bore, m_norm
from .errors import (
    BBMError,
    BlowUpError,
    ConfigurationError,
    ContaminationError,
    DegenerateGridError,
    DomainError,
    DomainTooSmallError,
)
from .littlewood_paley import (
    BesovSpec,
    EnergyWeights,
    besov_norm,
    block_energy,
    build_partition,
    dyadic_block,
    e_norm,
    stacked_norm,
)
from .linear_waves import WaveBackground, dalembert_evolve, forcing_terms
from .solver import (
    CoefficientSet,
    ModelParams,
    SolverConfig,
    bootstrap_constants,
    rhs_eval,
    run,
    solve_1d_bore,
    solve_2d_bore,
    step,
    t_star_measure,
)
from .spectral import Field, GridSpec

__all__ = [
    "BBMError", "BesovSpec", "BlowUpError", "BoreProfile", "CoefficientSet",
    "ConfigurationError", "ContaminationError", "DegenerateGridError", "DomainError",
    "DomainTooSmallError", "EnergyWeights", "Field", "GridSpec", "ModelParams",
    "SolverConfig", "State", "WaveBackground", "besov_norm", "block_energy",
    "bootstrap_constants", "build_partition", "compose_2d", "dalembert_evolve",
    "dyadic_block", "e_norm", "forcing_terms", "gaussian", "low_high_split",
    "m_norm", "make_bore", "rhs_eval", "run", "solve_1d_bore", "solve_2d_bore",
    "stacked_norm", "step", "t_star_measure",
]

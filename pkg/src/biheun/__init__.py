"""Bi-confluent Heun potentials, their spectra and a relativistic infimum cut."""

__version__ = "0.1.0"

from .bch import BchParams, BchValue, bch_coefficients, bch_eval, quasipoly_q_values
from .errors import (
    BiheunError,
    ConvergenceError,
    DomainError,
    EvaluationError,
    ForbiddenStateError,
    ParameterError,
    ReductionError,
    SolverConfigError,
    TrivialFamilyError,
)
from .oracle import SolverConfig, count_nodes, numerov_integrate, solve_bound_states
from .potentials import (
    FAMILIES,
    NATURAL,
    PotentialSpec,
    UnitSystem,
    coordinate_transform,
    potential_eval,
    potential_from_scalar,
    scalar_potential,
    vector_potential_sq,
)
from .reduction import BranchPolicy, SolutionAnsatz, assemble_wavefunction, ode_residual, reduce_to_bch
from .spectra import (
    BoundaryCondition,
    SpectrumEntry,
    ground_state_index,
    isr_energy_dirichlet,
    isr_energy_quasipoly,
    quasipoly_oracle_energy,
    rwe_isr_spectrum,
    schrodinger_to_rwe,
)

"""Exact and quenched pressures of multi-spin Ising models with random couplings.

The package enumerates finite systems exactly, averages over disorder either
exhaustively or by seeded Monte Carlo, and checks the pressure inequalities
(correlation monotonicity, sub-box super-additivity, moment bounds) on
desk-scale instances.
"""

__version__ = "0.1.0"

from .disorder import (
    Deterministic,
    Discrete,
    Gaussian,
    Rademacher,
    SymmetricPareto,
    TruncatedPair,
    Uniform,
    distribution_from_dict,
    moment_p,
    stream,
    truncate,
)
from .engine import GibbsSummary, gibbs_expectation, log_partition, partition_ratio
from .errors import CapacityError, ConfigError, PreconditionError, QuenchlabError, UnsupportedRegionError
from .inequalities import (
    CheckReport,
    cl_monotonicity_check,
    corollary_bound_check,
    griffiths_check,
    ratio_identity_check,
    scalar_toolbox_check,
    superadditivity_check,
    telescoping_bound_check,
    truncation_error_check,
)
from .lattice import (
    CouplingFamily,
    Hamiltonian,
    InteractionTerm,
    Orbit,
    Region,
    box,
    family_from_dict,
    instantiate,
    nearest_neighbor_family,
    place,
    prefix,
)
from .limits import bound_value, box_decompose, convergence_run, norm
from .quenched import FiniteEnsemble, PressureEstimate, annealed_pressure_gaussian, quenched_exact, quenched_mc

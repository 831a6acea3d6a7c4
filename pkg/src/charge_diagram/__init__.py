"""Thermodynamics of multiple (generally non-commuting) conserved charges.

Numerical core: generalized Gibbs states and maximum-entropy inference,
phase-diagram geometry (including the conditional-entropy extension),
first/second-law work ledgers, optimal thermal-bath rates, and desk-scale
constructions of typical projectors, trimmed states, equivalence
unitaries and approximate microcanonical subspaces.
"""

from .bathrate import RateOptions, RateReport, optimal_rate_exact, optimal_rate_quadratic
from .diagram import (
    MembershipOptions,
    MembershipReport,
    PhasePoint,
    achievable,
    conditional_entropy,
    extended_member,
    max_entropy_at,
    phase_member,
)
from .errors import (
    BoundaryProximityError,
    CapacityError,
    ChargeDiagramError,
    ConvergenceError,
    DegenerateTrimError,
    InfeasibleScenarioError,
    InfeasibleTargetError,
    InvalidStateError,
    NotEquivalentError,
    SamplingError,
    ShapeError,
    UnboundedRateError,
)
from .gibbs import (
    GgsSolution,
    SolverOptions,
    entropy_hessian,
    free_entropy,
    ggs_from_beta,
    heat_capacity,
    solve_beta,
)
from .operators import (
    ChargeSet,
    DensityState,
    HermitianObservable,
    Projector,
    entropy,
    random_density,
    random_hermitian,
    random_pure,
    random_unitary,
    reduce_state,
    spectral_diameter,
    total_charge,
    trace_distance,
    window_projector,
)
from .thermo import (
    Ledger,
    Scenario,
    bath_point_at_rate,
    first_law_ledger,
    fixed_bath_feasible,
    second_law_gap,
)

__version__ = "0.1.0"

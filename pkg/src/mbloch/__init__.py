"""Dynamics, stability and level-set geometry of the real-valued
Maxwell-Bloch system with quadratic control (k < 0)."""

from .core import (
    ECValue,
    State3,
    SystemParams,
    casimir,
    energy_casimir,
    grad_casimir,
    grad_hamiltonian,
    hamiltonian,
    jacobian,
    poisson_bracket,
    poisson_matrix,
    vector_field,
)
from .equilibria import (
    Equilibrium,
    Family,
    StabilityVerdict,
    Verdict,
    arnold_test,
    classify_equilibrium,
    eigenvalues_at,
)
from .errors import (
    DomainExceededError,
    InvalidParameterError,
    InvalidSpanError,
    InvalidStateError,
    MaxwellBlochError,
    NoReturnError,
    PoleProximityError,
    SeedOffSurfaceError,
    ToleranceOutOfRangeError,
)
from .fibers import (
    Fiber,
    FiberComponent,
    Kind,
    build_fiber,
    case_iv_time_limit,
    heteroclinic,
    invariants_from_ec,
    param_case_i,
    param_case_ii,
    param_case_iv,
)
from .integrate import (
    DriftReport,
    Status,
    Trajectory,
    drift_report,
    find_section_crossings,
    integrate,
    integrate4,
)
from .periodic import (
    PeriodicOrbit,
    closed_orbit_through,
    find_periodic,
    linearized_period,
    lyapunov_integral,
)
from .strata import (
    Stratum,
    classify_ec_point,
    equilibrium_image,
    recover_equilibrium_parameter,
    stratum_of_equilibrium,
)
from .symplectic import (
    State4,
    canonical_bracket,
    grad_hamiltonian4,
    hamiltonian4,
    in_omega,
    momentum_integral,
    realization_jacobian,
    realization_map,
    vector_field4,
)
from .weierstrass import WeierstrassInvariants, real_period, weierstrass_p

__version__ = "0.1.0"

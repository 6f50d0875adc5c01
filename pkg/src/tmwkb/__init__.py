"""Quantum transmission through 1-D barriers with WKB open boundaries.

Transfer-matrix solvers with plane-wave, first-order WKB and third-order
WKB boundaries, a polar-form ODE solver, exact references for the inverted
parabola and the sech^2 barrier, and an error-analysis harness.
"""

from .constants import CONSTANTS, HBAR, M_E, Q_E, PhysicalConstants
from .errors import (
    ChainOverflowError,
    ConfigError,
    IntegrationError,
    NoTurningPointsError,
    QuadratureError,
    ResonanceError,
    TunnelingError,
    TurningPointError,
    UnsupportedReferenceError,
)
from .exact import (
    TcResult,
    TurningPoints,
    barrier_action,
    exact_tc,
    exact_tc_parabolic,
    exact_tc_sech2,
    find_turning_points,
    wkb_tc,
)
from .experiments import (
    ErrorReport,
    SweepConfig,
    run_error_analysis,
    run_n_sweep,
    run_tc_sweep,
)
from .polar import (
    PolarState,
    compute_phase,
    compute_tc_de,
    initial_conditions,
    integrate_polar,
    nondimensionalize,
    tc_from_polar,
)
from .potentials import (
    Potential,
    load_table,
    make_constant,
    make_parabolic,
    make_sech2,
    make_tabulated,
)
from .transfer import (
    ComplexMatrix2,
    StepGrid,
    boundary_left,
    boundary_right,
    chain_product,
    compute_tc_tm,
    discretize,
    step_matrix,
    tc_first_order,
    tc_third_order,
)
from .wkb import WkbPhase, integrate_phase, s_prime_terms

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]

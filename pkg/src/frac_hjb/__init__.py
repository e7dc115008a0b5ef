"""Numerical laboratory for first-order HJB equations regularized by a
fractional Laplacian eps (-Delta)^{s/2}, s in [1, 2]: a monotone solver,
exact oracles, regularity estimators, and a study harness."""

from .analysis import (
    CylinderSpec,
    HolderReport,
    OscillationReport,
    RateFit,
    advection_inequality_residuals,
    c1alpha_norm,
    difference_quotient,
    fit_rate,
    holder_seminorm,
    inf_convolution,
    oscillation_sequence,
    sup_convolution,
)
from .fracops import (
    FractionalOrder,
    OperatorBackend,
    apply_operator,
    apply_quadrature,
    apply_spectral,
    hilbert_transform,
    normalization_constant,
    quadrature_matrix,
    quadrature_weights,
    riesz_identity_residual,
    spectral_derivative,
    split_parts,
)
from .grid import (
    GridField,
    PeriodicGrid,
    Trajectory,
    discrete_gradient,
    field_to_csv,
    lipschitz_constant,
    read_field_csv,
    sample,
    sup_dist,
    sup_norm,
    write_field_csv,
)
from .hamiltonians import (
    COEFFICIENTS,
    AssumptionReport,
    HamiltonianSpec,
    NumericalFlux,
    lax_friedrichs,
    make_catalog_hamiltonian,
    shift,
    verify_assumptions,
)
from .oracles import (
    OracleResult,
    PoissonCheck,
    fractional_heat_exact,
    hopf_lax,
    poisson_kernel_check,
    transport_exact,
)
from .studies import RateReport, StudyConfig, SuiteRow, SuiteVerdict
from .solver import (
    SolveError,
    SolverConfig,
    pde_residual_fields,
    residual,
    solve,
    stable_dt,
    step,
)

__version__ = "0.1.0"

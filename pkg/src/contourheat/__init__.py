"""Contour-quadrature time discretization for parabolic problems.

The inverse Laplace transform along a hyperbola turns u(t) into a short
sum over solutions of complex-shifted elliptic systems
(z_j M + S) w_j = g(z_j); the modules here build the quadrature, the
FEM pencil (M, S) of the model problem, optimal Richardson and CG
iterations for the shifted systems, and the preconditioners that keep
their counts bounded along the contour.
"""

from .brent import MinimizeResult, minimize_scalar
from .contour import (
    ContourQuadrature,
    ToleranceBudget,
    build_quadrature,
    inverse_transform,
    solver_error_bound,
    tolerance_budget,
)
from .driver import (
    PointRecord,
    RunConfig,
    SolveResult,
    Workspace,
    solve_parabolic,
)
from .errors import (
    ConfigError,
    ContourHeatError,
    DegenerateGeometryError,
    DimensionMismatchError,
    FactorizationError,
    IterationBreakdownError,
    MeshFormatError,
    OptimizationError,
    SingularMatrixError,
)
from .fem import FemSpace, assemble, discrete_norm, interpolate
from .krylov import (
    ChebyshevPrediction,
    cg_general_precond,
    cg_inv_precond,
    cg_shifted,
    chebyshev_prediction,
    chebyshev_prediction_inv,
    eta_tilde,
    optimal_mu_cg,
    triple_norm,
)
from .mesh import Mesh, generate_trapezium_mesh, read_mesh, write_mesh
from .model import (
    DIFFUSIVITY,
    exact_nodal_solution,
    initial_nodal_values,
    model_load_vector,
)
from .precond import PrecondCache, Preconditioner, make_ic0, make_inv, make_sgs
from .richardson import (
    RichardsonPlan,
    SegmentAlpha,
    optimal_alpha_point,
    optimal_alpha_segment,
    optimize_mu_richardson,
    plan_basic,
    plan_general_precond,
    plan_general_zero_shift,
    plan_inv_precond,
    run_richardson,
)
from .spectral import (
    EigenEstimate,
    SpectralBounds,
    lambda1_fz,
    lanczos_extremes,
    pencil_extremes,
    spectral_bounds,
)
from .system import IterationReport, ShiftedSystem, StoppingRule

__version__ = "0.1.0"

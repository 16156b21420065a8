"""Regularity diagnostics for discretized 3D Navier-Stokes fields.

Localized and negative-order Sobolev norms, scale-invariant quantities on
parabolic cylinders, the localized pressure decomposition, epsilon-
regularity criterion evaluators, and a desk-scale pseudo-spectral solver
for generating smooth test data.
"""

from .errors import (
    ConvergenceError,
    FormatError,
    NsregError,
    SolverError,
    ValidationError,
    WindowError,
)
from .fields import (
    Ball,
    Grid3,
    ParabolicCylinder,
    ScalarField3,
    Snapshot,
    SnapshotSeries,
    VectorField3,
    ball_mask,
    load_series,
    save_series,
)
from .norms import (
    DualNormProblem,
    DualNormResult,
    dual_norm,
    dual_norm_dense,
    hsigma_norm,
    lq_ball_norm,
    mean_zero_interpolation_check,
    oscillation_probe,
)
from .criteria import (
    CriterionKind,
    TestFunction,
    cubic_bound_check,
    energy_bound_check,
    energy_inequality_residual,
    evaluate_criterion,
    sup_A_scan,
)
from .pressure import (
    PressureSplit,
    harmonic_dual_bound_check,
    pressure_bound_check,
    spatial_mean,
    split_pressure,
)
from .quantities import (
    QuantityValue,
    beta_of_alpha,
    quantity_A,
    quantity_B,
    quantity_C_alphabeta,
    quantity_C_sigma,
    quantity_D_alphabeta,
    quantity_D_sigma,
)
from .reports import BoundReport, CriterionReport
from .solver import SolverConfig, run, step, taylor_green_init
from .spectral import (
    SpectralWorkspace,
    derivative,
    divergence,
    frac_laplacian,
    get_workspace,
    gradient,
    laplacian,
    leray_project,
    pressure_from_velocity,
    riesz,
    riesz_double_sum,
)

__version__ = "0.1.0"

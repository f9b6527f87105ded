"""Exact solution representations for the time-fractional telegraph equation."""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    DomainError,
    FractelError,
    GridMismatch,
    GrowthViolation,
    NonConvergence,
    QuadratureFailure,
    SingularSystem,
    TruncationWarning,
)
from .field import GridSpec, ScalarField
from .green import (
    BoundaryKind,
    ImageSeriesConfig,
    green_half,
    green_half_dt,
    green_rect,
    green_rect_dt,
    images_needed,
)
from .kernel import decay_bound, g_deriv, gamma_deriv, gamma_fs, h0_l1k
from .oracle import FDConfig, caputo_weights, fd_solve, residual
from .params import QuadratureConfig, TelegraphParams
from .solver import ProblemSpec, eval_field, initial_kernel, solve_cauchy, solve_half, solve_rect
from .specfun import F01Eval, WrightEval, f01, mittag_leffler, recip_gamma, wright_phi, wright_phi_dz

__all__ = [
    "BoundaryKind",
    "ConfigError",
    "DomainError",
    "F01Eval",
    "FDConfig",
    "FractelError",
    "GridMismatch",
    "GridSpec",
    "GrowthViolation",
    "ImageSeriesConfig",
    "NonConvergence",
    "ProblemSpec",
    "QuadratureConfig",
    "QuadratureFailure",
    "ScalarField",
    "SingularSystem",
    "TelegraphParams",
    "TruncationWarning",
    "WrightEval",
    "caputo_weights",
    "decay_bound",
    "eval_field",
    "f01",
    "fd_solve",
    "g_deriv",
    "gamma_deriv",
    "gamma_fs",
    "green_half",
    "green_half_dt",
    "green_rect",
    "green_rect_dt",
    "h0_l1k",
    "images_needed",
    "initial_kernel",
    "mittag_leffler",
    "recip_gamma",
    "residual",
    "solve_cauchy",
    "solve_half",
    "solve_rect",
    "wright_phi",
    "wright_phi_dz",
]

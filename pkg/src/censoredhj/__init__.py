"""Minimal large solutions and ergodic pairs for censored fractional HJ equations.

Library layout:

- ``geometry``: interval domain, graded grids, nodal grid functions
- ``fracop``: censored fractional Laplacian quadrature and half-line constants
- ``constants``: admissible parameters, derived exponent gamma, blow-up coefficient C0
- ``barriers``: closed-form super/subsolution families and residual certificates
- ``solver``: truncated Dirichlet solves and their monotone limit (minimal large solution)
- ``ergodic``: vanishing-discount extraction of (u, c) and its characterization
- ``cli``: configuration, pipeline orchestration, artifact persistence
"""

from .geometry import (
    BlowupProfile,
    Dirichlet,
    GammaProfile,
    GradedGrid,
    GridFunction,
    IntervalDomain,
    build_graded_grid,
    eval_g_gamma,
)
from .fracop import (
    FracKernel,
    OperatorEvaluation,
    censored_flap_apply,
    censored_flap_closed_form,
    halfline_log_constant,
    halfline_power_constant,
    nd_log_constant,
    asymptotic_remainder_order,
    normalization_constant,
)
from .constants import BlowupCoefficient, ProblemParams, c0_root, gamma_exponent

__all__ = [
    "BlowupProfile",
    "Dirichlet",
    "GammaProfile",
    "GradedGrid",
    "GridFunction",
    "IntervalDomain",
    "build_graded_grid",
    "eval_g_gamma",
    "FracKernel",
    "OperatorEvaluation",
    "censored_flap_apply",
    "censored_flap_closed_form",
    "halfline_log_constant",
    "halfline_power_constant",
    "nd_log_constant",
    "asymptotic_remainder_order",
    "normalization_constant",
    "BlowupCoefficient",
    "ProblemParams",
    "c0_root",
    "gamma_exponent",
]

__version__ = "0.1.0"

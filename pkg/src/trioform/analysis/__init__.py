"""Root solving, equilibrium equations, zero searches and gain certificates."""

from __future__ import annotations

from .certificate import GainCertificate, gain_certificate, roots_report
from .cubic import (
    CubicPositiveRoots,
    FRoots,
    ReducedCubic,
    cubic_f_roots,
    solve_reduced_cubic_positive,
    threshold_distance,
)
from .isosceles import (
    BackSubstitution,
    Branch,
    Coefficients,
    IsoscelesCase,
    Regime,
    back_substitution_coefficients,
    coefficients_equilibrium,
    coefficients_moving,
    d_param,
    difference_residual,
    evaluate_eq18_gap,
    iso_equilibrium_residuals,
    iso_moving_residuals,
    quadratic_branch_y,
    vector_equation_residual,
)
from .search import SearchResult, equilibrium_zeros, moving_region_zeros, moving_zeros

__all__ = [
    "BackSubstitution",
    "Branch",
    "Coefficients",
    "CubicPositiveRoots",
    "FRoots",
    "GainCertificate",
    "IsoscelesCase",
    "ReducedCubic",
    "Regime",
    "SearchResult",
    "back_substitution_coefficients",
    "coefficients_equilibrium",
    "coefficients_moving",
    "cubic_f_roots",
    "d_param",
    "difference_residual",
    "equilibrium_zeros",
    "evaluate_eq18_gap",
    "gain_certificate",
    "iso_equilibrium_residuals",
    "iso_moving_residuals",
    "moving_region_zeros",
    "moving_zeros",
    "quadratic_branch_y",
    "roots_report",
    "solve_reduced_cubic_positive",
    "threshold_distance",
    "vector_equation_residual",
]

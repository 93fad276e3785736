"""Specificity tests and the SPC estimator for multi-treatment, multi-outcome data."""

from ._spectool import (
    InputError,
    NumericalError,
    bootstrap_grid,
    critical_value,
    fit_gamma,
    generate,
    lambda_matrix,
    lts_line_fit,
    mr_reduce,
    scenario_beta,
    score_all_pairs,
    spc_estimate,
    specificity_score,
)

__all__ = [
    "InputError",
    "NumericalError",
    "bootstrap_grid",
    "critical_value",
    "fit_gamma",
    "generate",
    "lambda_matrix",
    "lts_line_fit",
    "mr_reduce",
    "scenario_beta",
    "score_all_pairs",
    "spc_estimate",
    "specificity_score",
]

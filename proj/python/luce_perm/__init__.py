"""Luce model on permutations.

Weights are plain lists of positive floats for labels 1..n; permutations are
lists of labels, top card first. Samplers take an explicit seed and give the
same draws on every platform.
"""

from ._core import (
    InvalidArgument,
    NumericalFailure,
    PreconditionViolation,
    braid_sample,
    braid_stationary,
    collision_lambda,
    convergence_test,
    d_inf_bound,
    d_inf_exact,
    f_eval,
    finite_bottom_pmf,
    last_card_table,
    limit_bottom_pmf,
    path_coloring_stationary,
    pmf,
    sample_exponential,
    sample_urn,
    second_position_marginal,
    tv_exact,
    weights,
)

__version__ = "0.1.0"

__all__ = [
    "InvalidArgument",
    "NumericalFailure",
    "PreconditionViolation",
    "braid_sample",
    "braid_stationary",
    "collision_lambda",
    "convergence_test",
    "d_inf_bound",
    "d_inf_exact",
    "f_eval",
    "finite_bottom_pmf",
    "last_card_table",
    "limit_bottom_pmf",
    "path_coloring_stationary",
    "pmf",
    "sample_exponential",
    "sample_urn",
    "second_position_marginal",
    "tv_exact",
    "weights",
]

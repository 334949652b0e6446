"""Dunford-Schwartz counterexample operator: signs, iterates, Cesaro averages and norms."""

from ._core import (
    CellFunction,
    ConstructionError,
    Error,
    FactorSpace,
    cesaro,
    cesaro_exact,
    checkpoints,
    diameter_estimate,
    floor_log3,
    is_power_of_3,
    iterate,
    iterate_exact,
    margin,
    norm_l1,
    norm_l1_plus_linf,
    norm_linf,
    optimal_threshold,
    psi,
    sigma,
    sign_flip_count,
    simulate,
    suite_names,
    verify,
)

__all__ = [
    "CellFunction",
    "ConstructionError",
    "Error",
    "FactorSpace",
    "cesaro",
    "cesaro_exact",
    "checkpoints",
    "diameter_estimate",
    "floor_log3",
    "is_power_of_3",
    "iterate",
    "iterate_exact",
    "margin",
    "norm_l1",
    "norm_l1_plus_linf",
    "norm_linf",
    "optimal_threshold",
    "psi",
    "sigma",
    "sign_flip_count",
    "simulate",
    "suite_names",
    "verify",
]

"""Simulation and verification toolkit for OU type growth-fragmentation processes."""

from ._core import (
    atom_gf,
    atom_levy,
    cumulant,
    cumulant_from_levy,
    digamma,
    estimate_moment,
    in_dom,
    integrate,
    kappa_rrt,
    laplace_exponent,
    log_gamma,
    ou_laplace_transform,
    phi_star,
    rrt_gf,
    rrt_moment,
    rrt_weights,
    run_experiment_json,
    simulate_sizes,
    stationary_gf_moment,
    stationary_laplace,
)

__all__ = [
    "atom_gf",
    "atom_levy",
    "cumulant",
    "cumulant_from_levy",
    "digamma",
    "estimate_moment",
    "in_dom",
    "integrate",
    "kappa_rrt",
    "laplace_exponent",
    "log_gamma",
    "ou_laplace_transform",
    "phi_star",
    "rrt_gf",
    "rrt_moment",
    "rrt_weights",
    "run_experiment_json",
    "simulate_sizes",
    "stationary_gf_moment",
    "stationary_laplace",
]

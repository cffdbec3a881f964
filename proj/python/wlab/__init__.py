"""Weighted parabolic estimates lab: dyadic weighted analysis, solvers and verification suites."""

from ._wlab import (
    ConfigError,
    UsageError,
    experiment_names,
    interval_weight,
    parent_ratio,
    parent_ratio_bound,
    phi_ratio,
    power_integral,
    run_experiment,
    run_suite,
    solve_elliptic,
    solve_parabolic,
    suite_names,
    theta_admissible,
)

__all__ = [
    "ConfigError",
    "UsageError",
    "experiment_names",
    "interval_weight",
    "parent_ratio",
    "parent_ratio_bound",
    "phi_ratio",
    "power_integral",
    "run_experiment",
    "run_suite",
    "solve_elliptic",
    "solve_parabolic",
    "suite_names",
    "theta_admissible",
]

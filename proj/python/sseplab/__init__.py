"""Slow-boundary symmetric exclusion: exact solvers, simulation and continuum predictors."""

from ._core import (
    ConfigError,
    __version__,
    coupling_margins,
    cosine_sum_check,
    double_time_integral,
    duhamel_check,
    estimate_two_point,
    evolve_correlation,
    evolve_profile,
    heat_kernel_dirichlet,
    holder_delta,
    hydro_stationary_profile,
    occupation_time,
    oracle_evolve,
    oracle_stationary,
    ou_equilibrium_variance,
    psi,
    robin_eigenvalues,
    robin_roots,
    run,
    stationary_correlation,
    stationary_covariance,
    stationary_profile,
    version,
)

__all__ = [
    "ConfigError",
    "__version__",
    "coupling_margins",
    "cosine_sum_check",
    "double_time_integral",
    "duhamel_check",
    "estimate_two_point",
    "evolve_correlation",
    "evolve_profile",
    "heat_kernel_dirichlet",
    "holder_delta",
    "hydro_stationary_profile",
    "occupation_time",
    "oracle_evolve",
    "oracle_stationary",
    "ou_equilibrium_variance",
    "psi",
    "robin_eigenvalues",
    "robin_roots",
    "run",
    "stationary_correlation",
    "stationary_covariance",
    "stationary_profile",
    "version",
]

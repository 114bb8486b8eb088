"""Pseudo-prospective test bench for induced-seismicity forecast models."""

from ._core import (
    ConfigError,
    DataError,
    estimate_b_value,
    generate_scenario,
    kernel_mass,
    load_catalog,
    n_test,
    poisson_ci95,
    run_experiment,
    sample_gr_magnitude,
    scenario_expected_count,
    summarize_gain,
    validate_config,
)

__all__ = [
    "ConfigError",
    "DataError",
    "estimate_b_value",
    "generate_scenario",
    "kernel_mass",
    "load_catalog",
    "n_test",
    "poisson_ci95",
    "run_experiment",
    "sample_gr_magnitude",
    "scenario_expected_count",
    "summarize_gain",
    "validate_config",
]

__version__ = "0.1.0"

"""Likelihood inference for the GMOP-G family and its nested sub-models."""

from .diagnostics import (
    REFERENCE_SUMMARY,
    Descriptive,
    GofStatistics,
    descriptive,
    gof_statistics,
    kolmogorov_sf,
    ttt_curve,
    validate_table3,
)
from .likelihood import (
    Convergence,
    Criteria,
    FitResult,
    compare_models,
    fit,
    information_criteria,
    log_likelihood,
    observed_information,
    standard_errors,
)
from .models import ModelConfig, ModelTag, MomentExponential, build_distribution, natural_values

__all__ = [
    "REFERENCE_SUMMARY",
    "Convergence",
    "Criteria",
    "Descriptive",
    "FitResult",
    "GofStatistics",
    "ModelConfig",
    "ModelTag",
    "MomentExponential",
    "build_distribution",
    "compare_models",
    "descriptive",
    "fit",
    "gof_statistics",
    "information_criteria",
    "kolmogorov_sf",
    "log_likelihood",
    "natural_values",
    "observed_information",
    "standard_errors",
    "ttt_curve",
    "validate_table3",
]

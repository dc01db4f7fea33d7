"""The GMOP-G lifetime family: evaluation, properties, likelihood fitting and simulation."""

from .baseline import Baseline, Exponential, Weibull, make_baseline
from .errors import (
    ConvergenceError,
    DatasetValidationError,
    DomainError,
    GmopgError,
    NotPositiveDefiniteError,
    ParameterError,
    QuadratureError,
    UnsupportedExpansionError,
)
from .family import GMOPG, SpecialCase, reduce_special_case

__version__ = "0.1.0"

__all__ = [
    "Baseline",
    "Exponential",
    "Weibull",
    "make_baseline",
    "GMOPG",
    "SpecialCase",
    "reduce_special_case",
    "GmopgError",
    "DomainError",
    "ParameterError",
    "UnsupportedExpansionError",
    "QuadratureError",
    "ConvergenceError",
    "NotPositiveDefiniteError",
    "DatasetValidationError",
    "__version__",
]

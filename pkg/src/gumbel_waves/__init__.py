"""Simulators and numerical checks for branching populations under
selection and mutation with light-tailed fitness distributions."""

__version__ = "0.1.0"

from .logspace import LogReal, log_add, log_sum
from .tails import (
    DiscreteStretched,
    GrowthPrediction,
    SlowlyVarying,
    TailDomainError,
    TailSpec,
    TypeI,
    TypeII,
    TypeIIPrediction,
    gaussian_cdf,
    log_tail,
    predict,
    sample_fitness,
    tail_from_config,
    tail_quantile,
    tail_quantile_log,
    tail_to_config,
)

__all__ = [
    "__version__",
    "LogReal",
    "log_add",
    "log_sum",
    "SlowlyVarying",
    "TypeI",
    "TypeII",
    "DiscreteStretched",
    "TailSpec",
    "TailDomainError",
    "log_tail",
    "tail_quantile",
    "tail_quantile_log",
    "sample_fitness",
    "gaussian_cdf",
    "predict",
    "GrowthPrediction",
    "TypeIIPrediction",
    "tail_to_config",
    "tail_from_config",
]

"""Over-the-air mean estimation: direct aggregation vs type-based multiple access."""

from .channel import ReceivedBlock, awgn_superpose
from .experiment import (
    CurvePoint,
    NoCrossoverError,
    SweepCurve,
    SweepSpec,
    crossover_search,
    empirical_crossover,
    run_sweep,
    run_trial,
)
from .model import (
    ConfigError,
    DataDistribution,
    DataVector,
    DomainError,
    SystemConfig,
    sample_data,
    second_moment,
    true_mean,
)
from .schemes import Scheme, SchemeResult, TypeHistogram
from .theory import LatticeVariant, q_function

__all__ = [
    "ConfigError",
    "CurvePoint",
    "DataDistribution",
    "DataVector",
    "DomainError",
    "LatticeVariant",
    "NoCrossoverError",
    "ReceivedBlock",
    "Scheme",
    "SchemeResult",
    "SweepCurve",
    "SweepSpec",
    "SystemConfig",
    "TypeHistogram",
    "awgn_superpose",
    "crossover_search",
    "empirical_crossover",
    "q_function",
    "run_sweep",
    "run_trial",
    "sample_data",
    "second_moment",
    "true_mean",
]

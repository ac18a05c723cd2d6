"""System configuration, data sources and the target function."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr


class ConfigError(ValueError):
    """Invalid configuration or distribution parameters."""


class DomainError(ValueError):
    """Input outside an operation's domain."""


@dataclass(frozen=True)
class SystemConfig:
    """K devices, N orthogonal resources, transmit power P and noise density N0.

    T is the symbol duration; the noise power in one resource is N0/T and each
    device spends E = T*P per block under both schemes.
    """

    K: int
    N: int
    P: float
    N0: float
    T: float = 1.0

    def __post_init__(self):
        if int(self.K) != self.K or self.K < 1:
            raise ConfigError(f"K must be a positive integer, got {self.K!r}")
        if int(self.N) != self.N or self.N < 2:
            raise ConfigError(f"N must be an integer >= 2, got {self.N!r}")
        for name in ("P", "N0", "T"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise ConfigError(f"{name} must be positive and finite, got {value!r}")

    @classmethod
    def from_snr_db(cls, K: int, N: int, snr_db: float, N0: float = 1.0, T: float = 1.0):
        """Pick P so that E/N0 equals ``snr_db``."""
        return cls(K=K, N=N, P=db_to_linear(snr_db) * N0 / T, N0=N0, T=T)

    @property
    def sigma_w2(self) -> float:
        return self.N0 / self.T

    @property
    def energy(self) -> float:
        return self.T * self.P

    @property
    def e_over_n0(self) -> float:
        return self.energy / self.N0


def db_to_linear(db):
    return 10.0 ** (db / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(x)


class DistributionKind(enum.Enum):
    UNIFORM = "uniform"
    GAUSSIAN = "gaussian"
    GEOMETRIC = "geometric"


@dataclass(frozen=True)
class DataDistribution:
    """A source on {0, ..., N-1}.

    ``GAUSSIAN`` draws a normal variate, clamps it to [0, N-1] and rounds;
    ``GEOMETRIC`` counts failures before the first success and clamps at N-1.
    """

    kind: DistributionKind = DistributionKind.UNIFORM
    mean: float = 0.0
    std: float = 1.0
    p: float = 0.5

    def __post_init__(self):
        if not isinstance(self.kind, DistributionKind):
            object.__setattr__(self, "kind", DistributionKind(self.kind))
        if self.kind is DistributionKind.GAUSSIAN:
            if not (np.isfinite(self.mean) and np.isfinite(self.std)) or self.std < 0:
                raise ConfigError(f"invalid gaussian parameters mean={self.mean} std={self.std}")
        if self.kind is DistributionKind.GEOMETRIC and not 0.0 < self.p < 1.0:
            raise ConfigError(f"geometric probability must lie in (0, 1), got {self.p}")

    @classmethod
    def uniform(cls):
        return cls(DistributionKind.UNIFORM)

    @classmethod
    def gaussian(cls, mean: float, std: float):
        return cls(DistributionKind.GAUSSIAN, mean=mean, std=std)

    @classmethod
    def geometric(cls, p: float):
        return cls(DistributionKind.GEOMETRIC, p=p)

    def pmf(self, N: int) -> np.ndarray:
        """Exact probabilities of each value in {0, ..., N-1}."""
        n = np.arange(N)
        if self.kind is DistributionKind.UNIFORM:
            return np.full(N, 1.0 / N)
        if self.kind is DistributionKind.GAUSSIAN:
            if self.std == 0:
                out = np.zeros(N)
                out[int(np.rint(np.clip(self.mean, 0, N - 1)))] = 1.0
                return out
            edges = (np.arange(N + 1) - 0.5 - self.mean) / self.std
            cdf = ndtr(edges)
            cdf[0], cdf[-1] = 0.0, 1.0
            return np.diff(cdf)
        out = self.p * (1.0 - self.p) ** n
        out[-1] = (1.0 - self.p) ** (N - 1)
        return out

    def sample(self, size, N: int, rng: np.random.Generator) -> np.ndarray:
        if self.kind is DistributionKind.UNIFORM:
            return rng.integers(0, N, size=size, dtype=np.int64)
        if self.kind is DistributionKind.GAUSSIAN:
            x = rng.normal(self.mean, self.std, size=size)
            return np.rint(np.clip(x, 0, N - 1)).astype(np.int64)
        return np.minimum(rng.geometric(self.p, size=size) - 1, N - 1).astype(np.int64)


@dataclass(frozen=True)
class DataVector:
    """The K readings of one trial."""

    values: np.ndarray = field(repr=False)
    N: int

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.ndim != 1 or values.size == 0:
            raise DomainError("data must be a non-empty 1-d sequence")
        if not np.issubdtype(values.dtype, np.integer):
            if not np.all(values == np.floor(values)):
                raise DomainError("data values must be integers")
            values = values.astype(np.int64)
        if values.min() < 0 or values.max() >= self.N:
            raise DomainError(f"data values must lie in [0, {self.N - 1}]")
        values = values.astype(np.int64, copy=True)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def K(self) -> int:
        return int(self.values.size)

    def __len__(self):
        return self.K


def sample_data(dist: DataDistribution, cfg: SystemConfig, rng: np.random.Generator) -> DataVector:
    return DataVector(dist.sample(cfg.K, cfg.N, rng), cfg.N)


def true_mean(data) -> float:
    """Sample mean from an exact integer sum, divided once."""
    values = data.values if isinstance(data, DataVector) else np.asarray(data)
    if values.size == 0:
        raise DomainError("mean of an empty data vector")
    return int(values.sum(dtype=np.int64)) / values.size


def second_moment(dist: DataDistribution, N: int) -> float:
    """E{s^2} of the source on {0, ..., N-1}."""
    if dist.kind is DistributionKind.UNIFORM:
        return (N - 1) * (2 * N - 1) / 6
    n = np.arange(N, dtype=float)
    return float(np.dot(dist.pmf(N), n * n))

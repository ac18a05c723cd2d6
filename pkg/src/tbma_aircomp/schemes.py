"""Direct aggregation and type-based multiple access codecs.

Every function here works on a single trial or on a stack of trials: the
resource index is always the last axis, and any leading axes are carried
through unchanged.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .channel import ReceivedBlock
from .model import ConfigError, DataVector, DomainError, SystemConfig


class Scheme(enum.Enum):
    DA = "da"
    TBMA_NAIVE = "tbma_naive"
    TBMA_LATTICE = "tbma_lattice"

    @property
    def index(self) -> int:
        return list(Scheme).index(self)


@dataclass(frozen=True)
class TypeHistogram:
    """Per-resource device counts K_n; ``counts.sum(-1) == total``."""

    counts: np.ndarray
    total: int

    @property
    def N(self) -> int:
        return self.counts.shape[-1]

    def first_moment(self) -> np.ndarray:
        """Integer sum of n * K_n, which equals the sum of the readings."""
        return self.counts @ np.arange(self.N, dtype=np.int64)


@dataclass(frozen=True)
class SchemeResult:
    estimate: float
    truth: float
    squared_error: float

    @classmethod
    def from_estimate(cls, estimate: float, truth: float):
        return cls(float(estimate), float(truth), float((estimate - truth) ** 2))


def _values(data) -> np.ndarray:
    return data.values if isinstance(data, DataVector) else np.asarray(data, dtype=np.int64)


def _check_block(block: ReceivedBlock, cfg: SystemConfig):
    if block.N != cfg.N:
        raise DomainError(f"block has {block.N} resources, config expects {cfg.N}")


# -- direct aggregation -------------------------------------------------------


def da_amplitude(cfg: SystemConfig, E_S: float) -> float:
    """Per-unit-datum amplitude sqrt(P / (N E_S)) of one repetition."""
    if not E_S > 0:
        raise ConfigError("direct aggregation needs a source with E_S > 0")
    return float(np.sqrt(cfg.P / (cfg.N * E_S)))


def da_symbols(data, cfg: SystemConfig, E_S: float) -> np.ndarray:
    """Amplitude each device sends on every one of the N repetitions."""
    return da_amplitude(cfg, E_S) * _values(data)


def da_transmit_sums(data, cfg: SystemConfig, E_S: float) -> np.ndarray:
    total = _values(data).sum(axis=-1, dtype=np.int64)
    return da_sums_from_total(total, cfg, E_S)


def da_sums_from_total(total, cfg: SystemConfig, E_S: float) -> np.ndarray:
    sums = da_amplitude(cfg, E_S) * np.asarray(total, dtype=float)
    return np.repeat(sums[..., None], cfg.N, axis=-1)


def da_estimate(block: ReceivedBlock, cfg: SystemConfig, E_S: float):
    """Scaled sum of the N repetitions; unbiased with variance E_S sigma_w^2 / (K^2 P)."""
    _check_block(block, cfg)
    return np.sqrt(E_S / (cfg.N * cfg.P)) * block.y.sum(axis=-1) / cfg.K


# -- type-based multiple access -----------------------------------------------


def tbma_encode(data, N: int) -> TypeHistogram:
    values = _values(data)
    if values.size and (values.min() < 0 or values.max() >= N):
        raise DomainError(f"data values must lie in [0, {N - 1}]")
    K = values.shape[-1]
    flat = values.reshape(-1, K)
    offsets = (N * np.arange(flat.shape[0], dtype=np.int64))[:, None]
    counts = np.bincount((flat + offsets).ravel(), minlength=flat.shape[0] * N)
    return TypeHistogram(counts.reshape(values.shape[:-1] + (N,)), K)


def tbma_symbols(data, cfg: SystemConfig) -> np.ndarray:
    """(K, N) matrix: device k sends sqrt(P) on resource s_k and nothing elsewhere."""
    values = _values(data)
    x = np.zeros(values.shape + (cfg.N,))
    np.put_along_axis(x, values[..., None], np.sqrt(cfg.P), axis=-1)
    return x


def tbma_transmit_sums(hist: TypeHistogram, cfg: SystemConfig) -> np.ndarray:
    return np.sqrt(cfg.P) * hist.counts.astype(float)


def tbma_naive_estimate(block: ReceivedBlock, cfg: SystemConfig, K: int):
    """First moment of the noisy, unprojected histogram."""
    _check_block(block, cfg)
    return block.y @ np.arange(cfg.N, dtype=float) / (np.sqrt(cfg.P) * K)


def round_half_away(x):
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def lattice_project(block: ReceivedBlock, cfg: SystemConfig) -> np.ndarray:
    """Nearest non-negative integer to each normalized observation y_n / sqrt(P).

    Half-integers round away from zero; negative observations map to 0.
    """
    _check_block(block, cfg)
    projected = np.maximum(round_half_away(block.y / np.sqrt(cfg.P)), 0.0)
    return projected.astype(np.int64)


def tbma_lattice_estimate(block: ReceivedBlock, cfg: SystemConfig, K: int):
    counts = lattice_project(block, cfg)
    return (counts @ np.arange(cfg.N, dtype=np.int64)) / K


def device_energy(symbols, cfg: SystemConfig, repetitions: int = 1) -> np.ndarray:
    """Energy T * sum_n |x_{k,n}|^2 spent by each device.

    ``symbols`` holds one amplitude per resource on the last axis, or a single
    amplitude repeated ``repetitions`` times (direct aggregation).
    """
    x = np.asarray(symbols, dtype=float)
    if repetitions == 1:
        return cfg.T * np.sum(x * x, axis=-1)
    return cfg.T * repetitions * x * x

"""Coherent AWGN multiple-access channel after matched filtering."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import DomainError, SystemConfig

# Perfect CSI: every device's channel is compensated to unit gain.
CHANNEL_GAIN = 1.0


@dataclass(frozen=True)
class ReceivedBlock:
    """Received samples ``y`` with the resource index on the last axis.

    Leading axes, if any, index independent trials.
    """

    y: np.ndarray
    sigma_w2: float

    @property
    def N(self) -> int:
        return self.y.shape[-1]


def awgn_superpose(tx_sums, cfg: SystemConfig, rng: np.random.Generator) -> ReceivedBlock:
    """Add white Gaussian noise of power N0/T to already-superposed symbols."""
    tx = np.asarray(tx_sums, dtype=float)
    if tx.shape[-1:] != (cfg.N,):
        raise DomainError(f"expected {cfg.N} resources on the last axis, got shape {tx.shape}")
    if not np.all(np.isfinite(tx)):
        raise DomainError("transmitted sums must be finite")
    noise = rng.standard_normal(tx.shape) * np.sqrt(cfg.sigma_w2)
    return ReceivedBlock(CHANNEL_GAIN * tx + noise, cfg.sigma_w2)

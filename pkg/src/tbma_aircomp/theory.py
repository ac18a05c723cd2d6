"""Closed-form MSE of each scheme as a function of E/N0.

All functions take E/N0 on a linear scale and accept numpy arrays for it.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .model import SystemConfig


def q_function(x):
    """Gaussian tail probability P(Z > x)."""
    return 0.5 * erfc(np.asarray(x, dtype=float) / np.sqrt(2.0))


def sum_of_squares(N: int) -> int:
    """sum_{n=0}^{N-1} n^2, exactly."""
    return N * (N - 1) * (2 * N - 1) // 6


class LatticeVariant(enum.Enum):
    # 2Q at every resource, summed exactly.
    EXACT_SUM = "exact_sum"
    # (N^3 / 3K^2) Q, the closed form with a single Q.
    PAPER_APPROX = "paper_approx"
    # 2Q inside, Q at the two edge resources 0 and N-1.
    PAPER_EDGE_RULE = "paper_edge_rule"
    # No denoising gain: the exact naive MSE.
    LOW_SNR = "low_snr"


def da_mse(K: int, E_S: float, e_over_n0):
    return E_S / K**2 / np.asarray(e_over_n0, dtype=float)


def naive_mse(K: int, N: int, e_over_n0, exact: bool = True):
    weight = sum_of_squares(N) if exact else N**3 / 3
    return weight / K**2 / np.asarray(e_over_n0, dtype=float)


def symbol_error_rate(e_over_n0, edge: bool = False):
    """Probability that rounding moves a count off its lattice point.

    Interior points have two neighbours; ``edge`` keeps only one side.
    """
    tail = q_function(np.sqrt(np.asarray(e_over_n0, dtype=float) / 4.0))
    return tail if edge else 2.0 * tail


def lattice_high_snr_mse(K: int, N: int, e_over_n0, variant=LatticeVariant.EXACT_SUM):
    variant = LatticeVariant(variant)
    gamma = np.asarray(e_over_n0, dtype=float)
    if variant is LatticeVariant.EXACT_SUM:
        return sum_of_squares(N) * symbol_error_rate(gamma) / K**2
    if variant is LatticeVariant.PAPER_APPROX:
        return N**3 / 3 * q_function(np.sqrt(gamma / 4.0)) / K**2
    if variant is LatticeVariant.PAPER_EDGE_RULE:
        # resource 0 carries zero weight, so only N-1 changes
        interior = sum_of_squares(N) - (N - 1) ** 2
        return (interior * symbol_error_rate(gamma) + (N - 1) ** 2 * symbol_error_rate(gamma, edge=True)) / K**2
    return naive_mse(K, N, gamma, exact=True)


def exponential_envelope(e_over_n0):
    """Shape exp(-E / 8N0) of the high-SNR lattice decay; unnormalized."""
    return np.exp(-np.asarray(e_over_n0, dtype=float) / 8.0)


# -- SystemConfig front ends -----------------------------------------------------


def mse_da(cfg: SystemConfig, E_S: float) -> float:
    return float(da_mse(cfg.K, E_S, cfg.e_over_n0))


def mse_tbma_naive(cfg: SystemConfig, exact: bool = True) -> float:
    return float(naive_mse(cfg.K, cfg.N, cfg.e_over_n0, exact))


def mse_tbma_lattice_high_snr(cfg: SystemConfig, variant=LatticeVariant.EXACT_SUM) -> float:
    return float(lattice_high_snr_mse(cfg.K, cfg.N, cfg.e_over_n0, variant))


def mse_tbma_lattice_low_snr(cfg: SystemConfig) -> float:
    return mse_tbma_naive(cfg, exact=True)


@dataclass(frozen=True)
class TheoryPoint:
    e_over_n0: float
    mse_da: float
    mse_tbma_naive_exact: float
    mse_tbma_naive_approx: float
    mse_lattice_high_snr_exact: float
    mse_lattice_high_snr_paper: float
    mse_lattice_low_snr: float


def theory_point(cfg: SystemConfig, E_S: float) -> TheoryPoint:
    return TheoryPoint(
        e_over_n0=cfg.e_over_n0,
        mse_da=mse_da(cfg, E_S),
        mse_tbma_naive_exact=mse_tbma_naive(cfg, exact=True),
        mse_tbma_naive_approx=mse_tbma_naive(cfg, exact=False),
        mse_lattice_high_snr_exact=mse_tbma_lattice_high_snr(cfg, LatticeVariant.EXACT_SUM),
        mse_lattice_high_snr_paper=mse_tbma_lattice_high_snr(cfg, LatticeVariant.PAPER_APPROX),
        mse_lattice_low_snr=mse_tbma_lattice_low_snr(cfg),
    )

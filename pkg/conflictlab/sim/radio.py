"""
Radio propagation: log-distance path loss with AR(1) lognormal shadowing.
"""

import math
from typing import Optional

import numpy as np

from ..models import CellState, UeState
from ..scenario import RadioConfig


def path_loss_db(distance_m, radio: RadioConfig):
    """PL0 + 10 n log10(d / d0), with d clamped to d_min. Works on scalars and arrays."""
    d = np.maximum(distance_m, radio.d_min_m)
    return radio.pl0_db + 10.0 * radio.exponent * np.log10(d / radio.d0_m)


def compute_rsrp(
    cell: CellState,
    ue: UeState,
    radio: RadioConfig,
    shadowing_db: float = 0.0,
) -> float:
    """
    RSRP of ``cell`` at ``ue``.

    Args:
        cell: Transmitting cell
        ue: Receiving UE
        radio: Propagation constants
        shadowing_db: Shadowing sample for this (ue, cell) pair

    Returns:
        RSRP in dBm
    """
    dx = ue.position[0] - cell.position[0]
    dy = ue.position[1] - cell.position[1]
    distance = max(math.hypot(dx, dy), radio.d_min_m)
    loss = radio.pl0_db + 10.0 * radio.exponent * math.log10(distance / radio.d0_m)
    return cell.tx_power - loss + shadowing_db


def rsrp_matrix(
    ue_positions: np.ndarray,
    cell_positions: np.ndarray,
    tx_power: np.ndarray,
    radio: RadioConfig,
    shadowing: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Vectorised RSRP for every (ue, cell) pair, shape (U, C)."""
    deltas = ue_positions[:, None, :] - cell_positions[None, :, :]
    distances = np.sqrt((deltas ** 2).sum(axis=-1))
    rsrp = tx_power[None, :] - path_loss_db(distances, radio)
    if shadowing is not None:
        rsrp = rsrp + shadowing
    return rsrp


class ShadowingField:
    """
    Per-(ue, cell) lognormal shadowing, temporally correlated with AR(1).

    s_t = rho * s_{t-1} + sqrt(1 - rho^2) * sigma * e_t, s_0 ~ N(0, sigma^2).
    The marginal standard deviation stays sigma at every tick.
    """

    def __init__(self, ue_count: int, cell_count: int, radio: RadioConfig, rng: np.random.Generator):
        self.sigma = radio.shadowing_sigma_db
        self.rho = radio.shadowing_rho
        self.rng = rng
        self.shape = (ue_count, cell_count)
        if self.sigma > 0:
            self.values = self.sigma * rng.standard_normal(self.shape)
        else:
            self.values = np.zeros(self.shape)

    def advance(self) -> np.ndarray:
        """Move one tick forward and return the new samples."""
        if self.sigma > 0:
            innovation = self.rng.standard_normal(self.shape)
            self.values = self.rho * self.values + math.sqrt(1.0 - self.rho ** 2) * self.sigma * innovation
        return self.values

"""
UE mobility models.

Both models are deterministic given their generator; neither depends on the
radio state, so trajectories are identical across parameter settings.
"""

import logging
from abc import ABC, abstractmethod
from typing import List, Sequence, Tuple

import numpy as np

logger = logging.getLogger(__name__)


def reflect(positions: np.ndarray, velocities: np.ndarray, box: np.ndarray) -> None:
    """Fold positions back into ``box`` and flip the velocity component that crossed it."""
    low, high = box[0], box[1]
    below = positions < low
    above = positions > high
    positions[below] = (2 * low - positions)[below]
    positions[above] = (2 * high - positions)[above]
    velocities[below | above] *= -1
    np.clip(positions, low, high, out=positions)


class MobilityModel(ABC):
    """Base class for mobility models."""

    def __init__(self, ue_count: int):
        self.ue_count = ue_count
        self.positions = np.zeros((ue_count, 2))
        self.velocities = np.zeros((ue_count, 2))

    @abstractmethod
    def advance(self, dt_s: float) -> None:
        """Move every UE forward by ``dt_s`` seconds."""
        pass


class RandomWaypointMobility(MobilityModel):
    """Random waypoint inside a bounding box, with reflection as a safety net."""

    def __init__(
        self,
        ue_count: int,
        box: np.ndarray,
        speed_range: Tuple[float, float],
        rng: np.random.Generator,
    ):
        super().__init__(ue_count)
        self.box = box
        self.speed_min, self.speed_max = speed_range
        self.rng = rng
        self.positions = self._draw_points(ue_count)
        self.waypoints = self._draw_points(ue_count)
        self.speeds = self._draw_speeds(ue_count)
        self._update_velocities()

    def _draw_points(self, n: int) -> np.ndarray:
        return self.box[0] + self.rng.random((n, 2)) * (self.box[1] - self.box[0])

    def _draw_speeds(self, n: int) -> np.ndarray:
        return self.speed_min + self.rng.random(n) * (self.speed_max - self.speed_min)

    def _update_velocities(self) -> None:
        heading = self.waypoints - self.positions
        distance = np.sqrt((heading ** 2).sum(axis=1))
        unit = np.divide(heading, distance[:, None], out=np.zeros_like(heading), where=distance[:, None] > 0)
        self.velocities = unit * self.speeds[:, None]

    def advance(self, dt_s: float) -> None:
        if self.ue_count == 0:
            return
        heading = self.waypoints - self.positions
        distance = np.sqrt((heading ** 2).sum(axis=1))
        step = self.speeds * dt_s
        arrived = distance <= step

        moving = ~arrived
        self.positions[moving] += (heading[moving] / distance[moving, None]) * step[moving, None]
        self.positions[arrived] = self.waypoints[arrived]

        n_arrived = int(arrived.sum())
        if n_arrived:
            self.waypoints[arrived] = self._draw_points(n_arrived)
            self.speeds[arrived] = self._draw_speeds(n_arrived)

        self._update_velocities()
        reflect(self.positions, self.velocities, self.box)


class ScriptedMobility(MobilityModel):
    """
    Each UE loops over its own list of waypoints at a fixed speed.

    A single-waypoint path keeps the UE stationary.
    """

    def __init__(self, paths: Sequence[Sequence[Tuple[float, float]]], speed_mps: float):
        super().__init__(len(paths))
        self.paths: List[np.ndarray] = [np.asarray(path, dtype=float) for path in paths]
        self.speed = speed_mps
        self.next_index = [1 % len(path) for path in self.paths]
        for i, path in enumerate(self.paths):
            self.positions[i] = path[0]

    def advance(self, dt_s: float) -> None:
        for i, path in enumerate(self.paths):
            if len(path) == 1 or self.speed <= 0:
                self.velocities[i] = 0.0
                continue
            remaining = self.speed * dt_s
            while remaining > 1e-12:
                target = path[self.next_index[i]]
                heading = target - self.positions[i]
                distance = float(np.hypot(heading[0], heading[1]))
                if distance <= remaining:
                    self.positions[i] = target
                    remaining -= distance
                    self.next_index[i] = (self.next_index[i] + 1) % len(path)
                    if distance == 0.0 and remaining == self.speed * dt_s:
                        # Degenerate loop of identical waypoints.
                        break
                else:
                    self.positions[i] = self.positions[i] + heading / distance * remaining
                    remaining = 0.0
            heading = path[self.next_index[i]] - self.positions[i]
            norm = float(np.hypot(heading[0], heading[1]))
            self.velocities[i] = heading / norm * self.speed if norm > 0 else 0.0

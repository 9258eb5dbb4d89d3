"""
Cell layouts and neighbour relations.
"""

from typing import Dict, List

import numpy as np

from ..scenario import TopologyConfig

# Axial directions for walking a hexagonal ring.
_HEX_DIRECTIONS = [(1, 0), (1, -1), (0, -1), (-1, 0), (-1, 1), (0, 1)]


def hex_positions(cell_count: int, spacing_m: float) -> np.ndarray:
    """
    Site positions on a hexagonal grid, centre first then ring by ring.

    Args:
        cell_count: 1, 7, 19 or 37
        spacing_m: Inter-site distance

    Returns:
        Array of shape (cell_count, 2)
    """
    axial = [(0, 0)]
    ring = 1
    while len(axial) < cell_count:
        q, r = -ring, ring  # start at direction 4 scaled by ring
        for dq, dr in _HEX_DIRECTIONS:
            for _ in range(ring):
                axial.append((q, r))
                q, r = q + dq, r + dr
        ring += 1
    axial = axial[:cell_count]

    positions = np.array(
        [[spacing_m * (q + r / 2.0), spacing_m * (np.sqrt(3.0) / 2.0) * r] for q, r in axial],
        dtype=float,
    )
    return positions


def line_positions(cell_count: int, spacing_m: float) -> np.ndarray:
    """Sites on the x axis, ``spacing_m`` apart."""
    return np.array([[i * spacing_m, 0.0] for i in range(cell_count)], dtype=float)


def build_positions(config: TopologyConfig) -> np.ndarray:
    if config.layout == "hex":
        return hex_positions(config.cell_count, config.spacing_m)
    return line_positions(config.cell_count, config.spacing_m)


def build_neighbors(positions: np.ndarray, max_distance_m: float) -> Dict[int, List[int]]:
    """Cells within ``max_distance_m`` of each other, sorted by id."""
    deltas = positions[:, None, :] - positions[None, :, :]
    distances = np.sqrt((deltas ** 2).sum(axis=-1))
    neighbors = {}
    for cell in range(len(positions)):
        close = np.nonzero((distances[cell] <= max_distance_m) & (np.arange(len(positions)) != cell))[0]
        neighbors[cell] = [int(c) for c in close]
    return neighbors


def bounding_box(positions: np.ndarray, spacing_m: float) -> np.ndarray:
    """Box [[xmin, ymin], [xmax, ymax]] covering the sites plus half a spacing."""
    margin = spacing_m / 2.0
    return np.array([positions.min(axis=0) - margin, positions.max(axis=0) + margin])

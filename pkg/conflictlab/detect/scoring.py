"""
Evidence scorers for implicit conflict detection.
"""

from typing import Optional, Protocol

import numpy as np

from ..exceptions import InsufficientHistoryError


class EvidenceScorer(Protocol):
    """Scores how strongly an xApp's action series explains a degradation series."""

    def score(self, actions: np.ndarray, degradations: np.ndarray, lag_max: int) -> float:
        ...


def pearson(x: np.ndarray, y: np.ndarray) -> Optional[float]:
    """Pearson correlation, None when either series is constant."""
    if len(x) < 2 or np.ptp(x) == 0 or np.ptp(y) == 0:
        return None
    value = float(np.corrcoef(x, y)[0, 1])
    return float(np.clip(value, -1.0, 1.0))


class LaggedCorrelationScorer:
    """
    max over lag l in [0, lag_max] of corr(a[t - l], d[t]).

    Lags at which either series is constant are skipped; with no usable lag
    the score is 0.
    """

    def __init__(self, min_points: int = 3):
        self.min_points = min_points

    def score(self, actions: np.ndarray, degradations: np.ndarray, lag_max: int) -> float:
        """
        Raises:
            InsufficientHistoryError: If the series are shorter than lag_max + min_points.
        """
        actions = np.asarray(actions, dtype=float)
        degradations = np.asarray(degradations, dtype=float)
        if len(actions) != len(degradations):
            raise ValueError("action and degradation series must have the same length")
        if len(degradations) < lag_max + self.min_points:
            raise InsufficientHistoryError(
                f"{len(degradations)} windows of history, need {lag_max + self.min_points}"
            )

        best: Optional[float] = None
        n = len(degradations)
        for lag in range(lag_max + 1):
            r = pearson(actions[: n - lag], degradations[lag:])
            if r is not None and (best is None or r > best):
                best = r
        return 0.0 if best is None else best

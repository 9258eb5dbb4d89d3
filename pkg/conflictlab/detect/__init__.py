"""
KPI anomaly detection and conflict classification.
"""

from .anomaly import KPI_POLARITY, AnomalyDetector, RollingBaseline, detect_anomaly, flag_series, z_score
from .conflicts import (
    ConflictDetector,
    action_window,
    classify,
    detect_direct,
    detect_implicit,
    detect_indirect,
    is_direct,
    is_implicit,
    is_indirect,
)
from .scoring import EvidenceScorer, LaggedCorrelationScorer, pearson

__all__ = [
    "AnomalyDetector",
    "ConflictDetector",
    "EvidenceScorer",
    "KPI_POLARITY",
    "LaggedCorrelationScorer",
    "RollingBaseline",
    "action_window",
    "classify",
    "detect_anomaly",
    "detect_direct",
    "detect_implicit",
    "detect_indirect",
    "flag_series",
    "is_direct",
    "is_implicit",
    "is_indirect",
    "pearson",
    "z_score",
]

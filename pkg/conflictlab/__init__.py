"""
ConflictLab - xApp conflict laboratory for a Near-RT RIC

A deterministic multi-cell handover simulator driven by competing xApps,
with KPI monitoring, anomaly detection, conflict classification and
priority-based mitigation.
"""

__version__ = "1.0.0"
__author__ = "ConflictLab Team"

"""
RAN simulator for ConflictLab.

Cells, UEs, log-distance propagation with correlated shadowing, A3 handovers
with hysteresis/TTT/CIO, radio-link failures and windowed KPI aggregation.
"""

from .handover import A3Decision, classify_handover, evaluate_a3, is_pingpong
from .kpi import collect_kpis
from .radio import ShadowingField, compute_rsrp, path_loss_db, rsrp_matrix
from .simulator import SimSnapshot, Simulator, format_target, parse_target
from .topology import build_neighbors, build_positions, hex_positions, line_positions

__all__ = [
    "A3Decision",
    "ShadowingField",
    "SimSnapshot",
    "Simulator",
    "build_neighbors",
    "build_positions",
    "classify_handover",
    "collect_kpis",
    "compute_rsrp",
    "evaluate_a3",
    "format_target",
    "hex_positions",
    "is_pingpong",
    "line_positions",
    "parse_target",
    "path_loss_db",
    "rsrp_matrix",
]

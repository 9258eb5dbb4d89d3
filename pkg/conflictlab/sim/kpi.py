"""
KPI aggregation over windows (the KPIMON role).
"""

from typing import Dict, List, Sequence

import numpy as np

from ..models import EventKind, KpiSample, SimEvent

# Event kind -> KpiSample field. Every kind is tallied on from_cell except call
# blocks, which belong to the cell that refused the UE.
_COUNTERS = {
    EventKind.RLF: "rlf_count",
    EventKind.TOO_EARLY_HO: "too_early_count",
    EventKind.TOO_LATE_HO: "too_late_count",
}


def collect_kpis(
    events: Sequence[SimEvent],
    loads: np.ndarray,
    window_end_tick: int,
    current_loads: Sequence[float],
) -> List[KpiSample]:
    """
    Aggregate one window of events and load samples into per-cell KPIs.

    Args:
        events: Events whose tick falls inside the window
        loads: Load samples of the window, shape (ticks, cells); may be empty
        window_end_tick: Tick closing the window
        current_loads: Loads at the window end, used when ``loads`` is empty

    Returns:
        One KpiSample per cell, ordered by cell id
    """
    cell_count = len(current_loads)
    loads = np.asarray(loads, dtype=float)
    if loads.size:
        mean_load = loads.reshape(-1, cell_count).mean(axis=0)
    else:
        mean_load = np.asarray(current_loads, dtype=float)

    counts: Dict[str, np.ndarray] = {
        name: np.zeros(cell_count, dtype=int)
        for name in ("call_blocks", "rlf_count", "ho_count", "pingpong_count",
                     "too_early_count", "too_late_count")
    }
    for event in events:
        if event.kind == EventKind.CALL_BLOCK:
            counts["call_blocks"][event.to_cell] += 1
        elif event.kind == EventKind.HANDOVER:
            counts["ho_count"][event.from_cell] += 1
        elif event.kind == EventKind.PING_PONG_HANDOVER:
            counts["ho_count"][event.from_cell] += 1
            counts["pingpong_count"][event.from_cell] += 1
        else:
            counts[_COUNTERS[event.kind]][event.from_cell] += 1

    return [
        KpiSample(
            window_end_tick=window_end_tick,
            cell_id=cell,
            mean_load=round(min(1.0, float(mean_load[cell])), 6),
            **{name: int(values[cell]) for name, values in counts.items()},
        )
        for cell in range(cell_count)
    ]

"""
Mobility load balancing: shift the handover boundary of the busiest cell with CIO.
"""

import logging
from typing import Dict, List

from ..models import (
    CIO_RANGE_DB, KpiId, KpiWindow, ParameterSnapshot, ParamId, ProposedAction, XAppDescriptor,
)
from ..scenario import MlbPolicy
from ..sim.simulator import format_target
from .base import XApp

logger = logging.getLogger(__name__)


class MlbXApp(XApp):
    """Threshold-step MLB controller acting on CIO."""

    name = "mlb"

    def __init__(self, policy: MlbPolicy, neighbors: Dict[int, List[int]]):
        super().__init__(neighbors)
        self.policy = policy
        self._descriptor = XAppDescriptor(
            xapp_id=self.name,
            declared_params=frozenset({ParamId.CIO}),
            declared_impacts=frozenset({KpiId.MEAN_LOAD, KpiId.HO_COUNT, KpiId.PINGPONG_COUNT}),
        )

    @property
    def descriptor(self) -> XAppDescriptor:
        return self._descriptor

    def decide(self, window: KpiWindow, params: ParameterSnapshot) -> List[ProposedAction]:
        loads = {s.cell_id: s.mean_load for s in window.samples}
        if len(loads) < 2:
            return []

        busiest = min(loads, key=lambda c: (-loads[c], c))
        candidates = [n for n in self.neighbors.get(busiest, []) if n in loads]
        if not candidates:
            return []
        idlest = min(candidates, key=lambda c: (loads[c], c))

        if loads[busiest] - loads[idlest] <= self.policy.load_imbalance_threshold:
            return []

        actions = []
        handover = params.handover
        current = handover.cio_for(busiest, idlest)
        raised = min(current + self.policy.cio_step_db, CIO_RANGE_DB[1])
        if raised != current:
            actions.append(ProposedAction(target=format_target(busiest, idlest), param_id=ParamId.CIO, value=raised))

        current = handover.cio_for(idlest, busiest)
        lowered = max(current - self.policy.cio_step_db, CIO_RANGE_DB[0])
        if lowered != current:
            actions.append(ProposedAction(target=format_target(idlest, busiest), param_id=ParamId.CIO, value=lowered))

        if actions:
            logger.debug(
                f"MLB: cell {busiest} load {loads[busiest]:.2f} vs neighbor {idlest} "
                f"load {loads[idlest]:.2f}, {len(actions)} CIO writes"
            )
        return actions

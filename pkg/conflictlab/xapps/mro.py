"""
Mobility robustness optimisation: tune H and TTT per cell.
"""

import logging
from typing import Dict, List, Optional

from ..models import (
    H_RANGE_DB, TTT_VALUES_MS, KpiId, KpiSample, KpiWindow,
    ParameterSnapshot, ParamId, ProposedAction, XAppDescriptor,
)
from ..scenario import MroPolicy
from ..sim.simulator import format_target
from .base import XApp

logger = logging.getLogger(__name__)


def step_ttt(current: int, steps: int) -> Optional[int]:
    """Move ``steps`` positions through the TTT set; None when already at the edge."""
    index = TTT_VALUES_MS.index(current)
    moved = min(max(index + steps, 0), len(TTT_VALUES_MS) - 1)
    return None if moved == index else TTT_VALUES_MS[moved]


class MroXApp(XApp):
    """
    Threshold-step MRO controller.

    Ping-pongs above threshold make handovers harder (H up, then TTT up once H
    saturates). Otherwise RLFs with too-late attribution make them easier
    (H down, then TTT down). Ping-pong correction wins when both apply.
    """

    name = "mro"

    def __init__(self, policy: MroPolicy, neighbors: Dict[int, List[int]]):
        super().__init__(neighbors)
        self.policy = policy
        self._descriptor = XAppDescriptor(
            xapp_id=self.name,
            declared_params=frozenset({ParamId.H, ParamId.TTT}),
            declared_impacts=frozenset({KpiId.RLF_COUNT, KpiId.HO_COUNT, KpiId.PINGPONG_COUNT}),
        )

    @property
    def descriptor(self) -> XAppDescriptor:
        return self._descriptor

    def decide(self, window: KpiWindow, params: ParameterSnapshot) -> List[ProposedAction]:
        actions = []
        for sample in sorted(window.samples, key=lambda s: s.cell_id):
            action = self._decide_cell(sample, params)
            if action is not None:
                actions.append(action)
        if actions:
            logger.debug(f"MRO: {len(actions)} writes at window {window.window_index}")
        return actions

    def _decide_cell(self, sample: KpiSample, params: ParameterSnapshot) -> Optional[ProposedAction]:
        if sample.pingpong_count > self.policy.pingpong_rate_threshold:
            direction = 1
        elif sample.rlf_count > self.policy.rlf_threshold and sample.too_late_count > 0:
            direction = -1
        else:
            return None

        cell = sample.cell_id
        target = format_target(cell)
        h = params.handover.h_for(cell)
        new_h = min(max(h + direction * self.policy.h_step_db, H_RANGE_DB[0]), H_RANGE_DB[1])
        if new_h != h:
            return ProposedAction(target=target, param_id=ParamId.H, value=new_h)

        new_ttt = step_ttt(params.handover.ttt_for(cell), direction * self.policy.ttt_step)
        if new_ttt is None:
            return None
        return ProposedAction(target=target, param_id=ParamId.TTT, value=float(new_ttt))

"""
Power xApp that declares only a load impact while its writes also drive RLFs.
"""

from typing import Dict, List

from ..models import (
    TX_POWER_RANGE_DBM, KpiId, KpiWindow, ParameterSnapshot, ParamId, ProposedAction, XAppDescriptor,
)
from ..scenario import StealthPolicy
from ..sim.simulator import format_target
from .base import XApp


class StealthXApp(XApp):
    """Lowers the victim cell's transmit power every ``trigger_every_windows`` windows."""

    name = "stealth"

    def __init__(self, policy: StealthPolicy, neighbors: Dict[int, List[int]]):
        super().__init__(neighbors)
        self.policy = policy
        self._descriptor = XAppDescriptor(
            xapp_id=self.name,
            declared_params=frozenset({ParamId.TX_POWER}),
            declared_impacts=frozenset({KpiId.MEAN_LOAD}),
        )

    @property
    def descriptor(self) -> XAppDescriptor:
        return self._descriptor

    def decide(self, window: KpiWindow, params: ParameterSnapshot) -> List[ProposedAction]:
        if (window.window_index + 1) % self.policy.trigger_every_windows:
            return []
        victim = self.policy.victim_cell
        current = params.tx_power[victim]
        lowered = max(current - self.policy.power_step_db, TX_POWER_RANGE_DBM[0])
        if lowered == current:
            return []
        return [ProposedAction(target=format_target(victim), param_id=ParamId.TX_POWER, value=lowered)]

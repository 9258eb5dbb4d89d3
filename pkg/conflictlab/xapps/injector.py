"""
Scripted writer that contends for one parameter, used to stage direct conflicts.
"""

from typing import Dict, List

from ..models import KpiWindow, ParameterSnapshot, ProposedAction, XAppDescriptor
from ..scenario import InjectorPolicy
from .base import XApp


class InjectorXApp(XApp):
    """Cycles through ``values`` on one (target, parameter), every ``every_windows`` windows."""

    name = "injector"

    def __init__(self, policy: InjectorPolicy, neighbors: Dict[int, List[int]]):
        super().__init__(neighbors)
        self.policy = policy
        self._writes = 0
        self._descriptor = XAppDescriptor(
            xapp_id=policy.xapp_id,
            declared_params=frozenset({policy.param_id}),
            declared_impacts=frozenset(policy.declared_impacts),
        )

    @property
    def descriptor(self) -> XAppDescriptor:
        return self._descriptor

    def decide(self, window: KpiWindow, params: ParameterSnapshot) -> List[ProposedAction]:
        if not self.policy.values or (window.window_index + 1) % self.policy.every_windows:
            return []
        value = self.policy.values[self._writes % len(self.policy.values)]
        self._writes += 1
        return [ProposedAction(target=self.policy.target, param_id=self.policy.param_id, value=value)]

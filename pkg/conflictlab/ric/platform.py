"""
Near-RT RIC platform: xApp registration, the gated submission path and the KPI bus.
"""

import logging
from typing import List, Optional, Protocol, Union

from ..models import (
    ActionOutcome, ActionRecord, ChangeResult, HandoverParams,
    ParameterSnapshot, ParamId, XAppDescriptor,
)
from ..sim.simulator import Simulator
from .bus import KpiBus
from .registry import ParameterRegistry, XAppHandle, XAppRegistry
from .xnib import XNIB

logger = logging.getLogger(__name__)


class ActionGate(Protocol):
    """Decides whether a submission is blocked before it reaches the RAN."""

    def is_blocked(self, xapp_id: str, target: str, param_id: ParamId, tick: int) -> bool:
        ...


class RicPlatform:
    """Single-writer submission path in front of one simulator."""

    def __init__(
        self,
        simulator: Simulator,
        xnib: Optional[XNIB] = None,
        gate: Optional[ActionGate] = None,
        parameters: Optional[ParameterRegistry] = None,
    ):
        self.simulator = simulator
        self.parameters = parameters if parameters is not None else ParameterRegistry()
        self.registry = XAppRegistry(self.parameters)
        self.xnib = xnib if xnib is not None else XNIB().initialize()
        self.gate = gate
        self.bus = KpiBus()

    def register_xapp(self, descriptor: XAppDescriptor) -> XAppHandle:
        return self.registry.register(descriptor)

    def set_gate(self, gate: Optional[ActionGate]) -> None:
        self.gate = gate

    def submit_action(
        self,
        handle: Union[XAppHandle, str],
        target: str,
        param_id: Union[ParamId, str],
        value: float,
    ) -> ActionOutcome:
        """
        Submit one parameter write on behalf of an xApp.

        The ledger records the outcome in every case, with the value the write
        would replace.

        Args:
            handle: Handle from register_xapp (or the xApp id)
            target: "c" or "s->n"
            param_id: Parameter to write
            value: New value

        Returns:
            Applied, BlockedByPriority or Rejected

        Raises:
            UnknownXAppError: For an unregistered handle.
            UnknownParameterError: For a parameter missing from the registry.
        """
        descriptor = self.registry.get(handle)
        param_id = self.parameters.spec(param_id).param_id
        tick = self.simulator.tick
        old_value = self.simulator.param_value(target, param_id)

        if param_id not in descriptor.declared_params:
            outcome = ActionOutcome.REJECTED
            logger.warning(
                f"{descriptor.xapp_id} wrote undeclared parameter {param_id.value} on {target}; rejected"
            )
        elif self.gate is not None and self.gate.is_blocked(descriptor.xapp_id, target, param_id, tick):
            outcome = ActionOutcome.BLOCKED_BY_PRIORITY
            logger.debug(f"{descriptor.xapp_id} blocked on {param_id.value}({target}) at tick {tick}")
        else:
            result = self.simulator.apply_param_change(target, param_id, value)
            if result == ChangeResult.APPLIED:
                outcome = ActionOutcome.APPLIED
            else:
                outcome = ActionOutcome.REJECTED
                logger.warning(
                    f"{descriptor.xapp_id} write {param_id.value}({target})={value} {result.value}"
                )

        self.xnib.append(ActionRecord(
            tick=tick,
            xapp_id=descriptor.xapp_id,
            target=target,
            param_id=param_id,
            old_value=old_value,
            new_value=float(value),
            outcome=outcome,
        ))
        return outcome

    def xnib_query(self, tick_a: int, tick_b: int, **filters) -> List[ActionRecord]:
        return self.xnib.query(tick_a, tick_b, **filters)

    def current_params(self) -> HandoverParams:
        """Immutable snapshot of the handover parameters, queued writes included."""
        return self.simulator.parameter_snapshot().handover

    def parameter_snapshot(self) -> ParameterSnapshot:
        return self.simulator.parameter_snapshot()

"""
Parameter and xApp registries.
"""

import logging
from typing import Dict, FrozenSet, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict

from ..exceptions import DuplicateXAppError, UnknownParameterError, UnknownXAppError
from ..models import (
    CIO_RANGE_DB, H_RANGE_DB, TTT_VALUES_MS, TX_POWER_RANGE_DBM,
    KpiId, ParamId, XAppDescriptor,
)

logger = logging.getLogger(__name__)


class ParameterSpec(BaseModel):
    """Domain constraints and default impact set of one writable parameter."""
    model_config = ConfigDict(frozen=True)

    param_id: ParamId
    scope: Literal["cell", "pair"]
    value_range: Optional[Tuple[float, float]] = None
    allowed_values: Optional[Tuple[int, ...]] = None
    default_impacts: FrozenSet[KpiId]

    def accepts(self, value: float) -> bool:
        if self.allowed_values is not None:
            return value in self.allowed_values
        low, high = self.value_range
        return low <= value <= high


_HANDOVER_IMPACTS = frozenset({KpiId.RLF_COUNT, KpiId.HO_COUNT, KpiId.PINGPONG_COUNT})

DEFAULT_PARAMETERS = {
    ParamId.H: ParameterSpec(
        param_id=ParamId.H, scope="cell", value_range=H_RANGE_DB,
        default_impacts=_HANDOVER_IMPACTS,
    ),
    ParamId.TTT: ParameterSpec(
        param_id=ParamId.TTT, scope="cell", allowed_values=TTT_VALUES_MS,
        default_impacts=_HANDOVER_IMPACTS,
    ),
    ParamId.CIO: ParameterSpec(
        param_id=ParamId.CIO, scope="pair", value_range=CIO_RANGE_DB,
        default_impacts=frozenset({KpiId.MEAN_LOAD, KpiId.HO_COUNT, KpiId.PINGPONG_COUNT}),
    ),
    ParamId.TX_POWER: ParameterSpec(
        param_id=ParamId.TX_POWER, scope="cell", value_range=TX_POWER_RANGE_DBM,
        default_impacts=frozenset({KpiId.MEAN_LOAD, KpiId.RLF_COUNT}),
    ),
}


class ParameterRegistry:
    """Lookup of writable parameters."""

    def __init__(self, specs: Optional[Dict[ParamId, ParameterSpec]] = None):
        self._specs = dict(DEFAULT_PARAMETERS if specs is None else specs)

    def __contains__(self, param_id) -> bool:
        try:
            return ParamId(param_id) in self._specs
        except ValueError:
            return False

    def spec(self, param_id: Union[ParamId, str]) -> ParameterSpec:
        """
        Resolve a parameter id.

        Raises:
            UnknownParameterError: If the id is not registered.
        """
        try:
            return self._specs[ParamId(param_id)]
        except (ValueError, KeyError):
            raise UnknownParameterError(f"Unknown parameter: {param_id}")

    def default_impacts(self, param_id: Union[ParamId, str]) -> FrozenSet[KpiId]:
        return self.spec(param_id).default_impacts

    def param_ids(self) -> List[ParamId]:
        return list(self._specs)


class XAppHandle(BaseModel):
    """Opaque token returned by registration."""
    model_config = ConfigDict(frozen=True)

    xapp_id: str
    index: int


class XAppRegistry:
    """Registered xApps in registration order."""

    def __init__(self, parameters: Optional[ParameterRegistry] = None):
        self.parameters = parameters if parameters is not None else ParameterRegistry()
        self._descriptors: Dict[str, XAppDescriptor] = {}

    def register(self, descriptor: XAppDescriptor) -> XAppHandle:
        """
        Register an xApp.

        Args:
            descriptor: Declared parameters and impacts; priority defaults to registration order

        Returns:
            Handle used for submissions

        Raises:
            DuplicateXAppError: If the id is taken.
            UnknownParameterError: If a declared parameter is not registered.
        """
        if descriptor.xapp_id in self._descriptors:
            raise DuplicateXAppError(f"xApp '{descriptor.xapp_id}' is already registered")
        for param_id in descriptor.declared_params:
            self.parameters.spec(param_id)

        index = len(self._descriptors)
        if descriptor.priority is None:
            descriptor = descriptor.model_copy(update={"priority": index})
        self._descriptors[descriptor.xapp_id] = descriptor
        logger.info(
            f"Registered xApp '{descriptor.xapp_id}' "
            f"(params={sorted(p.value for p in descriptor.declared_params)}, "
            f"impacts={sorted(k.value for k in descriptor.declared_impacts)})"
        )
        return XAppHandle(xapp_id=descriptor.xapp_id, index=index)

    def get(self, handle: Union[XAppHandle, str]) -> XAppDescriptor:
        xapp_id = handle.xapp_id if isinstance(handle, XAppHandle) else handle
        try:
            return self._descriptors[xapp_id]
        except KeyError:
            raise UnknownXAppError(f"Unknown xApp: {xapp_id}")

    def __contains__(self, xapp_id: str) -> bool:
        return xapp_id in self._descriptors

    def __len__(self) -> int:
        return len(self._descriptors)

    def descriptors(self) -> List[XAppDescriptor]:
        return list(self._descriptors.values())

    def ids(self) -> List[str]:
        return list(self._descriptors)

    def default_ordering(self) -> Tuple[str, ...]:
        """Ids sorted by priority, registration order breaking ties."""
        ids = self.ids()
        return tuple(sorted(ids, key=lambda x: (self._descriptors[x].priority, ids.index(x))))

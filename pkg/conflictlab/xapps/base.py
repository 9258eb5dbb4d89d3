"""
Base xApp

Abstract base class for the control policies hosted by the RIC.
"""

import logging
from abc import ABC, abstractmethod
from typing import Dict, List

from ..models import KpiWindow, ParameterSnapshot, ProposedAction, XAppDescriptor

logger = logging.getLogger(__name__)


class XApp(ABC):
    """
    Abstract base class for xApps.

    An xApp is a pure function of the KPI window, the parameter snapshot and
    its own memory. It never touches the RAN directly: the harness submits
    the returned actions through the RIC.
    """

    name = "xapp"

    def __init__(self, neighbors: Dict[int, List[int]]):
        self.neighbors = neighbors

    @property
    @abstractmethod
    def descriptor(self) -> XAppDescriptor:
        """Declared parameters and impacts, as registered with the RIC."""
        pass

    @property
    def xapp_id(self) -> str:
        return self.descriptor.xapp_id

    @abstractmethod
    def decide(self, window: KpiWindow, params: ParameterSnapshot) -> List[ProposedAction]:
        """
        Turn one completed KPI window into parameter writes.

        Args:
            window: Samples of every cell for the window
            params: Parameters in force (queued writes included)

        Returns:
            Actions to submit, possibly empty
        """
        pass

"""
KPI bus: fan-out of completed KPI windows to subscribers.
"""

import logging
from typing import Callable, Dict

from ..models import KpiWindow

logger = logging.getLogger(__name__)

KpiSubscriber = Callable[[int, KpiWindow], None]


class KpiBus:
    """Synchronous publish/subscribe channel carrying one KpiWindow per publish."""

    def __init__(self):
        self._subscribers: Dict[int, KpiSubscriber] = {}
        self._next_id = 0
        self.sequence = 0

    def subscribe(self, callback: KpiSubscriber) -> int:
        """Register ``callback(sequence, window)``; returns a subscription id."""
        subscription = self._next_id
        self._next_id += 1
        self._subscribers[subscription] = callback
        return subscription

    def unsubscribe(self, subscription: int) -> None:
        self._subscribers.pop(subscription, None)

    def publish(self, window: KpiWindow) -> int:
        """Deliver ``window`` to every subscriber in subscription order; returns its sequence number."""
        self.sequence += 1
        for callback in list(self._subscribers.values()):
            callback(self.sequence, window)
        logger.debug(
            f"Published window {window.window_index} (seq {self.sequence}) "
            f"to {len(self._subscribers)} subscribers"
        )
        return self.sequence

    @property
    def subscriber_count(self) -> int:
        return len(self._subscribers)

"""
Simulation events and the event queue.

Events are ordered by (time, sequence); the sequence is assigned at
scheduling time, so events at the same instant run in the order they were
scheduled. Handlers are registered per event kind.
"""

import heapq
from enum import Enum
from typing import Any, Callable, NamedTuple, Optional


class EventKind(str, Enum):
    """All event kinds driving a simulation run."""

    # Task lifecycle
    TASK_ARRIVAL = "task.arrival"
    TASK_START = "task.start"
    TASK_COMPLETE = "task.complete"

    # Dispatcher
    NOTIFY = "dispatcher.notify"
    PICKUP = "executor.pickup"
    PENDING_TIMEOUT = "executor.pending_timeout"
    INDEX_UPDATE = "index.update"

    # Data movement
    TRANSFER_START = "transfer.start"
    TRANSFER_COMPLETE = "transfer.complete"

    # Provisioning
    ALLOCATION_READY = "provisioner.allocation_ready"
    PROVISIONER_TICK = "provisioner.tick"

    # Metrics
    STATS_SAMPLE = "stats.sample"


class SimEvent(NamedTuple):
    time_us: int
    sequence: int
    kind: EventKind
    payload: Any = None


Handler = Callable[[SimEvent], None]


class EventQueue:
    """Min-heap of pending events with per-kind handler dispatch."""

    def __init__(self) -> None:
        self._heap: list[SimEvent] = []
        self._sequence = 0
        self._handlers: dict[EventKind, Handler] = {}
        self.now_us = 0
        self.processed = 0

    def __len__(self) -> int:
        return len(self._heap)

    @property
    def empty(self) -> bool:
        return not self._heap

    def add_handler(self, kind: EventKind, handler: Handler) -> None:
        self._handlers[kind] = handler

    def schedule(self, time_us: int, kind: EventKind, payload: Any = None) -> SimEvent:
        """Queue an event; scheduling in the past is an error."""
        if time_us < self.now_us:
            raise ValueError(f"cannot schedule {kind.value} at {time_us}us, now is {self.now_us}us")
        event = SimEvent(time_us, self._sequence, kind, payload)
        self._sequence += 1
        heapq.heappush(self._heap, event)
        return event

    def peek_time(self) -> Optional[int]:
        return self._heap[0].time_us if self._heap else None

    def pop(self) -> SimEvent:
        event = heapq.heappop(self._heap)
        self.now_us = event.time_us
        self.processed += 1
        return event

    def advance(self) -> SimEvent:
        """Pop the next event and run its handler."""
        event = self.pop()
        handler = self._handlers.get(event.kind)
        if handler is None:
            raise KeyError(f"no handler registered for {event.kind.value}")
        handler(event)
        return event

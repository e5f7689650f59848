"""
Dynamic resource provisioner.

Grows the executor pool when the wait queue outruns the idle CPU capacity,
with a per-request allocation latency sampled from a configured range, and
releases nodes that stay idle past a timeout. In static mode the pool is
fixed at ``max_nodes`` from t=0.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from app.core.logging import get_logger
from app.models.config import AllocationPolicy, ProvisionerConfig

logger = get_logger(__name__)


@dataclass(slots=True)
class PendingAllocation:
    request_id: int
    count: int
    requested_at_us: int
    ready_at_us: int


class ProvisioningSample(NamedTuple):
    time_us: int
    registered: int
    pending: int
    queue_length: int


class Provisioner:
    """Decides when, how many, and for how long nodes are held."""

    def __init__(self, config: ProvisionerConfig, slots_per_node: int, seed: int):
        self.config = config
        self.slots_per_node = slots_per_node
        self._rng = np.random.default_rng([seed, 0x5052])
        self._pending: list[PendingAllocation] = []
        self._next_request = 0
        self._next_node = 0
        self.nodes: dict[str, int] = {}
        self.idle_since: dict[str, int] = {}
        self.samples: list[ProvisioningSample] = []

    @property
    def registered_count(self) -> int:
        return len(self.nodes)

    @property
    def pending_count(self) -> int:
        return sum(allocation.count for allocation in self._pending)

    def _new_node_id(self) -> str:
        node_id = f"node{self._next_node:04d}"
        self._next_node += 1
        return node_id

    def initial_nodes(self, now_us: int = 0) -> list[str]:
        """Nodes held from the start: ``max_nodes`` when static, else ``min_nodes``."""
        node_ids = [self._new_node_id() for _ in range(self.config.static_nodes)]
        for node_id in node_ids:
            self.nodes[node_id] = now_us
            self.idle_since[node_id] = now_us
        if node_ids:
            logger.info(f"Starting with {len(node_ids)} nodes")
        return node_ids

    def evaluate(
        self,
        queue_length: int,
        registered: int,
        pending: int,
        now_us: int,
        idle_slots: int = 0,
    ) -> int:
        """
        How many nodes to request now.

        Growth triggers when the queue exceeds ``queue_threshold`` times the
        capacity already at hand (idle slots plus slots of nodes still being
        allocated) and the pool is below ``max_nodes``.

        Args:
            queue_length: Tasks waiting
            registered: Registered nodes
            pending: Nodes requested but not yet ready
            now_us: Current simulated time
            idle_slots: Idle CPU slots among registered nodes

        Returns:
            Node count to request (0 when no growth is needed)
        """
        config = self.config
        if config.disabled:
            return 0
        headroom = config.max_nodes - registered - pending
        if headroom <= 0:
            return 0
        capacity = idle_slots + pending * self.slots_per_node
        if queue_length <= config.queue_threshold * capacity:
            return 0

        policy = config.allocation_policy
        if policy == AllocationPolicy.ONE_AT_A_TIME:
            count = 1
        elif policy == AllocationPolicy.ALL_AT_ONCE:
            count = headroom
        elif policy == AllocationPolicy.EXPONENTIAL:
            count = max(1, math.ceil((registered + pending) * (config.exponential_factor - 1)))
        else:
            excess = queue_length - config.queue_threshold * capacity
            count = math.ceil(excess / (config.queue_threshold * self.slots_per_node))
        return max(0, min(count, headroom))

    def request(self, count: int, now_us: int) -> PendingAllocation:
        """Ask for ``count`` nodes; one latency is sampled for the whole request."""
        lo = self.config.allocation_latency_min_us
        hi = self.config.allocation_latency_max_us
        latency = int(self._rng.integers(lo, hi + 1)) if hi > lo else lo
        allocation = PendingAllocation(
            request_id=self._next_request,
            count=count,
            requested_at_us=now_us,
            ready_at_us=now_us + latency,
        )
        self._next_request += 1
        self._pending.append(allocation)
        self._pending.sort(key=lambda a: (a.ready_at_us, a.request_id))
        logger.info(
            f"Requested {count} nodes at {now_us / 1e6:.1f}s, ready at {allocation.ready_at_us / 1e6:.1f}s"
        )
        return allocation

    def on_allocation_ready(self, now_us: int) -> list[str]:
        """Node ids of every allocation whose latency has elapsed, in ready order."""
        node_ids: list[str] = []
        while self._pending and self._pending[0].ready_at_us <= now_us:
            allocation = self._pending.pop(0)
            for _ in range(allocation.count):
                node_id = self._new_node_id()
                self.nodes[node_id] = now_us
                self.idle_since[node_id] = now_us
                node_ids.append(node_id)
        if node_ids:
            logger.info(f"Registered {len(node_ids)} nodes at {now_us / 1e6:.1f}s ({len(self.nodes)} total)")
        return node_ids

    def mark_busy(self, node_id: str) -> None:
        self.idle_since.pop(node_id, None)

    def mark_idle(self, node_id: str, now_us: int) -> None:
        if node_id in self.nodes:
            self.idle_since.setdefault(node_id, now_us)

    def release_idle(self, now_us: int) -> list[str]:
        """
        Nodes idle for at least the release timeout, longest-idle first,
        never dropping below ``min_nodes``.
        """
        timeout = self.config.idle_release_timeout_us
        if timeout is None or self.config.disabled:
            return []
        expired = sorted(
            (since, node_id) for node_id, since in self.idle_since.items() if now_us - since >= timeout
        )
        allowed = len(self.nodes) - self.config.min_nodes
        released = [node_id for _, node_id in expired[: max(0, allowed)]]
        for node_id in released:
            del self.nodes[node_id]
            del self.idle_since[node_id]
        if released:
            logger.info(f"Released {len(released)} idle nodes at {now_us / 1e6:.1f}s ({len(self.nodes)} left)")
        return released

    def record(self, now_us: int, queue_length: int) -> None:
        if self.config.trace:
            self.samples.append(
                ProvisioningSample(now_us, self.registered_count, self.pending_count, queue_length)
            )

"""
Discrete-event simulation of a data-diffusion task farm.

Provides:
- ``Simulation``: one deterministic run wiring the wait queue and
  dispatcher, executor nodes with local caches, peer and persistent-store
  transfers under bandwidth contention, the provisioner and the metrics ledger
- ``run``: convenience wrapper returning the run's metrics ledger

A task's life: arrival -> notification -> pickup -> dispatch overhead ->
data fetch (local cache, peer cache or persistent store) -> compute ->
completion. Transfers share bandwidth by processor sharing: a transfer
between ``src`` and ``dst`` progresses at ``min(bw_src / load_src,
bw_dst / load_dst)``, recomputed whenever either endpoint's load changes.
"""

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

from sortedcontainers import SortedList

from app.core.cache import NodeCache, make_eviction_policy
from app.core.config import RunConfig
from app.core.events import EventKind, EventQueue, SimEvent
from app.core.exceptions import AllPinnedError, ObjectTooLargeError, StalledError
from app.core.logging import get_logger
from app.core.metrics import MetricsLedger, TaskRecord
from app.core.model import check_bandwidth_assumptions
from app.core.provisioner import Provisioner
from app.core.scheduler import Scheduler
from app.core.units import US_PER_S
from app.core.workload import generate_workload, ideal_execution_time, ideal_throughput
from app.models.metrics import AccessClass
from app.models.storage import PersistentStoreSpec, TransientState, TransientStoreSpec
from app.models.task import TaskSpec
from app.models.workload import ArrivalSchedule

logger = get_logger(__name__)

_RATE_SLACK = 1e-9


@dataclass(slots=True)
class TaskRun:
    """A picked-up task on its node."""

    task: TaskSpec
    node_id: str
    picked_at_us: int
    outstanding: int = 0
    accesses: list[tuple[AccessClass, int]] = field(default_factory=list)
    pins: list[str] = field(default_factory=list)


@dataclass(slots=True, eq=False)
class Transfer:
    id: int
    obj: str
    size_bits: int
    source: str
    dest: str
    access: AccessClass
    cached: bool
    owner: TaskRun
    waiters: list[TaskRun] = field(default_factory=list)
    remaining_bits: float = 0.0
    rate_bps: float = 0.0
    last_update_us: int = 0
    finish_us: int = 0
    active: bool = False


@dataclass(slots=True)
class NodeState:
    id: str
    slots: int
    bandwidth_bps: float
    compute_speed: float
    cache: NodeCache
    transfers: dict[int, Transfer] = field(default_factory=dict)
    inflight: dict[str, Transfer] = field(default_factory=dict)

    @property
    def load(self) -> int:
        """Concurrent transfers touching this node, inbound and outbound."""
        return len(self.transfers)


@dataclass(slots=True)
class SharedStoreState:
    spec: PersistentStoreSpec
    transfers: dict[int, Transfer] = field(default_factory=dict)

    @property
    def id(self) -> str:
        return self.spec.id

    @property
    def bandwidth_bps(self) -> float:
        return self.spec.ideal_bandwidth_bps


class Simulation:
    """One simulation run. Single-threaded; nothing is shared between runs."""

    def __init__(
        self,
        config: RunConfig,
        schedule: Optional[ArrivalSchedule] = None,
        tasks: Optional[list[TaskSpec]] = None,
    ):
        self.config = config
        self.seed = config.seed
        if schedule is None or tasks is None:
            schedule, tasks = generate_workload(config.workload, config.seed)
        self.schedule = schedule
        self.tasks = tasks

        self.events = EventQueue()
        self.scheduler = Scheduler(config.scheduler)
        self.provisioner = Provisioner(config.provisioner, config.node.slots, config.seed)
        self.ledger = MetricsLedger(slots_per_node=config.node.slots)
        self.policy = config.scheduler.policy

        self.store = SharedStoreState(
            spec=PersistentStoreSpec(
                id=config.store.id,
                capacity_bits=config.store.capacity_bits,
                ideal_bandwidth_bps=config.store.bandwidth_bps,
            )
        )
        self.nodes: dict[str, NodeState] = {}
        self.released: list[TransientStoreSpec] = []
        self._node_number = 0

        self._next_arrival = 0
        self._completed = 0
        self._notify_scheduled = False
        self._dispatcher_free_us = 0
        rate = config.scheduler.notify_rate_per_s
        self._notify_delay_us = math.ceil(US_PER_S / rate) if rate > 0 else 0

        self._next_transfer = 0
        self._finish_order = SortedList()
        self._transfers: dict[int, Transfer] = {}
        self._completion_epoch = 0
        self._completion_head: Optional[tuple[int, int]] = None
        self.transferred_bits = 0

        accesses = sum(len(task.required_objects) for task in tasks)
        self._objects_per_task = accesses / len(tasks) if tasks else 0.0

        for kind, handler in (
            (EventKind.TASK_ARRIVAL, self._on_arrival),
            (EventKind.NOTIFY, self._on_notify),
            (EventKind.PICKUP, self._on_pickup),
            (EventKind.PENDING_TIMEOUT, self._on_pending_timeout),
            (EventKind.TASK_START, self._on_task_start),
            (EventKind.TASK_COMPLETE, self._on_task_complete),
            (EventKind.TRANSFER_START, self._on_transfer_start),
            (EventKind.TRANSFER_COMPLETE, self._on_transfer_complete),
            (EventKind.INDEX_UPDATE, self._on_index_update),
            (EventKind.ALLOCATION_READY, self._on_allocation_ready),
            (EventKind.PROVISIONER_TICK, self._on_provisioner_tick),
            (EventKind.STATS_SAMPLE, self._on_stats_sample),
        ):
            self.events.add_handler(kind, handler)

    @property
    def now_us(self) -> int:
        return self.events.now_us

    @property
    def completed(self) -> int:
        return self._completed

    @property
    def deadline_us(self) -> int:
        """
        Simulated time past which the run is declared stalled:
        ``max_time_factor`` times the ideal time (plus one allocation
        latency when provisioning), plus the time to dispatch every task and
        move every object one after another at the slowest link.
        """
        config = self.config
        ideal = ideal_execution_time(self.schedule)
        if not config.provisioner.disabled:
            ideal += config.provisioner.allocation_latency_max_us
        link_bps = min(config.store.bandwidth_bps, config.node.bandwidth_bps)
        per_object = math.ceil(config.workload.file_size_bits * US_PER_S / link_bps) + config.store.transfer_latency_us
        accesses = sum(len(task.required_objects) for task in self.tasks)
        serial = (
            accesses * per_object
            + sum(task.dispatch_overhead_us for task in self.tasks)
            + len(self.tasks) * self._notify_delay_us
        )
        return math.ceil(config.engine.max_time_factor * ideal) + serial

    # Run loop

    def run(self) -> MetricsLedger:
        """
        Process events until every task has completed.

        Raises:
            StalledError: Simulated time passed the deadline or no event
                is left while tasks are outstanding
        """
        self._start()
        total = len(self.tasks)
        deadline = self.deadline_us
        check = self.config.engine.check_invariants

        while self._completed < total:
            next_time = self.events.peek_time()
            if next_time is None:
                raise StalledError(
                    f"no events left with {total - self._completed} of {total} tasks unfinished"
                )
            if next_time > deadline:
                raise StalledError(
                    f"simulated time passed {deadline / US_PER_S:.1f}s with "
                    f"{total - self._completed} of {total} tasks unfinished"
                )
            self.events.advance()
            if check:
                self.check_invariants()

        self._sample(self.ledger.wet_us)
        logger.info(
            f"Run finished: {total} tasks, WET {self.ledger.wet_us / US_PER_S:.3f}s, "
            f"{self.events.processed} events, {self.ledger.max_nodes} nodes at peak"
        )
        return self.ledger

    def _start(self) -> None:
        config = self.config
        logger.info(
            f"Starting run: policy={self.policy.value}, tasks={len(self.tasks)}, "
            f"cache={config.node.cache_bits / 8e9:.2f}GB/node, seed={self.seed}"
        )
        check_bandwidth_assumptions(
            config.node.bandwidth_bps, config.provisioner.max_nodes, config.store.bandwidth_bps
        )
        timeout = config.scheduler.pending_timeout_us
        if timeout is not None and timeout < self._notify_delay_us:
            logger.warning(
                f"Pending timeout {timeout}us is shorter than the {self._notify_delay_us}us notify delay, "
                "every notification will expire"
            )
        for node_id in self.provisioner.initial_nodes(0):
            self.add_node(node_id)
        if self.tasks:
            self.events.schedule(self.tasks[0].arrival_time_us, EventKind.TASK_ARRIVAL)
        if not config.provisioner.disabled:
            self.events.schedule(0, EventKind.PROVISIONER_TICK)
        self.events.schedule(config.metrics.sample_interval_us, EventKind.STATS_SAMPLE)

    # Nodes

    def add_node(self, node_id: str) -> NodeState:
        """Register a node: a cache, CPU slots and a scheduler executor."""
        spec = self.config.node
        policy = make_eviction_policy(self.config.scheduler.eviction, self.seed * 100_003 + self._node_number)
        self._node_number += 1
        node = NodeState(
            id=node_id,
            slots=spec.slots,
            bandwidth_bps=spec.bandwidth_bps,
            compute_speed=spec.compute_speed,
            cache=NodeCache(spec.cache_bits, policy),
        )
        self.nodes[node_id] = node
        self.scheduler.register_executor(node_id, spec.slots)
        self.ledger.node_registered(node_id, self.now_us)
        return node

    def release_node(self, node_id: str) -> TransientStoreSpec:
        """
        Deregister an idle node; its cache is dropped and purged from the index.

        Returns:
            The node's last description, in state ``released``
        """
        snapshot = self.node_snapshot(node_id).model_copy(update={"state": TransientState.RELEASED})
        node = self.nodes.pop(node_id)
        dropped = node.cache.clear()
        self.scheduler.deregister_executor(node_id)
        self.ledger.node_released(node_id, self.now_us)
        logger.debug(f"Released {node_id}, dropped {len(dropped)} cached objects")
        self.released.append(snapshot)
        return snapshot

    def node_snapshot(self, node_id: str) -> TransientStoreSpec:
        """Current description of a registered node."""
        node = self.nodes[node_id]
        return TransientStoreSpec(
            id=node.id,
            capacity_bits=node.cache.capacity_bits,
            ideal_bandwidth_bps=node.bandwidth_bps,
            compute_speed=node.compute_speed,
            current_load=node.load,
            state=self.scheduler.executor(node_id).state,
        )

    def _update_idle(self, node_id: str) -> None:
        node = self.nodes.get(node_id)
        if node is None:
            return
        if node.transfers or not self.scheduler.is_idle(node_id):
            self.provisioner.mark_busy(node_id)
        else:
            self.provisioner.mark_idle(node_id, self.now_us)

    # Arrivals and dispatch

    def _on_arrival(self, event: SimEvent) -> None:
        task = self.tasks[self._next_arrival]
        self._next_arrival += 1
        self.scheduler.enqueue(task)
        self.ledger.observe_queue(self.scheduler.queue_length)
        if self._next_arrival < len(self.tasks):
            self.events.schedule(self.tasks[self._next_arrival].arrival_time_us, EventKind.TASK_ARRIVAL)
        self._kick()

    def _kick(self) -> None:
        """Wake the dispatcher if it is idle and work is waiting."""
        if self._notify_scheduled or not self.scheduler.queue_length:
            return
        self._notify_scheduled = True
        self.events.schedule(max(self.now_us, self._dispatcher_free_us), EventKind.NOTIFY)

    def _on_notify(self, event: SimEvent) -> None:
        self._notify_scheduled = False
        now = event.time_us
        executor_id = self.scheduler.notify_candidate(now)
        if executor_id is None:
            return
        self._update_idle(executor_id)
        delay = self._notify_delay_us
        self._dispatcher_free_us = now + delay
        self.events.schedule(now + delay, EventKind.PICKUP, (executor_id, now))
        timeout = self.config.scheduler.pending_timeout_us
        if timeout is not None:
            self.events.schedule(now + timeout, EventKind.PENDING_TIMEOUT, (executor_id, now))
        self._kick()

    def _is_current_notification(self, executor_id: str, notified_at_us: int) -> bool:
        if executor_id not in self.nodes:
            return False
        ex = self.scheduler.executor(executor_id)
        return ex.pending and ex.notified_at_us == notified_at_us

    def _on_pickup(self, event: SimEvent) -> None:
        executor_id, notified_at = event.payload
        if not self._is_current_notification(executor_id, notified_at):
            return
        now = event.time_us
        for task in self.scheduler.select_tasks_for_pickup(executor_id, now):
            run = TaskRun(task=task, node_id=executor_id, picked_at_us=now)
            self.events.schedule(now + task.dispatch_overhead_us, EventKind.TASK_START, run)
        self._update_idle(executor_id)
        self._kick()

    def _on_pending_timeout(self, event: SimEvent) -> None:
        """
        Requeue the hint of a notification still unanswered. Answered and
        superseded notifications are ignored, so only a timeout shorter than
        the notify delay ever fires; such a config expires every notification.
        """
        executor_id, notified_at = event.payload
        if not self._is_current_notification(executor_id, notified_at):
            return
        self.scheduler.expire_pending(executor_id)
        self._update_idle(executor_id)
        self._kick()

    # Data fetch

    def _on_task_start(self, event: SimEvent) -> None:
        run: TaskRun = event.payload
        node = self.nodes[run.node_id]
        for obj in run.task.required_objects:
            self._fetch(run, node, obj)
        if run.outstanding == 0:
            self._begin_compute(run)

    def _fetch(self, run: TaskRun, node: NodeState, obj: str) -> None:
        size = self.config.workload.file_size_bits
        cache = node.cache
        if self.policy.caches and cache.lookup(obj):
            cache.pin(obj)
            run.pins.append(obj)
            run.accesses.append((AccessClass.LOCAL, size))
            if not cache.is_ready(obj):
                node.inflight[obj].waiters.append(run)
                run.outstanding += 1
            return

        source, access = self.data_fetch_source(obj, node.id)
        cached = False
        if self.policy.caches and self._replica_room(obj):
            cached = self._admit(node, obj, size)
            if cached:
                self.scheduler.reserve_replica(obj)
        transfer = Transfer(
            id=self._next_transfer,
            obj=obj,
            size_bits=size,
            source=source,
            dest=node.id,
            access=access,
            cached=cached,
            owner=run,
            waiters=[run],
        )
        self._next_transfer += 1
        run.outstanding += 1
        if cached:
            cache.pin(obj)
            run.pins.append(obj)
            node.inflight[obj] = transfer
        self.start_transfer(transfer)

    def data_fetch_source(self, obj: str, dst_node: str) -> tuple[str, AccessClass]:
        """
        Where a node reads an object it does not hold.

        The least-loaded peer holding a ready copy (ties by id) wins; the
        persistent store serves everything else.
        """
        best = None
        for holder in self.scheduler.holders(obj):
            if holder == dst_node:
                continue
            peer = self.nodes.get(holder)
            if peer is None or not peer.cache.is_ready(obj):
                continue
            if best is None or peer.load < best.load:
                best = peer
        if best is not None:
            return best.id, AccessClass.REMOTE
        return self.store.id, AccessClass.STORE

    def _replica_room(self, obj: str) -> bool:
        """Indexed copies plus copies still in flight stay under ``max_replication``."""
        scheduler = self.scheduler
        copies = scheduler.replica_count(obj) + scheduler.pending_replicas(obj)
        return copies < self.config.scheduler.max_replication

    def _admit(self, node: NodeState, obj: str, size_bits: int) -> bool:
        """Reserve a placeholder for ``obj``; False means stream it uncached."""
        try:
            victims = node.cache.insert(obj, size_bits, ready=False)
        except ObjectTooLargeError:
            return False
        except AllPinnedError as e:
            logger.warning(f"{node.id}: {e.message}, streaming {obj} uncached")
            return False
        if victims:
            self._publish_index(node.id, evicted=victims)
        return True

    # Transfers

    def start_transfer(self, transfer: Transfer) -> Transfer:
        """
        Begin moving ``transfer.obj`` to its destination.

        Store reads wait out the store latency first. A peer source that no
        longer holds the object is replaced by the persistent store.
        """
        latency = self.config.store.transfer_latency_us
        if transfer.source == self.store.id and latency > 0:
            self.events.schedule(self.now_us + latency, EventKind.TRANSFER_START, transfer)
            return transfer
        self._activate(transfer)
        return transfer

    def _on_transfer_start(self, event: SimEvent) -> None:
        self._activate(event.payload)

    def _activate(self, transfer: Transfer) -> None:
        now = self.now_us
        if transfer.source != self.store.id:
            peer = self.nodes.get(transfer.source)
            if peer is None or not peer.cache.is_ready(transfer.obj):
                logger.debug(f"Source {transfer.source} lost {transfer.obj}, rerouting to {self.store.id}")
                transfer.source = self.store.id
                transfer.access = AccessClass.STORE
                self.start_transfer(transfer)
                return
            peer.cache.pin(transfer.obj)

        transfer.active = True
        transfer.remaining_bits = float(transfer.size_bits)
        transfer.last_update_us = now
        self._transfers[transfer.id] = transfer
        self._endpoint(transfer.source)[transfer.id] = transfer
        self._endpoint(transfer.dest)[transfer.id] = transfer
        self._update_idle(transfer.source)
        self._recalculate((transfer.source, transfer.dest))

    def _endpoint(self, endpoint_id: str) -> dict[int, Transfer]:
        if endpoint_id == self.store.id:
            return self.store.transfers
        return self.nodes[endpoint_id].transfers

    def _bandwidth(self, endpoint_id: str) -> float:
        if endpoint_id == self.store.id:
            return self.store.bandwidth_bps
        return self.nodes[endpoint_id].bandwidth_bps

    def _rate(self, transfer: Transfer) -> float:
        src = self._endpoint(transfer.source)
        dst = self._endpoint(transfer.dest)
        return min(
            self._bandwidth(transfer.source) / len(src),
            self._bandwidth(transfer.dest) / len(dst),
        )

    def _recalculate(self, endpoints: Iterable[str]) -> None:
        """Settle and re-rate every transfer touching a changed endpoint."""
        now = self.now_us
        affected: dict[int, Transfer] = {}
        for endpoint_id in endpoints:
            if endpoint_id == self.store.id or endpoint_id in self.nodes:
                affected.update(self._endpoint(endpoint_id))

        for transfer in affected.values():
            rate = self._rate(transfer)
            if rate == transfer.rate_bps:
                continue
            if transfer.rate_bps:
                elapsed = now - transfer.last_update_us
                transfer.remaining_bits = max(0.0, transfer.remaining_bits - transfer.rate_bps * elapsed / US_PER_S)
                self._finish_order.discard((transfer.finish_us, transfer.id))
            transfer.rate_bps = rate
            transfer.last_update_us = now
            transfer.finish_us = now + math.ceil(transfer.remaining_bits * US_PER_S / rate)
            self._finish_order.add((transfer.finish_us, transfer.id))

        self._schedule_next_completion()

    def _schedule_next_completion(self) -> None:
        head = self._finish_order[0] if self._finish_order else None
        if head == self._completion_head:
            return
        self._completion_head = head
        self._completion_epoch += 1
        if head is not None:
            self.events.schedule(head[0], EventKind.TRANSFER_COMPLETE, self._completion_epoch)

    def _on_transfer_complete(self, event: SimEvent) -> None:
        if event.payload != self._completion_epoch:
            return
        self._completion_head = None
        finish_us, transfer_id = self._finish_order.pop(0)
        self._finish_transfer(self._transfers.pop(transfer_id))

    def _finish_transfer(self, transfer: Transfer) -> None:
        transfer.active = False
        transfer.remaining_bits = 0.0
        self.transferred_bits += transfer.size_bits
        del self._endpoint(transfer.source)[transfer.id]
        del self._endpoint(transfer.dest)[transfer.id]

        if transfer.source != self.store.id:
            self.nodes[transfer.source].cache.unpin(transfer.obj)
            self._update_idle(transfer.source)

        node = self.nodes[transfer.dest]
        if transfer.cached:
            node.cache.mark_ready(transfer.obj)
            del node.inflight[transfer.obj]
            self._publish_index(node.id, added=(transfer.obj,))

        transfer.owner.accesses.append((transfer.access, transfer.size_bits))
        for run in transfer.waiters:
            run.outstanding -= 1
            if run.outstanding == 0:
                self._begin_compute(run)

        self._recalculate((transfer.source, transfer.dest))

    # Index

    def _publish_index(self, node_id: str, added: Iterable[str] = (), evicted: Iterable[str] = ()) -> None:
        staleness = self.config.scheduler.index_staleness_us
        if staleness:
            self.events.schedule(
                self.now_us + staleness, EventKind.INDEX_UPDATE, (node_id, tuple(added), tuple(evicted))
            )
            return
        self.scheduler.on_index_update(node_id, added, evicted)
        self._kick()

    def _on_index_update(self, event: SimEvent) -> None:
        node_id, added, evicted = event.payload
        self.scheduler.on_index_update(node_id, added, evicted)
        self._kick()

    # Compute and completion

    def _begin_compute(self, run: TaskRun) -> None:
        node = self.nodes[run.node_id]
        compute_us = math.ceil(run.task.compute_time_us / node.compute_speed)
        self.events.schedule(self.now_us + compute_us, EventKind.TASK_COMPLETE, run)

    def _on_task_complete(self, event: SimEvent) -> None:
        self.complete_task(event.payload)

    def complete_task(self, run: TaskRun) -> TaskRecord:
        """Free the slot, unpin the task's objects and record its response time."""
        now = self.now_us
        node = self.nodes[run.node_id]
        for obj in run.pins:
            node.cache.unpin(obj)
        self.scheduler.task_finished(node.id)

        task = run.task
        record = TaskRecord(
            task_id=task.id,
            arrival_us=task.arrival_time_us,
            wq_us=run.picked_at_us - task.arrival_time_us,
            e_us=now - run.picked_at_us,
            d_us=self.config.engine.result_delivery_us,
        )
        self.ledger.record_task(record, run.accesses)
        self._completed += 1
        self._update_idle(node.id)
        self._kick()
        return record

    # Provisioning

    def _on_provisioner_tick(self, event: SimEvent) -> None:
        now = event.time_us
        provisioner = self.provisioner
        count = provisioner.evaluate(
            queue_length=self.scheduler.queue_length,
            registered=provisioner.registered_count,
            pending=provisioner.pending_count,
            now_us=now,
            idle_slots=self.scheduler.idle_slots,
        )
        if count:
            allocation = provisioner.request(count, now)
            self.events.schedule(allocation.ready_at_us, EventKind.ALLOCATION_READY)
        for node_id in provisioner.release_idle(now):
            self.release_node(node_id)
        provisioner.record(now, self.scheduler.queue_length)
        if self._completed < len(self.tasks):
            self.events.schedule(now + self.config.provisioner.poll_interval_us, EventKind.PROVISIONER_TICK)

    def _on_allocation_ready(self, event: SimEvent) -> None:
        for node_id in self.provisioner.on_allocation_ready(event.time_us):
            self.add_node(node_id)
        self._kick()

    # Sampling

    def _on_stats_sample(self, event: SimEvent) -> None:
        self._sample(event.time_us)
        if self._completed < len(self.tasks):
            self.events.schedule(event.time_us + self.config.metrics.sample_interval_us, EventKind.STATS_SAMPLE)

    def _sample(self, now_us: int) -> None:
        ideal = ideal_throughput(
            self.schedule,
            self.config.workload.file_size_bits,
            self.ledger.last_sample_us,
            self._objects_per_task,
        )
        busy = sum(1 for node_id in self.nodes if self.scheduler.executor(node_id).running)
        self.ledger.sample(
            now_us,
            ideal_bps=ideal,
            queue_length=self.scheduler.queue_length,
            nodes=len(self.nodes),
            busy=busy,
            cpu_util=self.scheduler.cpu_utilization() if self.nodes else 0.0,
        )

    # Checks

    def check_invariants(self) -> None:
        """Assert bandwidth feasibility, cache capacity and index consistency."""
        for endpoint_id in (self.store.id, *self.nodes):
            transfers = self._endpoint(endpoint_id)
            allocated = sum(t.rate_bps for t in transfers.values())
            limit = self._bandwidth(endpoint_id)
            assert allocated <= limit * (1 + _RATE_SLACK), (
                f"{endpoint_id}: {allocated:.6g} bps allocated over {limit:.6g} bps"
            )
        for node in self.nodes.values():
            assert node.cache.used_bits <= node.cache.capacity_bits, f"{node.id}: cache over capacity"
            assert self.scheduler.executor(node.id).running <= node.slots, f"{node.id}: slots overcommitted"
        if self.config.scheduler.index_staleness_us == 0:
            self.scheduler.check_consistency()
            for node in self.nodes.values():
                ready = {key for key in node.cache.keys() if node.cache.is_ready(key)}
                assert ready == self.scheduler.executor_index[node.id], f"{node.id}: index differs from cache"


def run(config: RunConfig) -> MetricsLedger:
    """Simulate ``config`` to completion and return its metrics ledger."""
    return Simulation(config).run()

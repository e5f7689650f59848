"""
Data-aware dispatcher.

Provides:
- The wait queue, kept in arrival order, with a bounded scheduling window
- The central file index (object -> executors) and executor index
  (executor -> objects)
- Part one: choose the executor to notify for the head task
- Part two: choose the tasks a notified executor picks up
- The five dispatch policies and good-cache-compute's CPU-utilization switch

An executor is a node with one or more CPU slots sharing one cache. It is
free while it has an idle slot and no outstanding notification.

Executors that find nothing to take while seeking cache hits are parked and
skipped by part one until the queue window, their index entries or the
policy mode change in a way that could give them work.
"""

import heapq
from dataclasses import dataclass
from itertools import islice
from typing import Iterable, NamedTuple, Optional

from sortedcontainers import SortedDict, SortedSet

from app.core.exceptions import NoExecutorsError
from app.core.logging import get_logger
from app.models.config import DispatchPolicy, SchedulerConfig
from app.models.metrics import HitClassification
from app.models.storage import TransientState
from app.models.task import TaskSpec

logger = get_logger(__name__)


@dataclass(slots=True)
class QueuedTask:
    task: TaskSpec
    seq: int
    objects: frozenset[str]


@dataclass(slots=True)
class Executor:
    id: str
    slots: int
    running: int = 0
    pending: bool = False
    parked: bool = False
    hint: Optional[QueuedTask] = None
    notified_at_us: int = 0

    @property
    def idle_slots(self) -> int:
        return self.slots - self.running

    @property
    def state(self) -> TransientState:
        if self.pending:
            return TransientState.PENDING
        if self.running >= self.slots:
            return TransientState.BUSY
        return TransientState.FREE


class Decision(NamedTuple):
    """One dispatched task, as written to the decision trace."""

    time_us: int
    task_id: int
    executor_id: str
    policy: str
    local_hits: int
    misses: int


@dataclass(slots=True)
class SchedulerStats:
    notifications: int = 0
    pickups: int = 0
    empty_pickups: int = 0
    inspected: int = 0
    dispatched: int = 0


class Scheduler:
    """
    Central decision engine. All mutations come from one owner (the
    simulation loop or the micro-benchmark); there is no internal locking.
    """

    def __init__(self, config: SchedulerConfig):
        self.config = config
        self.policy = config.policy
        self.stats = SchedulerStats()
        self.decisions: list[Decision] = []

        self._queue: SortedDict = SortedDict()
        self._seq_of: dict[int, int] = {}
        self._next_seq = 0

        self._executors: dict[str, Executor] = {}
        self._available: SortedSet = SortedSet()
        self._parked: SortedSet = SortedSet()
        self._rr_cursor: Optional[str] = None
        self._total_slots = 0
        self._busy_slots = 0

        self.file_index: dict[str, SortedSet] = {}
        self.executor_index: dict[str, set[str]] = {}
        self._waiting: dict[str, set[int]] = {}
        self._dataless: SortedSet = SortedSet()
        self._orphans: SortedSet = SortedSet()
        self._reserved: dict[str, int] = {}

    # Executors

    @property
    def executor_ids(self) -> list[str]:
        return sorted(self._executors)

    def executor(self, executor_id: str) -> Executor:
        return self._executors[executor_id]

    def register_executor(self, executor_id: str, slots: int = 1) -> None:
        """Add a free executor with an empty cache."""
        if executor_id in self._executors:
            raise ValueError(f"executor {executor_id!r} is already registered")
        self._executors[executor_id] = Executor(id=executor_id, slots=slots)
        self.executor_index[executor_id] = set()
        self._total_slots += slots
        self._available.add(executor_id)
        self._unpark_all()
        logger.debug(f"Registered executor {executor_id} ({slots} slots)")

    def deregister_executor(self, executor_id: str) -> list[str]:
        """
        Remove an idle executor and purge its objects from the file index.

        Returns:
            Object ids that were indexed at the executor
        """
        ex = self._executors[executor_id]
        if ex.running or ex.pending:
            raise ValueError(f"executor {executor_id!r} is not idle")
        purged = sorted(self.executor_index[executor_id])
        self.on_index_update(executor_id, evicted=purged)
        del self._executors[executor_id]
        del self.executor_index[executor_id]
        self._available.discard(executor_id)
        self._parked.discard(executor_id)
        self._total_slots -= ex.slots
        self._unpark_all()
        logger.debug(f"Deregistered executor {executor_id}, purged {len(purged)} objects")
        return purged

    def is_idle(self, executor_id: str) -> bool:
        ex = self._executors[executor_id]
        return ex.running == 0 and not ex.pending

    @property
    def total_slots(self) -> int:
        return self._total_slots

    @property
    def busy_slots(self) -> int:
        return self._busy_slots

    @property
    def idle_slots(self) -> int:
        return self._total_slots - self._busy_slots

    @property
    def free_executors(self) -> list[str]:
        return [ex.id for ex in self._executors.values() if ex.state == TransientState.FREE]

    @property
    def parked_executors(self) -> list[str]:
        return list(self._parked)

    def cpu_utilization(self) -> float:
        """Busy CPU slots over all registered slots."""
        if not self._executors:
            raise NoExecutorsError("cpu utilization needs at least one registered executor")
        return self._busy_slots / self._total_slots

    # Queue

    def __len__(self) -> int:
        return len(self._queue)

    @property
    def queue_length(self) -> int:
        return len(self._queue)

    @property
    def window_size(self) -> int:
        if self.config.window_size is not None:
            return self.config.window_size
        return max(1, self.config.window_multiplier * len(self._executors))

    def queued_tasks(self) -> list[TaskSpec]:
        return [qt.task for qt in self._queue.values()]

    def head(self) -> Optional[TaskSpec]:
        return self._queue.peekitem(0)[1].task if self._queue else None

    def contains(self, task_id: int) -> bool:
        return task_id in self._seq_of

    def enqueue(self, task: TaskSpec) -> None:
        """Append an arriving task to the tail of the wait queue."""
        if task.id in self._seq_of:
            raise ValueError(f"task {task.id} is already queued")
        qt = QueuedTask(task=task, seq=self._next_seq, objects=frozenset(task.required_objects))
        self._next_seq += 1
        self._insert(qt)

    def _insert(self, qt: QueuedTask) -> None:
        self._queue[qt.seq] = qt
        self._seq_of[qt.task.id] = qt.seq
        if not qt.objects:
            self._dataless.add(qt.seq)
        else:
            for obj in qt.objects:
                self._waiting.setdefault(obj, set()).add(qt.seq)
            if self._is_orphan(qt):
                self._orphans.add(qt.seq)
        if self._parked and self._queue.bisect_left(qt.seq) < self.window_size:
            self._on_window_entry(qt)

    def _remove(self, seq: int) -> QueuedTask:
        window = self.window_size
        rank = self._queue.bisect_left(seq) if self._parked else window
        qt = self._queue.pop(seq)
        del self._seq_of[qt.task.id]
        if not qt.objects:
            self._dataless.discard(seq)
        else:
            self._orphans.discard(seq)
            for obj in qt.objects:
                waiting = self._waiting[obj]
                waiting.discard(seq)
                if not waiting:
                    del self._waiting[obj]
        if rank < window and len(self._queue) >= window:
            self._on_window_entry(self._queue.peekitem(window - 1)[1])
        return qt

    def _window_boundary(self) -> int:
        """Largest queued sequence number inside the scheduling window."""
        window = self.window_size
        if len(self._queue) <= window:
            return self._queue.peekitem(-1)[0]
        return self._queue.peekitem(window - 1)[0]

    def _is_orphan(self, qt: QueuedTask) -> bool:
        return all(obj not in self.file_index for obj in qt.objects)

    # Parking

    def _refresh(self, ex: Executor) -> None:
        if not ex.pending and not ex.parked and ex.running < ex.slots:
            self._available.add(ex.id)
        else:
            self._available.discard(ex.id)

    def _park(self, ex: Executor) -> None:
        ex.parked = True
        self._parked.add(ex.id)
        self._available.discard(ex.id)

    def _unpark(self, ex: Executor) -> None:
        ex.parked = False
        self._parked.discard(ex.id)
        self._refresh(ex)

    def _unpark_all(self) -> None:
        for executor_id in list(self._parked):
            self._unpark(self._executors[executor_id])

    def _on_window_entry(self, qt: QueuedTask) -> None:
        """A task became visible in the window: wake executors it could suit."""
        if not self._parked:
            return
        if not qt.objects or qt.seq in self._orphans:
            self._unpark_all()
            return
        for obj in qt.objects:
            for executor_id in self.file_index.get(obj, ()):
                if executor_id in self._parked:
                    self._unpark(self._executors[executor_id])

    def cache_seeking(self) -> bool:
        """True when pickups must not take tasks without local hits."""
        if self.policy == DispatchPolicy.MAX_CACHE_HIT:
            return True
        if self.policy == DispatchPolicy.GOOD_CACHE_COMPUTE:
            return self.cpu_utilization() >= self.config.cpu_threshold
        return False

    def _refresh_parking(self) -> None:
        if self._parked and not self.cache_seeking():
            self._unpark_all()

    # Part one

    def notify_candidate(self, now_us: int = 0) -> Optional[str]:
        """
        Pick the executor to notify for the head task.

        The head task is removed from the queue and held as the executor's
        hint; the executor becomes pending until its pickup.

        Returns:
            The notified executor id, or None when no executor is free
        """
        if not self._queue:
            return None
        self._refresh_parking()
        if not self._available:
            return None

        head_seq, qt = self._queue.peekitem(0)
        executor_id = None
        if self.policy == DispatchPolicy.FIRST_CACHE_AVAILABLE:
            executor_id = self._first_cached_holder(qt)
        elif self.policy.data_aware:
            executor_id = self._best_holder(qt)
        if executor_id is None:
            executor_id = self._next_available()

        self._remove(head_seq)
        ex = self._executors[executor_id]
        ex.pending = True
        ex.hint = qt
        ex.notified_at_us = now_us
        self._available.discard(executor_id)
        self.stats.notifications += 1
        return executor_id

    def _best_holder(self, qt: QueuedTask) -> Optional[str]:
        counts: dict[str, int] = {}
        for obj in qt.objects:
            for executor_id in self.file_index.get(obj, ()):
                counts[executor_id] = counts.get(executor_id, 0) + 1
        for executor_id, _ in sorted(counts.items(), key=lambda item: (-item[1], item[0])):
            if executor_id in self._available:
                return executor_id
        return None

    def _first_cached_holder(self, qt: QueuedTask) -> Optional[str]:
        for obj in qt.task.required_objects:
            for executor_id in self.file_index.get(obj, ()):
                if executor_id in self._available:
                    return executor_id
        return None

    def _next_available(self) -> str:
        """Round-robin over free executors in id order."""
        index = 0 if self._rr_cursor is None else self._available.bisect_right(self._rr_cursor)
        if index >= len(self._available):
            index = 0
        executor_id = self._available[index]
        self._rr_cursor = executor_id
        return executor_id

    # Part two

    def select_tasks_for_pickup(self, executor_id: str, now_us: int = 0) -> list[TaskSpec]:
        """
        Choose the tasks a notified executor takes (at most the batch size and
        its idle slots). Chosen tasks leave the queue and occupy slots.

        Returns:
            Tasks to run, possibly empty (the executor goes back to the free
            pool, parked if it is seeking cache hits)
        """
        ex = self._executors[executor_id]
        if not ex.pending:
            raise ValueError(f"executor {executor_id!r} was not notified")
        ex.pending = False
        if ex.hint is not None:
            self._insert(ex.hint)
            ex.hint = None

        self.stats.pickups += 1
        seeking = self.cache_seeking()
        limit = min(self.config.batch_size, ex.idle_slots)
        chosen = self._evaluate(ex, limit, seeking)

        cached = self.executor_index[executor_id]
        for qt in chosen:
            self._remove(qt.seq)
            if self.config.trace:
                hits = len(qt.objects & cached)
                self.decisions.append(
                    Decision(now_us, qt.task.id, executor_id, self.policy.value, hits, len(qt.objects) - hits)
                )
        ex.running += len(chosen)
        self._busy_slots += len(chosen)
        self.stats.dispatched += len(chosen)

        if not chosen and seeking:
            self.stats.empty_pickups += 1
            self._park(ex)
        else:
            self._refresh(ex)
        return [qt.task for qt in chosen]

    def _evaluate(self, ex: Executor, limit: int, seeking: bool) -> list[QueuedTask]:
        if limit <= 0 or not self._queue:
            return []
        if not self.policy.data_aware:
            return list(islice(self._queue.values(), limit))

        chosen = self._best_hits(ex, limit)
        if len(chosen) >= limit:
            return chosen

        taken = {qt.seq for qt in chosen}
        if seeking:
            for seq in self._orphans.irange(maximum=self._window_boundary()):
                if len(chosen) >= limit:
                    break
                if seq not in taken:
                    chosen.append(self._queue[seq])
        else:
            for qt in islice(self._queue.values(), limit + len(taken)):
                if len(chosen) >= limit:
                    break
                if qt.seq not in taken:
                    chosen.append(qt)
        return chosen

    def _best_hits(self, ex: Executor, limit: int) -> list[QueuedTask]:
        """
        Window tasks with local hits at ``ex``, best hit ratio first and
        oldest first among equals. Dataless tasks count as full hits.

        Scores only the queued tasks that share an object with the executor,
        which selects the same tasks as scoring the whole window.
        """
        boundary = self._window_boundary()
        cached = self.executor_index[ex.id]
        waiting = self._waiting
        counts: dict[int, int] = {}

        if len(cached) <= len(waiting):
            pairs = ((obj, waiting.get(obj)) for obj in cached)
        else:
            pairs = ((obj, seqs) for obj, seqs in waiting.items() if obj in cached)
        for _, seqs in pairs:
            if not seqs:
                continue
            for seq in seqs:
                if seq <= boundary:
                    counts[seq] = counts.get(seq, 0) + 1

        queue = self._queue
        scored = [(-count / len(queue[seq].objects), seq) for seq, count in counts.items()]
        scored.extend((-1.0, seq) for seq in islice(self._dataless.irange(maximum=boundary), limit))
        self.stats.inspected += len(scored)
        return [queue[seq] for _, seq in heapq.nsmallest(limit, scored)]

    def task_finished(self, executor_id: str) -> None:
        """Release the slot of a completed task."""
        ex = self._executors[executor_id]
        if ex.running == 0:
            raise ValueError(f"executor {executor_id!r} has no running task")
        ex.running -= 1
        self._busy_slots -= 1
        self._refresh(ex)

    def expire_pending(self, executor_id: str) -> Optional[TaskSpec]:
        """
        Replay a notification that was never picked up: the executor returns
        to the free pool and its hint task to its place at the queue head.
        """
        ex = self._executors.get(executor_id)
        if ex is None or not ex.pending:
            return None
        ex.pending = False
        hint, ex.hint = ex.hint, None
        if hint is not None:
            self._insert(hint)
        self._refresh(ex)
        logger.debug(f"Notification to {executor_id} expired, task requeued")
        return hint.task if hint else None

    # Index

    def holders(self, obj: str) -> Iterable[str]:
        return self.file_index.get(obj, ())

    def replica_count(self, obj: str) -> int:
        return len(self.file_index.get(obj, ()))

    def pending_replicas(self, obj: str) -> int:
        """Copies of ``obj`` admitted to a cache but not yet published to the index."""
        return self._reserved.get(obj, 0)

    def reserve_replica(self, obj: str) -> None:
        """Count a copy admitted ahead of its index update; the update settles it."""
        self._reserved[obj] = self._reserved.get(obj, 0) + 1

    def _settle_replica(self, obj: str) -> None:
        count = self._reserved.get(obj, 0)
        if count > 1:
            self._reserved[obj] = count - 1
        elif count:
            del self._reserved[obj]

    def on_index_update(
        self,
        executor_id: str,
        added: Iterable[str] = (),
        evicted: Iterable[str] = (),
    ) -> None:
        """
        Apply an executor's cache delta to both indices.

        Updates for an unknown (e.g. already released) executor are ignored.
        """
        added = tuple(added)
        for obj in added:
            self._settle_replica(obj)
        objects = self.executor_index.get(executor_id)
        if objects is None:
            logger.warning(f"Index update for unknown executor {executor_id} ignored")
            return

        grew = False
        for obj in added:
            if obj in objects:
                continue
            objects.add(obj)
            grew = True
            holders = self.file_index.get(obj)
            if holders is None:
                holders = self.file_index[obj] = SortedSet()
                for seq in self._waiting.get(obj, ()):
                    self._orphans.discard(seq)
            holders.add(executor_id)

        new_orphan = None
        for obj in evicted:
            if obj not in objects:
                continue
            objects.discard(obj)
            holders = self.file_index[obj]
            holders.discard(executor_id)
            if holders:
                continue
            del self.file_index[obj]
            for seq in self._waiting.get(obj, ()):
                qt = self._queue[seq]
                if seq not in self._orphans and self._is_orphan(qt):
                    self._orphans.add(seq)
                    new_orphan = seq if new_orphan is None else min(new_orphan, seq)

        ex = self._executors[executor_id]
        if grew and ex.parked:
            self._unpark(ex)
        if new_orphan is not None and self._parked:
            if self._queue.bisect_left(new_orphan) < self.window_size:
                self._unpark_all()

    def classify_hit(self, task: TaskSpec, executor_id: str) -> HitClassification:
        """Partition a task's objects into local / global / free hits and misses."""
        if executor_id not in self._executors:
            raise ValueError(f"executor {executor_id!r} is not registered")
        objects = frozenset(task.required_objects)
        local = objects & self.executor_index[executor_id]
        cache_hits = frozenset(obj for obj in objects if obj in self.file_index)
        free_hits = frozenset(
            obj
            for obj in cache_hits
            if any(self._executors[e].state == TransientState.FREE for e in self.file_index[obj])
        )
        return HitClassification(
            local_hits=len(local),
            misses=len(objects) - len(local),
            cache_hits=cache_hits,
            cache_misses=objects - cache_hits,
            free_hits=free_hits,
            free_misses=objects - free_hits,
        )

    def check_consistency(self) -> None:
        """Assert the file and executor indices are mutual inverses."""
        for obj, holders in self.file_index.items():
            assert holders, f"empty holder set left for {obj}"
            for executor_id in holders:
                assert executor_id in self._executors, f"{obj} indexed at unknown {executor_id}"
                assert obj in self.executor_index[executor_id], f"{obj} missing from {executor_id}"
        for executor_id, objects in self.executor_index.items():
            for obj in objects:
                assert executor_id in self.file_index.get(obj, ()), f"{executor_id} lists unindexed {obj}"
        assert len(self._seq_of) == len(self._queue), "queue bookkeeping out of sync"

"""
Run metrics.

Provides:
- ``MetricsLedger``: counters, throughput series, per-task response times and
  CPU-time accounting collected during a run
- Derived metrics: hit rates, speedup, performance index, slowdown,
  average response time, model error
- ``build_report``: every derived metric of a run as a ``RunReport``
"""

from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from app.core.exceptions import EmptyWorkloadError
from app.core.units import US_PER_S
from app.models.metrics import AccessClass, IntervalSlowdown, RunReport
from app.models.workload import ArrivalSchedule

US_PER_HOUR = 3600 * US_PER_S


class SeriesSample(NamedTuple):
    time_us: int
    throughput_local_bps: float
    throughput_remote_bps: float
    throughput_gpfs_bps: float
    ideal_bps: float
    queue_len: int
    nodes: int
    busy: int
    cpu_util: float

    @property
    def throughput_bps(self) -> float:
        return self.throughput_local_bps + self.throughput_remote_bps + self.throughput_gpfs_bps


class TaskRecord(NamedTuple):
    task_id: int
    arrival_us: int
    wq_us: int
    e_us: int
    d_us: int

    @property
    def response_us(self) -> int:
        return self.wq_us + self.e_us + self.d_us

    @property
    def completion_us(self) -> int:
        return self.arrival_us + self.response_us


def _zero_bits() -> dict[AccessClass, int]:
    return {access: 0 for access in AccessClass}


@dataclass
class MetricsLedger:
    """Everything measured during one run. Owned by that run."""

    slots_per_node: int = 1
    hits: dict[AccessClass, int] = field(default_factory=_zero_bits)
    bits: dict[AccessClass, int] = field(default_factory=_zero_bits)
    window_bits: dict[AccessClass, int] = field(default_factory=_zero_bits)
    series: list[SeriesSample] = field(default_factory=list)
    tasks: list[TaskRecord] = field(default_factory=list)
    busy_time_us: int = 0
    node_time_us: int = 0
    open_nodes: dict[str, int] = field(default_factory=dict)
    peak_queue_length: int = 0
    max_nodes: int = 0
    wet_us: int = 0
    last_sample_us: int = 0

    @property
    def h_local(self) -> int:
        return self.hits[AccessClass.LOCAL]

    @property
    def h_remote(self) -> int:
        return self.hits[AccessClass.REMOTE]

    @property
    def h_store(self) -> int:
        return self.hits[AccessClass.STORE]

    @property
    def total_accesses(self) -> int:
        return sum(self.hits.values())

    @property
    def total_bits(self) -> int:
        return sum(self.bits.values())

    @property
    def cpu_time_us(self) -> int:
        """Registered node time times CPU slots (open nodes up to the WET)."""
        open_time = sum(max(0, self.wet_us - since) for since in self.open_nodes.values())
        return (self.node_time_us + open_time) * self.slots_per_node

    def record_task(self, record: TaskRecord, accesses: Sequence[tuple[AccessClass, int]]) -> None:
        """Account a completed task and the objects it read."""
        self.tasks.append(record)
        for access, size_bits in accesses:
            self.hits[access] += 1
            self.bits[access] += size_bits
            self.window_bits[access] += size_bits
        self.busy_time_us += record.e_us
        self.wet_us = max(self.wet_us, record.completion_us)

    def observe_queue(self, queue_length: int) -> None:
        if queue_length > self.peak_queue_length:
            self.peak_queue_length = queue_length

    def node_registered(self, node_id: str, now_us: int) -> None:
        self.open_nodes[node_id] = now_us
        self.max_nodes = max(self.max_nodes, len(self.open_nodes))

    def node_released(self, node_id: str, now_us: int) -> None:
        since = self.open_nodes.pop(node_id)
        self.node_time_us += now_us - since

    def sample(
        self,
        now_us: int,
        ideal_bps: float,
        queue_length: int,
        nodes: int,
        busy: int,
        cpu_util: float,
    ) -> Optional[SeriesSample]:
        """Close the current sampling window at ``now_us``."""
        span = now_us - self.last_sample_us
        if span <= 0:
            return None
        seconds = span / US_PER_S
        sample = SeriesSample(
            time_us=now_us,
            throughput_local_bps=self.window_bits[AccessClass.LOCAL] / seconds,
            throughput_remote_bps=self.window_bits[AccessClass.REMOTE] / seconds,
            throughput_gpfs_bps=self.window_bits[AccessClass.STORE] / seconds,
            ideal_bps=ideal_bps,
            queue_len=queue_length,
            nodes=nodes,
            busy=busy,
            cpu_util=cpu_util,
        )
        self.series.append(sample)
        self.window_bits = _zero_bits()
        self.last_sample_us = now_us
        return sample


def hit_rates(h_local: int, h_remote: int, h_store: int) -> tuple[float, float, float]:
    """(HR_L, HR_C, HR_S): each access class over all accesses."""
    total = h_local + h_remote + h_store
    if total == 0:
        raise EmptyWorkloadError("no file accesses recorded")
    return h_local / total, h_remote / total, h_store / total


def speedup_vs_baseline(wet_baseline_us: float, wet_us: float) -> float:
    return wet_baseline_us / wet_us


def normalize_performance_indices(runs: Sequence[tuple[float, float]]) -> list[float]:
    """
    Speedup per CPU-hour for each ``(sp, cpu_hours)`` pair, scaled so the
    best run of the set scores 1.
    """
    if not runs:
        raise EmptyWorkloadError("performance index needs a non-empty comparison set")
    raw = [sp / cpu_hours for sp, cpu_hours in runs]
    best = max(raw)
    return [value / best for value in raw]


def performance_index(sp: float, cpu_time_hours: float, comparison_set: Sequence[tuple[float, float]]) -> float:
    """Normalized PI of one run against a comparison set (the run is included)."""
    runs = list(comparison_set)
    if (sp, cpu_time_hours) not in runs:
        runs.append((sp, cpu_time_hours))
    best = max(other_sp / other_hours for other_sp, other_hours in runs)
    return (sp / cpu_time_hours) / best


def slowdown_series(tasks: Sequence[TaskRecord], schedule: ArrivalSchedule) -> list[IntervalSlowdown]:
    """
    Per arrival-rate interval: time taken to finish the interval's tasks over
    the time an infinite, free-communication farm would need.
    """
    completion = {record.task_id: record.completion_us for record in tasks}
    result = []
    for interval in schedule.intervals:
        if interval.task_count == 0:
            continue
        ids = range(interval.first_task, interval.first_task + interval.task_count)
        ideal = interval.last_arrival_us + schedule.compute_time_us - interval.start_us
        actual = max(completion.get(task_id, 0) for task_id in ids) - interval.start_us
        result.append(
            IntervalSlowdown(
                interval=interval.index,
                rate_per_s=interval.rate_per_s,
                start_us=interval.start_us,
                task_count=interval.task_count,
                ideal_us=ideal,
                actual_us=actual,
                slowdown=actual / ideal if ideal > 0 else 1.0,
            )
        )
    return result


def average_response_time(tasks: Sequence[TaskRecord]) -> float:
    """Mean of WQ_T + E_T + D_T over completed tasks, in µs."""
    if not tasks:
        raise EmptyWorkloadError("no completed tasks")
    return sum(record.response_us for record in tasks) / len(tasks)


def model_error(sim_wet_us: float, analytic_wet_us: float) -> float:
    """Relative error of the simulated against the analytic WET, in percent."""
    if analytic_wet_us <= 0:
        raise ValueError("analytic execution time must be positive")
    return abs(sim_wet_us - analytic_wet_us) / analytic_wet_us * 100.0


def _throughputs(series: Sequence[SeriesSample], percentile: float) -> dict[str, float]:
    if not series:
        return {"total": 0.0, "local": 0.0, "remote": 0.0, "store": 0.0}
    columns = {
        "total": np.array([s.throughput_bps for s in series]),
        "local": np.array([s.throughput_local_bps for s in series]),
        "remote": np.array([s.throughput_remote_bps for s in series]),
        "store": np.array([s.throughput_gpfs_bps for s in series]),
    }
    return {name: float(np.percentile(values, percentile)) for name, values in columns.items()}


def build_report(
    ledger: MetricsLedger,
    policy: str,
    cache_bits: int,
    ideal_wet_us: int,
    peak_percentile: float = 99.0,
    baseline_wet_us: Optional[int] = None,
    model_wet_us: Optional[float] = None,
) -> RunReport:
    """Derive every reported metric of a finished run."""
    if not ledger.tasks:
        raise EmptyWorkloadError("cannot report on a run without completed tasks")

    if ledger.total_accesses:
        hr_local, hr_remote, hr_store = hit_rates(ledger.h_local, ledger.h_remote, ledger.h_store)
    else:
        hr_local, hr_remote, hr_store = 0.0, 0.0, 0.0

    wet = ledger.wet_us
    wet_s = wet / US_PER_S if wet else 1.0
    peaks = _throughputs(ledger.series, peak_percentile)
    count = len(ledger.tasks)
    cpu_time = ledger.cpu_time_us
    cpu_hours = cpu_time / US_PER_HOUR

    speedup = speedup_vs_baseline(baseline_wet_us, wet) if baseline_wet_us and wet else None
    pi = None
    if speedup is not None and cpu_hours > 0:
        pi = performance_index(speedup, cpu_hours, [])

    return RunReport(
        policy=policy,
        cache_bits=cache_bits,
        task_count=count,
        wet_us=wet,
        ideal_wet_us=ideal_wet_us,
        h_local=ledger.h_local,
        h_remote=ledger.h_remote,
        h_store=ledger.h_store,
        hr_local=hr_local,
        hr_remote=hr_remote,
        hr_store=hr_store,
        bytes_local=ledger.bits[AccessClass.LOCAL] // 8,
        bytes_remote=ledger.bits[AccessClass.REMOTE] // 8,
        bytes_store=ledger.bits[AccessClass.STORE] // 8,
        avg_throughput_bps=ledger.total_bits / wet_s,
        peak_throughput_bps=peaks["total"],
        avg_throughput_local_bps=ledger.bits[AccessClass.LOCAL] / wet_s,
        avg_throughput_remote_bps=ledger.bits[AccessClass.REMOTE] / wet_s,
        avg_throughput_store_bps=ledger.bits[AccessClass.STORE] / wet_s,
        peak_throughput_local_bps=peaks["local"],
        peak_throughput_remote_bps=peaks["remote"],
        peak_throughput_store_bps=peaks["store"],
        efficiency=min(1.0, ideal_wet_us / wet) if wet else 1.0,
        slowdown=wet / ideal_wet_us if ideal_wet_us else 1.0,
        speedup=speedup,
        cpu_hours=cpu_hours,
        performance_index=pi,
        mean_cpu_util=ledger.busy_time_us / cpu_time if cpu_time else 0.0,
        avg_response_us=average_response_time(ledger.tasks),
        avg_wait_us=sum(r.wq_us for r in ledger.tasks) / count,
        avg_exec_us=sum(r.e_us for r in ledger.tasks) / count,
        avg_delivery_us=sum(r.d_us for r in ledger.tasks) / count,
        peak_queue_length=ledger.peak_queue_length,
        max_nodes=ledger.max_nodes,
        model_wet_us=int(round(model_wet_us)) if model_wet_us is not None else None,
        model_error_pct=model_error(wet, model_wet_us) if model_wet_us else None,
    )

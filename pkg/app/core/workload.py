"""
Workload generation.

Provides:
- ``build_schedule``: the stepped arrival ramp A_i = min(ceil(A_{i-1} * growth), max)
- ``arrival_times``: per-task arrival instants (evenly spaced, or Poisson)
- ``assign_files``: task stream with uniform / Zipf / trace file selection
- ``read_trace``: trace replay (``arrival_us<TAB>file_id<TAB>compute_us``)
- Ideal execution time and ideal throughput of a schedule

Generation is deterministic for a given seed.
"""

import math
from pathlib import Path
from typing import Iterable, Iterator, Optional

import numpy as np

from app.core.exceptions import EmptyWorkloadError, TraceReadError
from app.core.logging import get_logger
from app.core.units import US_PER_S
from app.models.task import TaskSpec
from app.models.workload import ArrivalInterval, ArrivalSchedule, FileSelection, WorkloadSpec

logger = get_logger(__name__)

# Drop float noise such as 26.000000000000004 before rounding rates up.
_RATE_DIGITS = 9


def file_id(index: int) -> str:
    return f"f{index}"


def next_rate(rate: float, growth: float, max_rate: float) -> float:
    return min(float(math.ceil(round(rate * growth, _RATE_DIGITS))), max_rate)


def _interval_arrivals(
    interval: ArrivalInterval,
    poisson: bool,
    rng: Optional[np.random.Generator],
) -> np.ndarray:
    count = interval.task_count
    if count == 0:
        return np.empty(0, dtype=np.int64)
    if poisson:
        # A Poisson process conditioned on its count is a sorted uniform sample.
        return np.sort(rng.integers(interval.start_us, interval.end_us, size=count))
    offsets = np.arange(count, dtype=np.int64) * US_PER_S / interval.rate_per_s
    return interval.start_us + np.floor(offsets).astype(np.int64)


def build_schedule(spec: WorkloadSpec, seed: int = 0) -> ArrivalSchedule:
    """
    Build the stepped arrival schedule.

    Each interval lasts ``interval_us`` at a constant rate; generation stops
    exactly at ``task_count`` and the final interval is truncated to the time
    its tasks need at that rate.

    Args:
        spec: Workload definition
        seed: Seed for Poisson arrivals (unused for evenly spaced ones)

    Returns:
        ArrivalSchedule covering exactly ``spec.task_count`` tasks

    Raises:
        EmptyWorkloadError: The workload yields no tasks
    """
    rng = np.random.default_rng(seed) if spec.poisson else None
    intervals: list[ArrivalInterval] = []
    rate = spec.initial_rate_per_s
    start = 0
    remaining = spec.task_count
    emitted = 0

    constant = spec.initial_rate_per_s >= spec.max_rate_per_s

    while remaining > 0:
        if constant:
            per_interval = remaining + 1
        else:
            per_interval = math.floor(round(rate * spec.interval_us / US_PER_S, _RATE_DIGITS))
        if per_interval == 0 and rate >= spec.max_rate_per_s:
            raise EmptyWorkloadError(
                f"rate {rate}/s never produces a task within a {spec.interval_us}us interval"
            )
        count = min(per_interval, remaining)
        if count < per_interval:
            end = start + math.ceil(count * US_PER_S / rate)
        else:
            end = start + spec.interval_us

        interval = ArrivalInterval(
            index=len(intervals),
            rate_per_s=rate,
            start_us=start,
            end_us=end,
            task_count=count,
            first_task=emitted,
        )
        arrivals = _interval_arrivals(interval, spec.poisson, rng)
        if count:
            interval.last_arrival_us = int(arrivals[-1])
        intervals.append(interval)

        emitted += count
        remaining -= count
        start = end
        rate = next_rate(rate, spec.growth_factor, spec.max_rate_per_s)

    if emitted == 0:
        raise EmptyWorkloadError("workload spec yields zero tasks")

    return ArrivalSchedule(
        intervals=intervals,
        total_span_us=start,
        compute_time_us=spec.compute_time_us,
        poisson=spec.poisson,
        seed=seed,
    )


def arrival_times(schedule: ArrivalSchedule) -> np.ndarray:
    """Arrival instant of every task, in stream order."""
    rng = np.random.default_rng(schedule.seed) if schedule.poisson else None
    parts = [_interval_arrivals(interval, schedule.poisson, rng) for interval in schedule.intervals]
    return np.concatenate(parts) if parts else np.empty(0, dtype=np.int64)


def ideal_execution_time(schedule: ArrivalSchedule) -> int:
    """
    Workload execution time with infinite resources and free communication.

    The schedule's span (the close of the last arrival slot) plus one task's
    compute time.
    """
    if schedule.task_count == 0:
        raise EmptyWorkloadError("cannot compute the ideal time of an empty schedule")
    return schedule.total_span_us + schedule.compute_time_us


def ideal_throughput(
    schedule: ArrivalSchedule,
    file_size_bits: int,
    t_us: int,
    files_per_task: int = 1,
) -> float:
    """Delivery rate (bps) needed to keep pace with arrivals at time ``t_us``."""
    interval = schedule.interval_at(t_us)
    if interval is None:
        return 0.0
    return interval.rate_per_s * file_size_bits * files_per_task


def _selection_probabilities(spec: WorkloadSpec) -> Optional[np.ndarray]:
    if spec.selection != FileSelection.ZIPF:
        return None
    ranks = np.arange(1, spec.file_count + 1, dtype=np.float64)
    weights = 1.0 / np.power(ranks, spec.zipf_exponent)
    return weights / weights.sum()


def _draw_files(spec: WorkloadSpec, count: int, rng: np.random.Generator) -> np.ndarray:
    """A (count, files_per_task) matrix of file indices, unique within a row."""
    width = spec.files_per_task
    if width == 0:
        return np.empty((count, 0), dtype=np.int64)
    probabilities = _selection_probabilities(spec)
    if width == 1:
        if probabilities is None:
            return rng.integers(0, spec.file_count, size=(count, 1))
        return rng.choice(spec.file_count, size=(count, 1), p=probabilities)
    return np.stack(
        [rng.choice(spec.file_count, size=width, replace=False, p=probabilities) for _ in range(count)]
    )


def assign_files(schedule: ArrivalSchedule, spec: WorkloadSpec, seed: int) -> Iterator[TaskSpec]:
    """
    Stream the tasks of a schedule with their required files.

    Args:
        schedule: Built arrival schedule
        spec: Workload definition (dataset, selection, per-task costs)
        seed: Seed for file selection

    Yields:
        TaskSpec in arrival order, ids 0..task_count-1
    """
    if spec.selection == FileSelection.TRACE:
        yield from read_trace(spec.trace_path, spec.dispatch_overhead_us)
        return

    rng = np.random.default_rng(seed)
    arrivals = arrival_times(schedule)
    files = _draw_files(spec, len(arrivals), rng)
    for task_id, (arrival, row) in enumerate(zip(arrivals.tolist(), files.tolist())):
        yield TaskSpec(
            id=task_id,
            required_objects=tuple(file_id(index) for index in row),
            compute_time_us=spec.compute_time_us,
            dispatch_overhead_us=spec.dispatch_overhead_us,
            arrival_time_us=arrival,
        )


def read_trace(path: Path, dispatch_overhead_us: int = 0) -> list[TaskSpec]:
    """
    Load a task trace.

    One task per line: ``arrival_us<TAB>file_id<TAB>compute_us``. Several
    files may be comma-separated; ``-`` or an empty field means no files.
    Blank lines and ``#`` comments are skipped.

    Raises:
        TraceReadError: Unreadable file, malformed line or decreasing arrivals
    """
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise TraceReadError(f"cannot read trace {path}: {e}") from e

    tasks: list[TaskSpec] = []
    last_arrival = 0
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = raw.rstrip("\n").split("\t")
        if len(fields) != 3:
            raise TraceReadError(f"{path}:{lineno}: expected 3 tab-separated fields, got {len(fields)}")
        try:
            arrival = int(fields[0])
            compute = int(fields[2])
        except ValueError as e:
            raise TraceReadError(f"{path}:{lineno}: {e}") from e
        if arrival < last_arrival:
            raise TraceReadError(f"{path}:{lineno}: arrival {arrival} is earlier than the previous line")
        names = fields[1].strip()
        objects = () if names in ("", "-") else tuple(name.strip() for name in names.split(","))
        try:
            tasks.append(
                TaskSpec(
                    id=len(tasks),
                    required_objects=objects,
                    compute_time_us=compute,
                    dispatch_overhead_us=dispatch_overhead_us,
                    arrival_time_us=arrival,
                )
            )
        except ValueError as e:
            raise TraceReadError(f"{path}:{lineno}: {e}") from e
        last_arrival = arrival

    if not tasks:
        raise TraceReadError(f"trace {path} holds no tasks")
    logger.info(f"Loaded {len(tasks)} tasks from trace {path}")
    return tasks


def schedule_from_tasks(tasks: list[TaskSpec]) -> ArrivalSchedule:
    """A single-interval schedule describing an explicit task list (trace replay)."""
    if not tasks:
        raise EmptyWorkloadError("no tasks to schedule")
    last = tasks[-1].arrival_time_us
    span = last + 1
    interval = ArrivalInterval(
        index=0,
        rate_per_s=len(tasks) * US_PER_S / span,
        start_us=0,
        end_us=span,
        task_count=len(tasks),
        last_arrival_us=last,
    )
    return ArrivalSchedule(
        intervals=[interval],
        total_span_us=span,
        compute_time_us=max(task.compute_time_us for task in tasks),
    )


def generate_workload(spec: WorkloadSpec, seed: int) -> tuple[ArrivalSchedule, list[TaskSpec]]:
    """Build the schedule and materialize its task list."""
    if spec.selection == FileSelection.TRACE:
        tasks = read_trace(spec.trace_path, spec.dispatch_overhead_us)
        return schedule_from_tasks(tasks), tasks

    schedule = build_schedule(spec, seed)
    tasks = list(assign_files(schedule, spec, seed))
    logger.info(
        f"Generated {len(tasks)} tasks over {len(schedule.intervals)} intervals "
        f"spanning {schedule.total_span_us / US_PER_S:.1f}s"
    )
    return schedule, tasks


def working_set_bits(tasks: Iterable[TaskSpec], size_bits: int) -> int:
    """Total size of the distinct objects a task list touches."""
    return len({obj for task in tasks for obj in task.required_objects}) * size_bits

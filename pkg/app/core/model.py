"""
Closed-form model of a data-diffusion task farm.

Provides:
- Bandwidth under load and object copy time
- Per-task cost (dispatch + optional copy + compute)
- Workload-level execution time, efficiency and speedup
- The working-set capacity claim and bandwidth assumption checks
- ``predict``: a constant-rate summary of a run config, used as the oracle
  the simulator is compared against

Time is in microseconds, sizes in bits, bandwidth in bits per second. The
functions are pure.
"""

import math
from fractions import Fraction
from typing import Optional

from app.core.exceptions import NoPathError
from app.core.logging import get_logger
from app.core.units import US_PER_S
from app.models.metrics import ModelReport
from app.models.storage import DataObject
from app.models.task import TaskSpec, WorkloadSummary

logger = get_logger(__name__)


def available_bandwidth(ideal_bps: float, load_count: int) -> float:
    """
    Bandwidth one transfer gets from a store serving ``load_count`` transfers.

    Fair share: the ideal bandwidth split evenly, full bandwidth when idle.
    """
    return ideal_bps / max(1, load_count)


def transfer_time_us(size_bits: int, bandwidth_bps: float, latency_us: int = 0) -> int:
    """Time to move ``size_bits`` at a fixed rate, rounded up exactly to whole µs."""
    if bandwidth_bps <= 0:
        raise NoPathError(f"cannot move {size_bits} bits over a zero-bandwidth path")
    return math.ceil(Fraction(size_bits * US_PER_S) / Fraction(bandwidth_bps)) + latency_us


def copy_time(
    obj: DataObject,
    src_avail_bps: float,
    dst_avail_bps: float,
    latency_us: int = 0,
) -> int:
    """
    Time to copy an object between two stores.

    Args:
        obj: The object being copied
        src_avail_bps: Bandwidth available at the source
        dst_avail_bps: Bandwidth available at the destination
        latency_us: Fixed per-transfer latency added on top

    Returns:
        Copy time in µs, bottlenecked by the slower endpoint

    Raises:
        NoPathError: If either bandwidth is zero
    """
    return transfer_time_us(obj.size_bits, min(src_avail_bps, dst_avail_bps), latency_us)


def cost_per_task(task: TaskSpec, cached: bool, copy_us: int = 0) -> int:
    """Dispatch overhead plus compute, plus the copy when the data is not cached."""
    base = task.dispatch_overhead_us + task.compute_time_us
    return base if cached else base + copy_us


def computational_intensity(b_us: float, a_per_s: float) -> float:
    """I = B * A. 1 is full utilization, above 1 arrivals outpace a single executor."""
    return b_us / US_PER_S * a_per_s


def workload_execution_time(
    b_us: float,
    executor_count: int,
    a_per_s: float,
    task_count: int,
) -> float:
    """
    V = max(B/|T|, 1/A) * |K|, in µs.

    Pass Y instead of B for the execution time with overheads.
    """
    if a_per_s <= 0:
        raise ValueError("arrival rate must be positive")
    return max(b_us / executor_count, US_PER_S / a_per_s) * task_count


def efficiency(b_us: float, y_us: float, executor_count: int, a_per_s: float) -> float:
    """
    E = V / W in its piecewise form, clamped to 1.

    1 when the farm keeps pace (Y/|T| <= 1/A); otherwise the larger of B/Y and
    |T|/(A*Y).
    """
    if a_per_s <= 0:
        raise ValueError("arrival rate must be positive")
    y_s = y_us / US_PER_S
    if y_s / executor_count <= 1.0 / a_per_s:
        return 1.0
    return min(1.0, max(b_us / y_us, executor_count / (a_per_s * y_s)))


def speedup(e: float, executor_count: int) -> float:
    return e * executor_count


def check_working_set_claim(aggregate_transient_capacity_bits: int, working_set_bits: int) -> bool:
    """True when the executors' caches together can hold the whole working set."""
    return aggregate_transient_capacity_bits >= working_set_bits


def check_bandwidth_assumptions(
    node_bandwidth_bps: float,
    node_count: int,
    store_bandwidth_bps: float,
) -> list[str]:
    """
    Check the transient-vs-persistent bandwidth assumptions.

    Returns a list of warnings (also logged); never rejects the config.
    """
    warnings = []
    if node_bandwidth_bps >= store_bandwidth_bps:
        warnings.append(
            f"node bandwidth {node_bandwidth_bps:.3g} bps is not below "
            f"persistent store bandwidth {store_bandwidth_bps:.3g} bps"
        )
    aggregate = node_bandwidth_bps * node_count
    if node_count and aggregate < store_bandwidth_bps:
        warnings.append(
            f"aggregate transient bandwidth {aggregate:.3g} bps is below "
            f"persistent store bandwidth {store_bandwidth_bps:.3g} bps"
        )
    for message in warnings:
        logger.warning(message)
    return warnings


def estimate_miss_rate(
    caching: bool,
    aggregate_cache_bits: int,
    working_set_bits: int,
    distinct_objects: int,
    accesses: int,
) -> float:
    """
    Expected fraction of accesses served from the persistent store.

    Without caching every access misses. When the working set fits only
    compulsory misses remain; otherwise uniform access hits at most
    capacity/working-set of the time.
    """
    if accesses == 0:
        return 0.0
    if not caching:
        return 1.0
    compulsory = min(1.0, distinct_objects / accesses)
    if working_set_bits == 0 or check_working_set_claim(aggregate_cache_bits, working_set_bits):
        return compulsory
    return max(compulsory, 1.0 - aggregate_cache_bits / working_set_bits)


def predict(
    summary: WorkloadSummary,
    overhead_us: float,
    object_size_bits: int,
    objects_per_task: int,
    miss_rate: float,
    store_bandwidth_bps: float,
    node_bandwidth_bps: float,
    slots_per_node: int,
    aggregate_cache_bits: int,
    latency_us: int = 0,
    expected_efficiency: Optional[float] = None,
) -> ModelReport:
    """
    Closed-form report for a constant-rate workload.

    The copy term assumes every executor fetches at once, so the store is
    shared |T| ways and each node's link ``slots_per_node`` ways; misses pay
    that contended copy time per object.
    """
    executors = summary.executor_count
    contended_bps = min(
        available_bandwidth(store_bandwidth_bps, executors),
        available_bandwidth(node_bandwidth_bps, slots_per_node),
    )
    copy_us = 0.0
    if objects_per_task and miss_rate > 0:
        copy_us = transfer_time_us(object_size_bits, contended_bps, latency_us) * objects_per_task

    b_us = summary.avg_exec_time_us
    y_us = b_us + overhead_us + miss_rate * copy_us
    a = summary.arrival_rate_per_s
    e = efficiency(b_us, y_us, executors, a) if b_us > 0 else 1.0

    return ModelReport(
        task_count=summary.task_count,
        executor_count=executors,
        arrival_rate_per_s=a,
        overhead_us=overhead_us,
        avg_exec_time_us=b_us,
        avg_exec_with_overhead_us=y_us,
        miss_rate=miss_rate,
        contended_copy_us=copy_us,
        computational_intensity=computational_intensity(b_us, a),
        execution_time_us=workload_execution_time(b_us, executors, a, summary.task_count),
        execution_time_with_overhead_us=workload_execution_time(y_us, executors, a, summary.task_count),
        efficiency=e,
        speedup=speedup(e, executors),
        working_set_bits=summary.working_set_bits,
        aggregate_cache_bits=aggregate_cache_bits,
        working_set_fits=check_working_set_claim(aggregate_cache_bits, summary.working_set_bits),
        expected_efficiency=expected_efficiency,
    )

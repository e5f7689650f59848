"""
Reported metrics: hit classification, per-interval slowdown and the run report.
"""

from enum import Enum
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field


class AccessClass(str, Enum):
    """Where a file access was served from."""

    LOCAL = "local"
    REMOTE = "remote"
    STORE = "gpfs"


class HitClassification(BaseModel):
    """
    Partition of a task's objects.

    ``local_hits``/``misses`` count objects indexed at the given executor.
    ``cache_hits`` are objects held by any executor, ``cache_misses`` by none;
    ``free_hits`` are objects held by at least one free executor, so
    ``free_hits`` is a subset of ``cache_hits`` and ``cache_misses`` a subset
    of ``free_misses``.
    """

    model_config = ConfigDict(frozen=True)

    local_hits: int = Field(ge=0)
    misses: int = Field(ge=0)
    cache_hits: frozenset[str] = frozenset()
    cache_misses: frozenset[str] = frozenset()
    free_hits: frozenset[str] = frozenset()
    free_misses: frozenset[str] = frozenset()


class IntervalSlowdown(BaseModel):
    """Slowdown of the tasks that arrived during one arrival-rate interval."""

    interval: int
    rate_per_s: float
    start_us: int
    task_count: int
    ideal_us: int
    actual_us: int
    slowdown: float


class RunReport(BaseModel):
    """Every derived metric of one simulation run."""

    policy: str
    cache_bits: int
    task_count: int
    wet_us: int
    ideal_wet_us: int

    h_local: int
    h_remote: int
    h_store: int
    hr_local: float
    hr_remote: float
    hr_store: float

    bytes_local: int
    bytes_remote: int
    bytes_store: int

    avg_throughput_bps: float
    peak_throughput_bps: float
    avg_throughput_local_bps: float
    avg_throughput_remote_bps: float
    avg_throughput_store_bps: float
    peak_throughput_local_bps: float
    peak_throughput_remote_bps: float
    peak_throughput_store_bps: float

    efficiency: float
    slowdown: float
    speedup: Optional[float] = None
    cpu_hours: float
    performance_index: Optional[float] = None
    mean_cpu_util: float

    avg_response_us: float
    avg_wait_us: float
    avg_exec_us: float
    avg_delivery_us: float

    peak_queue_length: int
    max_nodes: int

    model_wet_us: Optional[int] = None
    model_error_pct: Optional[float] = None


class ModelReport(BaseModel):
    """Closed-form prediction for a workload summarized at constant rate."""

    task_count: int
    executor_count: int
    arrival_rate_per_s: float
    overhead_us: float
    avg_exec_time_us: float
    avg_exec_with_overhead_us: float
    miss_rate: float
    contended_copy_us: float
    computational_intensity: float
    execution_time_us: float
    execution_time_with_overhead_us: float
    efficiency: float
    speedup: float
    working_set_bits: int
    aggregate_cache_bits: int
    working_set_fits: bool
    expected_efficiency: Optional[float] = None

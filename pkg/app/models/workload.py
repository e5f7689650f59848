"""
Workload definition: dataset, arrival ramp and file-selection distribution.
"""

from enum import Enum
from pathlib import Path
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.core.units import DurationUs, SizeBits


class FileSelection(str, Enum):
    """How each task picks the file(s) it reads."""

    UNIFORM = "uniform"
    ZIPF = "zipf"
    TRACE = "trace"


class WorkloadSpec(BaseModel):
    """
    The task stream to generate.

    Defaults reproduce the provisioning study: 10K files of 10MB, 250K tasks
    computing 10ms each, arrival rate starting at 1/s and growing by 1.3x every
    60s up to 1000/s.
    """

    model_config = ConfigDict(extra="forbid")

    file_count: int = Field(default=10_000, gt=0)
    file_size_bits: SizeBits = Field(default=80_000_000, gt=0)
    files_per_task: int = Field(default=1, ge=0)
    task_count: int = Field(default=250_000, gt=0)
    compute_time_us: DurationUs = 10_000
    dispatch_overhead_us: DurationUs = 2_000
    initial_rate_per_s: float = Field(default=1.0, gt=0)
    growth_factor: float = Field(default=1.3, gt=1.0)
    interval_us: DurationUs = Field(default=60_000_000, gt=0)
    max_rate_per_s: float = Field(default=1000.0, gt=0)
    selection: FileSelection = FileSelection.UNIFORM
    zipf_exponent: float = Field(default=1.0, gt=0)
    trace_path: Optional[Path] = None
    poisson: bool = False

    @model_validator(mode="after")
    def _check_consistency(self) -> "WorkloadSpec":
        if self.initial_rate_per_s > self.max_rate_per_s:
            raise ValueError("initial_rate_per_s must not exceed max_rate_per_s")
        if self.selection == FileSelection.TRACE and self.trace_path is None:
            raise ValueError("selection=trace requires trace_path")
        if self.files_per_task > self.file_count:
            raise ValueError("files_per_task cannot exceed file_count")
        return self

    @property
    def working_set_bits(self) -> int:
        """Total size of the dataset the workload draws from."""
        return self.file_count * self.file_size_bits


class ArrivalInterval(BaseModel):
    """One constant-rate stretch of the arrival ramp."""

    index: int = Field(ge=0)
    rate_per_s: float = Field(gt=0)
    start_us: int = Field(ge=0)
    end_us: int = Field(ge=0)
    task_count: int = Field(ge=0)
    first_task: int = Field(default=0, ge=0)
    last_arrival_us: int = Field(default=0, ge=0)


class ArrivalSchedule(BaseModel):
    """The complete ramp: intervals in order and the span they cover."""

    intervals: list[ArrivalInterval]
    total_span_us: int = Field(ge=0)
    compute_time_us: int = Field(default=0, ge=0)
    poisson: bool = False
    seed: int = 0

    @property
    def task_count(self) -> int:
        return sum(interval.task_count for interval in self.intervals)

    @property
    def rates(self) -> list[float]:
        return [interval.rate_per_s for interval in self.intervals]

    @property
    def last_arrival_us(self) -> int:
        busy = [interval for interval in self.intervals if interval.task_count]
        return busy[-1].last_arrival_us if busy else 0

    def interval_at(self, t_us: int) -> Optional[ArrivalInterval]:
        """The interval whose [start, end) contains ``t_us``, if any."""
        for interval in self.intervals:
            if interval.start_us <= t_us < interval.end_us:
                return interval
        return None

    def interval_of_task(self, task_index: int) -> ArrivalInterval:
        """The interval that emits the task with the given stream index."""
        for interval in self.intervals:
            if task_index < interval.first_task + interval.task_count:
                return interval
        raise IndexError(f"task index {task_index} beyond schedule")

"""
Tasks of the incoming stream and the workload-level summary used by the model.
"""

from pydantic import BaseModel, ConfigDict, Field, model_validator


class TaskSpec(BaseModel):
    """
    One task: the objects it reads, how long it computes and its dispatch cost.

    An empty ``required_objects`` tuple is a no-I/O task (micro-benchmarks).
    """

    model_config = ConfigDict(frozen=True)

    id: int = Field(ge=0)
    required_objects: tuple[str, ...] = ()
    compute_time_us: int = Field(ge=0)
    dispatch_overhead_us: int = Field(default=0, ge=0)
    arrival_time_us: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _unique_objects(self) -> "TaskSpec":
        if len(set(self.required_objects)) != len(self.required_objects):
            raise ValueError("required_objects must not repeat an object")
        return self


class WorkloadSummary(BaseModel):
    """Constant-rate summary of a workload, the input of the closed-form model."""

    task_count: int = Field(ge=0)
    avg_exec_time_us: float = Field(ge=0)
    avg_exec_with_overhead_us: float = Field(ge=0)
    arrival_rate_per_s: float = Field(gt=0)
    executor_count: int = Field(ge=1)
    working_set_bits: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _overhead_not_negative(self) -> "WorkloadSummary":
        if self.avg_exec_with_overhead_us < self.avg_exec_time_us:
            raise ValueError("Y (with overhead) must be at least B")
        return self

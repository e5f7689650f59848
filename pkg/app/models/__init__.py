"""
Domain models and schemas module.
Contains the pydantic types shared by the model, simulator and reports.
"""

from app.models.config import (
    AllocationPolicy,
    DispatchPolicy,
    EngineConfig,
    EvictionPolicyName,
    MetricsConfig,
    NodeConfig,
    ProvisionerConfig,
    SchedulerConfig,
    StoreConfig,
)
from app.models.metrics import (
    AccessClass,
    HitClassification,
    IntervalSlowdown,
    ModelReport,
    RunReport,
)
from app.models.storage import (
    DataObject,
    PersistentStoreSpec,
    TransientState,
    TransientStoreSpec,
)
from app.models.task import TaskSpec, WorkloadSummary
from app.models.workload import (
    ArrivalInterval,
    ArrivalSchedule,
    FileSelection,
    WorkloadSpec,
)

__all__ = [
    "DataObject",
    "PersistentStoreSpec",
    "TransientStoreSpec",
    "TransientState",
    "TaskSpec",
    "WorkloadSummary",
    "WorkloadSpec",
    "FileSelection",
    "ArrivalInterval",
    "ArrivalSchedule",
    "DispatchPolicy",
    "EvictionPolicyName",
    "AllocationPolicy",
    "SchedulerConfig",
    "NodeConfig",
    "StoreConfig",
    "ProvisionerConfig",
    "MetricsConfig",
    "EngineConfig",
    "AccessClass",
    "HitClassification",
    "IntervalSlowdown",
    "ModelReport",
    "RunReport",
]

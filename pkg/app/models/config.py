"""
Run configuration sections.

Each section maps to one prefix of the flat config file format
(``scheduler.batch_size = 4``). Quantities accept unit suffixes, see
``app.core.units``.
"""

from enum import Enum
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.core.units import DurationUs, OptionalDurationUs, RateBps, SizeBits


class DispatchPolicy(str, Enum):
    """The five dispatch policies of the data-aware scheduler."""

    FIRST_AVAILABLE = "first-available"
    FIRST_CACHE_AVAILABLE = "first-cache-available"
    MAX_CACHE_HIT = "max-cache-hit"
    MAX_COMPUTE_UTIL = "max-compute-util"
    GOOD_CACHE_COMPUTE = "good-cache-compute"

    @property
    def data_aware(self) -> bool:
        return self not in (DispatchPolicy.FIRST_AVAILABLE, DispatchPolicy.FIRST_CACHE_AVAILABLE)

    @property
    def caches(self) -> bool:
        """First-available streams everything and never populates caches."""
        return self is not DispatchPolicy.FIRST_AVAILABLE


class EvictionPolicyName(str, Enum):
    RANDOM = "random"
    FIFO = "fifo"
    LRU = "lru"
    LFU = "lfu"


class AllocationPolicy(str, Enum):
    """How many nodes the provisioner asks for once growth is triggered."""

    ONE_AT_A_TIME = "one-at-a-time"
    ALL_AT_ONCE = "all-at-once"
    EXPONENTIAL = "exponential"
    DEMAND = "demand"


class SchedulerConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    policy: DispatchPolicy = DispatchPolicy.GOOD_CACHE_COMPUTE
    window_multiplier: int = Field(default=100, ge=1)
    window_size: Optional[int] = Field(default=None, ge=1)
    batch_size: int = Field(default=1, ge=1)
    cpu_threshold: float = Field(default=0.8, ge=0.0, le=1.0)
    max_replication: int = Field(default=4, ge=1)
    eviction: EvictionPolicyName = EvictionPolicyName.LRU
    pending_timeout_us: OptionalDurationUs = 60_000_000
    index_staleness_us: DurationUs = 0
    notify_rate_per_s: float = Field(default=3000.0, ge=0.0)
    trace: bool = False


class NodeConfig(BaseModel):
    """One executor node: CPU slots sharing a single local cache."""

    model_config = ConfigDict(extra="forbid")

    slots: int = Field(default=2, ge=1)
    cache_bits: SizeBits = 32_000_000_000
    bandwidth_bps: RateBps = Field(default=1.6e9, gt=0)
    compute_speed: float = Field(default=1.0, gt=0)


class StoreConfig(BaseModel):
    """The persistent shared store."""

    model_config = ConfigDict(extra="forbid")

    id: str = "gpfs"
    bandwidth_bps: RateBps = Field(default=4.4e9, gt=0)
    capacity_bits: SizeBits = Field(default=8 * 10**15, gt=0)
    transfer_latency_us: DurationUs = 0


class ProvisionerConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    disabled: bool = False
    min_nodes: int = Field(default=0, ge=0)
    max_nodes: int = Field(default=64, ge=1)
    allocation_policy: AllocationPolicy = AllocationPolicy.DEMAND
    exponential_factor: float = Field(default=2.0, gt=1.0)
    queue_threshold: float = Field(default=1.0, gt=0)
    allocation_latency_min_us: DurationUs = 30_000_000
    allocation_latency_max_us: DurationUs = 60_000_000
    idle_release_timeout_us: OptionalDurationUs = None
    poll_interval_us: DurationUs = Field(default=1_000_000, gt=0)
    trace: bool = False

    @model_validator(mode="after")
    def _check_bounds(self) -> "ProvisionerConfig":
        if self.min_nodes > self.max_nodes:
            raise ValueError("min_nodes must not exceed max_nodes")
        if self.allocation_latency_min_us > self.allocation_latency_max_us:
            raise ValueError("allocation latency range is inverted (min > max)")
        return self

    @property
    def static_nodes(self) -> int:
        """Nodes registered at t=0 in static mode."""
        return self.max_nodes if self.disabled else self.min_nodes


class MetricsConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    sample_interval_us: DurationUs = Field(default=60_000_000, gt=0)
    peak_percentile: float = Field(default=99.0, gt=0, le=100)
    baseline_wet_us: OptionalDurationUs = None
    expected_efficiency: Optional[float] = Field(default=None, gt=0, le=1)
    write_tasks: bool = True


class EngineConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    max_time_factor: float = Field(default=10.0, gt=1.0)
    result_delivery_us: DurationUs = 0
    check_invariants: bool = False

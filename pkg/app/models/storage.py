"""
Data objects and the persistent / transient stores that hold them.

Sizes are integer bits, bandwidths bits per second.
"""

from enum import Enum

from pydantic import BaseModel, ConfigDict, Field, model_validator


class TransientState(str, Enum):
    """Lifecycle state of a transient store (an executor node)."""

    FREE = "free"
    BUSY = "busy"
    PENDING = "pending"
    RELEASED = "released"


class DataObject(BaseModel):
    """A file of the dataset and the stores that hold a copy of it."""

    model_config = ConfigDict(frozen=True)

    id: str
    size_bits: int = Field(gt=0)
    locations: frozenset[str]
    store_id: str = "gpfs"

    @model_validator(mode="after")
    def _persisted(self) -> "DataObject":
        if self.store_id not in self.locations:
            raise ValueError(f"a data object must be held by its persistent store {self.store_id!r}")
        return self


class PersistentStoreSpec(BaseModel):
    """The always-available shared store holding the authoritative dataset."""

    id: str = "gpfs"
    capacity_bits: int = Field(gt=0)
    ideal_bandwidth_bps: float = Field(gt=0)
    current_load: int = Field(default=0, ge=0)


class TransientStoreSpec(BaseModel):
    """A dynamically acquired executor node with a local cache."""

    id: str
    capacity_bits: int = Field(ge=0)
    ideal_bandwidth_bps: float = Field(gt=0)
    compute_speed: float = Field(default=1.0, gt=0)
    current_load: int = Field(default=0, ge=0)
    state: TransientState = TransientState.FREE

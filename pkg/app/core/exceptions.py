"""
Error types raised by the simulator, model and experiment runner.

Every error carries a short ``code`` tag so the CLI and tests can match on
the failure kind without parsing messages.
"""


class SimulationError(Exception):
    """Base class for all simulator errors."""

    code = "simulation-error"

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)
        self.message = message or self.code


class ConfigError(SimulationError):
    """Malformed, missing or inconsistent configuration."""

    code = "config-error"


class NoPathError(SimulationError):
    """A transfer was requested over a zero-bandwidth path."""

    code = "no-path"


class ObjectTooLargeError(SimulationError):
    """An object is larger than the whole cache."""

    code = "object-too-large"


class AllPinnedError(SimulationError):
    """Eviction cannot free enough unpinned bytes."""

    code = "all-pinned"


class NotResidentError(SimulationError):
    """A pin/unpin targeted an object that is not cached."""

    code = "not-resident"


class NoExecutorsError(SimulationError):
    """An operation needs at least one registered executor."""

    code = "no-executors"


class EmptyWorkloadError(SimulationError):
    """A workload, schedule or ledger holds nothing to work with."""

    code = "empty-workload"


class TraceReadError(SimulationError):
    """A workload trace file could not be read or parsed."""

    code = "trace-unreadable"


class StalledError(SimulationError):
    """The simulation stopped making progress or ran past its time guard."""

    code = "stalled"

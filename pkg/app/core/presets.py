"""
Bundled experiment presets.

Each preset is a partial nested config. Anything not named keeps the field
default, which reproduces the provisioning study's workload (10K x 10MB
files, 250K tasks, arrival ramp 1 -> 1000 tasks/s).
"""

from copy import deepcopy
from typing import Any

from app.core.exceptions import ConfigError

_DRP = {"max_nodes": 64}
_STATIC_64 = {"disabled": True, "min_nodes": 64, "max_nodes": 64}


def _gcc(cache: str) -> dict[str, Any]:
    return {
        "seed": 1,
        "scheduler": {"policy": "good-cache-compute"},
        "node": {"cache_bits": cache},
        "provisioner": dict(_DRP),
    }


PRESETS: dict[str, dict[str, Any]] = {
    "baseline-gpfs": {
        "seed": 1,
        "scheduler": {"policy": "first-available"},
        "node": {"cache_bits": "0"},
        "provisioner": dict(_DRP),
        "metrics": {"expected_efficiency": 0.28},
    },
    "gcc-1gb": _gcc("1GB"),
    "gcc-1.5gb": _gcc("1.5GB"),
    "gcc-2gb": _gcc("2GB"),
    "gcc-4gb": _gcc("4GB"),
    "gcc-4gb-static": {
        "seed": 1,
        "scheduler": {"policy": "good-cache-compute"},
        "node": {"cache_bits": "4GB"},
        "provisioner": dict(_STATIC_64),
    },
    "mch-4gb": {
        "seed": 1,
        "scheduler": {"policy": "max-cache-hit"},
        "node": {"cache_bits": "4GB"},
        "provisioner": dict(_DRP),
    },
    "mcu-4gb": {
        "seed": 1,
        "scheduler": {"policy": "max-compute-util"},
        "node": {"cache_bits": "4GB"},
        "provisioner": dict(_DRP),
    },
    "fca-4gb": {
        "seed": 1,
        "scheduler": {"policy": "first-cache-available"},
        "node": {"cache_bits": "4GB"},
        "provisioner": dict(_DRP),
    },
    "microbench": {
        "seed": 1,
        "workload": {
            "file_count": 10_000,
            "file_size_bits": "1B",
            "task_count": 250_000,
            "compute_time_us": "0",
            "dispatch_overhead_us": "0",
        },
        "scheduler": {"policy": "good-cache-compute", "window_size": 3200, "notify_rate_per_s": 0},
        "node": {"slots": 1, "cache_bits": "1GB"},
        "provisioner": {"disabled": True, "min_nodes": 32, "max_nodes": 32},
    },
    "oracle": {
        "seed": 1,
        "workload": {
            "files_per_task": 0,
            "task_count": 2000,
            "compute_time_us": "10ms",
            "dispatch_overhead_us": "2ms",
            "initial_rate_per_s": 100,
            "max_rate_per_s": 100,
        },
        "scheduler": {"policy": "max-compute-util", "notify_rate_per_s": 0},
        "node": {"slots": 2},
        "provisioner": {"disabled": True, "min_nodes": 4, "max_nodes": 4},
    },
}


def get_preset(name: str) -> dict[str, Any]:
    """Return a copy of a bundled preset."""
    try:
        return deepcopy(PRESETS[name])
    except KeyError:
        known = ", ".join(sorted(PRESETS))
        raise ConfigError(f"unknown preset {name!r} (known: {known})") from None

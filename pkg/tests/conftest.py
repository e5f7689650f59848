"""
Shared fixtures for the simulator test suite.
"""

import os

import hypothesis
import pytest

from app.core.config import load_run_config

hypothesis.settings.register_profile("ci", max_examples=100, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=10, deadline=None)
hypothesis.settings.register_profile("dev", max_examples=50, deadline=None)
hypothesis.settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "dev"))


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run full-size reproductions")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="full-size run, use --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


def _merge(base: dict, extra: dict) -> dict:
    for key, value in extra.items():
        if isinstance(value, dict) and isinstance(base.get(key), dict):
            _merge(base[key], value)
        else:
            base[key] = value
    return base


@pytest.fixture
def make_config(tmp_path):
    """
    Factory for small static-pool configs: one 1-slot node, no dispatch
    overhead, instant notifications, 80 Mb files over an 80 Mb/s store.
    """

    def _make(**sections):
        overrides = {
            "seed": 7,
            "output_dir": str(tmp_path / "out"),
            "workload": {
                "file_count": 10,
                "file_size_bits": "80Mb",
                "task_count": 10,
                "compute_time_us": 0,
                "dispatch_overhead_us": 0,
                "initial_rate_per_s": 1,
                "max_rate_per_s": 1,
            },
            "scheduler": {"policy": "max-compute-util", "notify_rate_per_s": 0},
            "node": {"slots": 1, "cache_bits": "1GB", "bandwidth_bps": "1Gbps"},
            "store": {"bandwidth_bps": "80Mbps"},
            "provisioner": {"disabled": True, "min_nodes": 1, "max_nodes": 1},
        }
        return load_run_config(overrides=_merge(overrides, sections))

    return _make


@pytest.fixture
def trace_config(tmp_path, make_config):
    """
    Factory for configs replaying an explicit task trace.

    Each trace line is ``(arrival_us, files, compute_us)`` with ``files`` a
    comma-separated id list or ``-``.
    """

    def _make(lines, **sections):
        path = tmp_path / "trace.tsv"
        path.write_text("".join(f"{arrival}\t{files}\t{compute}\n" for arrival, files, compute in lines))
        workload = {"selection": "trace", "trace_path": str(path)}
        workload.update(sections.pop("workload", {}))
        return make_config(workload=workload, **sections)

    return _make

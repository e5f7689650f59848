"""
End-to-end reproductions of the provisioning study.

Full-size runs (250K tasks over 64 nodes) are marked ``slow`` and only run
with ``--runslow``; the scaled-down checks below them run by default.
"""

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from app.core.config import load_run_config
from app.core.experiments import bench_scheduler, run_single
from app.core.workload import build_schedule
from app.models.config import DispatchPolicy
from app.models.workload import WorkloadSpec


def _run(preset: str, **overrides):
    return run_single(load_run_config(preset=preset, overrides=overrides)).report


# Full-size runs


def test_default_schedule():
    """250K tasks, the published rate steps, capped at 1000/s, over 1414.9 s."""
    # Act
    schedule = build_schedule(WorkloadSpec())

    # Assert
    assert schedule.task_count == 250_000
    assert {59, 101, 132, 380} <= set(schedule.rates)
    assert max(schedule.rates) == 1000
    assert schedule.total_span_us == pytest.approx(1_414_900_000, abs=100_000)


@pytest.mark.slow
def test_store_only_baseline():
    """Without caching the store saturates and the run takes about 5011 s."""
    # Act
    report = _run("baseline-gpfs")

    # Assert
    assert report.wet_us == pytest.approx(5_011_000_000, rel=0.10)
    assert report.hr_store == 1.0
    assert report.peak_throughput_store_bps == pytest.approx(4.4e9, rel=0.05)


@pytest.mark.slow
def test_working_set_fits_in_the_caches():
    """At 2 GB per node the farm keeps pace with the ramp on local hits."""
    # Act
    report = _run("gcc-2gb")

    # Assert
    assert report.wet_us == pytest.approx(1_436_000_000, rel=0.10)
    assert report.hr_local >= 0.95
    assert report.peak_queue_length <= 15_000


@pytest.mark.slow
def test_working_set_exceeds_the_caches():
    """At 1 GB per node hit rates are capacity bound and the WET lands between the extremes."""
    # Act
    small = _run("gcc-1gb")
    fits = _run("gcc-2gb")
    baseline = _run("baseline-gpfs")

    # Assert
    assert 0 < small.hr_local < 0.64
    assert small.bytes_store > 0.3 * (small.bytes_local + small.bytes_remote + small.bytes_store)
    assert fits.wet_us < small.wet_us < baseline.wet_us


@pytest.mark.slow
def test_policy_ordering_at_4gb():
    """good-cache-compute < max-compute-util < max-cache-hit < first-available."""
    # Act
    gcc = _run("gcc-4gb")
    mcu = _run("mcu-4gb")
    mch = _run("mch-4gb")
    baseline = _run("baseline-gpfs")

    # Assert
    assert gcc.wet_us < mcu.wet_us < mch.wet_us < baseline.wet_us
    assert mch.mean_cpu_util < 0.6
    assert mcu.mean_cpu_util > 0.9
    assert mch.hr_local + mch.hr_remote >= 0.90


@pytest.mark.slow
def test_provisioning_saves_cpu_hours():
    """The dynamic pool uses fewer CPU-hours than 64 static nodes on the same workload."""
    # Act
    dynamic = _run("gcc-4gb")
    static = _run("gcc-4gb-static")

    # Assert
    assert dynamic.cpu_hours < static.cpu_hours


@pytest.mark.slow
def test_scheduler_decision_rate():
    """Every policy sustains 1000 decisions/s; first-available is the fastest."""
    # Act
    results = {result.policy: result for result in bench_scheduler(load_run_config(preset="microbench"))}

    # Assert
    fa = results.pop(DispatchPolicy.FIRST_AVAILABLE.value)
    assert all(result.decisions_per_s >= 1000 for result in results.values())
    assert all(fa.decisions_per_s > result.decisions_per_s for result in results.values())


# Scaled-down runs

SMALL = {
    "seed": 3,
    "workload": {
        "file_count": 20,
        "file_size_bits": "80Mb",
        "task_count": 400,
        "compute_time_us": "10ms",
        "dispatch_overhead_us": 0,
        "initial_rate_per_s": 20,
        "max_rate_per_s": 20,
    },
    "scheduler": {"notify_rate_per_s": 0},
    "node": {"slots": 2, "cache_bits": "1GB", "bandwidth_bps": "1Gbps"},
    "store": {"bandwidth_bps": "80Mbps"},
    "provisioner": {"disabled": True, "max_nodes": 4},
}


def _small(**sections):
    overrides = {key: dict(value) if isinstance(value, dict) else value for key, value in SMALL.items()}
    for section, values in sections.items():
        overrides[section].update(values)
    return run_single(load_run_config(overrides=overrides)).report


def test_caching_beats_the_store_when_the_working_set_fits():
    """Diffused copies serve most reads and finish well ahead of streaming from the store."""
    # Act
    baseline = _small(scheduler={"policy": "first-available"})
    cached = _small(scheduler={"policy": "good-cache-compute"})

    # Assert
    assert baseline.hr_store == 1.0
    assert cached.hr_local + cached.hr_remote > 0.5
    assert cached.wet_us < baseline.wet_us


def test_dynamic_pool_uses_fewer_cpu_hours():
    """Nodes acquired on demand accrue less time than a pool held from the start."""
    # Arrange
    workload = {"files_per_task": 0, "task_count": 100, "initial_rate_per_s": 1, "max_rate_per_s": 1}
    latency = {"allocation_latency_min_us": "5s", "allocation_latency_max_us": "10s"}

    # Act
    static = _small(workload=workload)
    dynamic = _small(workload=workload, provisioner={"disabled": False, **latency})

    # Assert
    assert dynamic.task_count == static.task_count == 100
    assert dynamic.cpu_hours < static.cpu_hours


@settings(max_examples=20, deadline=None)
@given(
    nodes=st.integers(1, 4),
    slots=st.integers(1, 2),
    rate=st.sampled_from([10, 20, 50, 100]),
    tasks=st.integers(1_000, 1_500),
    compute_ms=st.integers(0, 40),
    overhead_ms=st.integers(0, 5),
)
def test_contention_free_runs_match_the_model(nodes, slots, rate, tasks, compute_ms, overhead_ms):
    """Without data movement the simulated WET stays within 1% of the closed form."""
    # Arrange
    per_task_us = (compute_ms + overhead_ms) * 1_000
    assume(per_task_us * rate < nodes * slots * 1_000_000)
    config = load_run_config(
        overrides={
            "seed": 1,
            "workload": {
                "files_per_task": 0,
                "task_count": tasks,
                "compute_time_us": f"{compute_ms}ms",
                "dispatch_overhead_us": f"{overhead_ms}ms",
                "initial_rate_per_s": rate,
                "max_rate_per_s": rate,
            },
            "scheduler": {"policy": "max-compute-util", "notify_rate_per_s": 0},
            "node": {"slots": slots},
            "provisioner": {"disabled": True, "max_nodes": nodes},
        }
    )

    # Act
    report = run_single(config).report

    # Assert
    assert report.task_count == tasks
    assert report.model_error_pct <= 1.0

"""
Experiment drivers behind the CLI subcommands.

Provides:
- ``run_single``: simulate one configuration and derive its report
- ``write_run``: write every report file of a run
- ``run_sweep``: Cartesian parameter sweeps, optionally in parallel worker
  processes, with a comparison table normalized across cells
- ``run_model``: the closed-form prediction for a configuration
- ``bench_scheduler``: dispatcher decision throughput per policy
"""

import itertools
import re
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from copy import deepcopy
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, NamedTuple, Optional, Sequence

from app.core.config import RunConfig, load_run_config
from app.core.exceptions import ConfigError
from app.core.logging import get_logger
from app.core.metrics import MetricsLedger, build_report, normalize_performance_indices, slowdown_series
from app.core.model import estimate_miss_rate, predict
from app.core.provisioner import ProvisioningSample
from app.core.reports import (
    write_comparison,
    write_config,
    write_decisions,
    write_model,
    write_provisioning,
    write_series,
    write_slowdown,
    write_summary,
    write_tasks,
)
from app.core.scheduler import Decision, Scheduler
from app.core.simengine import Simulation
from app.core.units import US_PER_S
from app.core.workload import generate_workload, ideal_execution_time, working_set_bits
from app.models.config import DispatchPolicy
from app.models.metrics import IntervalSlowdown, ModelReport, RunReport
from app.models.task import TaskSpec, WorkloadSummary
from app.models.workload import ArrivalSchedule

logger = get_logger(__name__)


@dataclass
class RunResult:
    config: RunConfig
    report: RunReport
    model: ModelReport
    ledger: MetricsLedger
    slowdown: list[IntervalSlowdown]
    decisions: list[Decision] = field(default_factory=list)
    provisioning: list[ProvisioningSample] = field(default_factory=list)


class SweepCell(NamedTuple):
    label: str
    config: RunConfig


class BenchResult(NamedTuple):
    policy: str
    tasks: int
    executors: int
    decisions_per_s: float
    notify_us_per_decision: float
    pickup_us_per_decision: float
    inspected_per_decision: float
    empty_pickups: int


# Model


def summarize_workload(config: RunConfig, schedule: ArrivalSchedule, tasks: Sequence[TaskSpec]) -> WorkloadSummary:
    """Constant-rate view of a workload on the largest pool the config allows."""
    count = len(tasks)
    compute = sum(task.compute_time_us for task in tasks) / count / config.node.compute_speed
    overhead = sum(task.dispatch_overhead_us for task in tasks) / count
    span_s = max(schedule.total_span_us, 1) / US_PER_S
    return WorkloadSummary(
        task_count=count,
        avg_exec_time_us=compute,
        avg_exec_with_overhead_us=compute + overhead,
        arrival_rate_per_s=count / span_s,
        executor_count=config.provisioner.max_nodes * config.node.slots,
        working_set_bits=working_set_bits(tasks, config.workload.file_size_bits),
    )


def run_model(
    config: RunConfig,
    schedule: Optional[ArrivalSchedule] = None,
    tasks: Optional[Sequence[TaskSpec]] = None,
) -> ModelReport:
    """Closed-form prediction for a configuration's workload."""
    if schedule is None or tasks is None:
        schedule, tasks = generate_workload(config.workload, config.seed)
    summary = summarize_workload(config, schedule, tasks)
    accesses = sum(len(task.required_objects) for task in tasks)
    distinct = len({obj for task in tasks for obj in task.required_objects})
    aggregate_cache = config.node.cache_bits * config.provisioner.max_nodes
    miss_rate = estimate_miss_rate(
        caching=config.scheduler.policy.caches,
        aggregate_cache_bits=aggregate_cache,
        working_set_bits=summary.working_set_bits,
        distinct_objects=distinct,
        accesses=accesses,
    )
    return predict(
        summary,
        overhead_us=summary.avg_exec_with_overhead_us - summary.avg_exec_time_us,
        object_size_bits=config.workload.file_size_bits,
        objects_per_task=round(accesses / len(tasks)),
        miss_rate=miss_rate,
        store_bandwidth_bps=config.store.bandwidth_bps,
        node_bandwidth_bps=config.node.bandwidth_bps,
        slots_per_node=config.node.slots,
        aggregate_cache_bits=aggregate_cache,
        latency_us=config.store.transfer_latency_us,
        expected_efficiency=config.metrics.expected_efficiency,
    )


# Single runs


def run_single(config: RunConfig) -> RunResult:
    """
    Simulate one configuration.

    Raises:
        StalledError: The run did not finish within the time guard
        SimulationError: Any other simulation failure
    """
    sim = Simulation(config)
    ledger = sim.run()
    model = run_model(config, sim.schedule, sim.tasks)
    report = build_report(
        ledger,
        policy=config.scheduler.policy.value,
        cache_bits=config.node.cache_bits,
        ideal_wet_us=ideal_execution_time(sim.schedule),
        peak_percentile=config.metrics.peak_percentile,
        baseline_wet_us=config.metrics.baseline_wet_us,
        model_wet_us=model.execution_time_with_overhead_us,
    )
    return RunResult(
        config=config,
        report=report,
        model=model,
        ledger=ledger,
        slowdown=slowdown_series(ledger.tasks, sim.schedule),
        decisions=sim.scheduler.decisions,
        provisioning=sim.provisioner.samples,
    )


def write_run(result: RunResult, out_dir: Path) -> list[Path]:
    """Write a run's report files into ``out_dir``."""
    out_dir = Path(out_dir)
    config = result.config
    paths = [
        write_series(out_dir / "series.csv", result.ledger.series),
        write_summary(out_dir / "summary.csv", result.report),
        write_slowdown(out_dir / "slowdown.csv", result.slowdown),
        write_model(out_dir / "model.txt", result.model, result.report),
        write_config(out_dir / "config.txt", config),
    ]
    if config.metrics.write_tasks:
        paths.append(write_tasks(out_dir / "tasks.csv", result.ledger.tasks))
    if config.scheduler.trace:
        paths.append(write_decisions(out_dir / "decisions.tsv", result.decisions))
    if config.provisioner.trace:
        paths.append(write_provisioning(out_dir / "provisioning.csv", result.provisioning))
    logger.info(f"Wrote {len(paths)} report files to {out_dir}")
    return paths


# Sweeps


def parse_axis(text: str) -> tuple[str, list[str]]:
    """``node.cache_bits=1GB,2GB`` -> ``("node.cache_bits", ["1GB", "2GB"])``."""
    key, sep, values = text.partition("=")
    key = key.strip()
    if not sep or not key:
        raise ConfigError(f"sweep axis must look like 'key=v1,v2', got {text!r}")
    items = [value.strip() for value in values.split(",") if value.strip()]
    if not items:
        raise ConfigError(f"sweep axis {key!r} has no values")
    return key, items


def _set_dotted(data: dict[str, Any], dotted: str, value: Any) -> None:
    *sections, key = dotted.split(".")
    node = data
    for section in sections:
        node = node.setdefault(section, {})
        if not isinstance(node, dict):
            raise ConfigError(f"{dotted!r} crosses a non-section key")
    node[key] = value


def _slug(label: str) -> str:
    return re.sub(r"[^A-Za-z0-9._=-]+", "_", label.replace(",", "__"))


def expand_sweep(
    axes: dict[str, list[str]],
    out_dir: Path,
    path: Optional[Path] = None,
    preset: Optional[str] = None,
    overrides: Optional[dict[str, Any]] = None,
) -> list[SweepCell]:
    """
    One resolved config per combination of axis values.

    The ``preset`` axis selects a preset per cell; every other axis is a
    dotted config key. Each cell writes under its own subdirectory.
    """
    if not axes:
        raise ConfigError("a sweep needs at least one axis")
    for key, values in axes.items():
        if not values:
            raise ConfigError(f"sweep axis {key!r} has no values")

    keys = list(axes)
    cells = []
    for combination in itertools.product(*(axes[key] for key in keys)):
        label = ",".join(f"{key}={value}" for key, value in zip(keys, combination))
        cell_overrides = deepcopy(overrides or {})
        cell_preset = preset
        for key, value in zip(keys, combination):
            if key == "preset":
                cell_preset = value
            else:
                _set_dotted(cell_overrides, key, value)
        cell_overrides["output_dir"] = str(Path(out_dir) / _slug(label))
        cells.append(SweepCell(label, load_run_config(path, cell_preset, cell_overrides)))
    return cells


def _run_cell(config: RunConfig) -> RunReport:
    result = run_single(config)
    write_run(result, config.output_dir)
    return result.report


def normalize_sweep(
    reports: Sequence[tuple[str, RunReport]],
    baseline_wet_us: Optional[int] = None,
) -> list[tuple[str, RunReport]]:
    """
    Fill in SP and PI across sweep cells.

    The baseline WET is the configured one, else the WET of a
    first-available cell without caching, if the sweep has one.
    """
    if baseline_wet_us is None:
        for _, report in reports:
            if report.policy == DispatchPolicy.FIRST_AVAILABLE.value and report.cache_bits == 0:
                baseline_wet_us = report.wet_us
                break
    if baseline_wet_us is None or not reports:
        return list(reports)

    speedups = [baseline_wet_us / report.wet_us for _, report in reports]
    indices = normalize_performance_indices(
        [(sp, report.cpu_hours) for sp, (_, report) in zip(speedups, reports)]
    )
    return [
        (label, report.model_copy(update={"speedup": sp, "performance_index": pi}))
        for (label, report), sp, pi in zip(reports, speedups, indices)
    ]


def run_sweep(
    cells: Sequence[SweepCell],
    out_dir: Path,
    jobs: int = 1,
    baseline_wet_us: Optional[int] = None,
) -> list[tuple[str, RunReport]]:
    """
    Run every cell, in order, ``jobs`` at a time.

    The comparison table always holds every cell that finished, in cell
    order: run serially, a failing cell stops the sweep; run in parallel,
    the other cells run to completion first. The first failing cell's error
    is re-raised.
    """
    if not cells:
        raise ConfigError("a sweep needs at least one cell")
    out_dir = Path(out_dir)
    finished: list[tuple[str, RunReport]] = []

    def record(label: str, report: RunReport) -> None:
        finished.append((label, report))
        write_comparison(out_dir / "comparison.csv", normalize_sweep(finished, baseline_wet_us))
        logger.info(f"Sweep cell {label} done ({len(finished)}/{len(cells)})")

    if jobs <= 1:
        for cell in cells:
            record(cell.label, _run_cell(cell.config))
    else:
        reports: dict[int, RunReport] = {}
        errors: dict[int, Exception] = {}
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = {pool.submit(_run_cell, cell.config): index for index, cell in enumerate(cells)}
            for future in as_completed(futures):
                index = futures[future]
                try:
                    reports[index] = future.result()
                except Exception as e:
                    errors[index] = e
                    logger.error(f"Sweep cell {cells[index].label} failed: {e}")
                else:
                    logger.info(f"Sweep cell {cells[index].label} done ({len(reports)}/{len(cells)})")
        finished = [(cells[index].label, reports[index]) for index in sorted(reports)]
        if errors:
            write_comparison(out_dir / "comparison.csv", normalize_sweep(finished, baseline_wet_us))
            raise errors[min(errors)]

    results = normalize_sweep(finished, baseline_wet_us)
    write_comparison(out_dir / "comparison.csv", results)
    return results


# Scheduler micro-benchmark


def bench_scheduler(
    config: RunConfig,
    policies: Sequence[DispatchPolicy] = tuple(DispatchPolicy),
    task_count: Optional[int] = None,
) -> list[BenchResult]:
    """
    Dispatcher-only decision throughput.

    Replays the workload's tasks through a bare scheduler with
    ``max_nodes`` executors: tasks complete the moment they are picked up and
    the objects they read become cached at their executor. Notification and
    pickup time are measured separately.
    """
    schedule, tasks = generate_workload(config.workload, config.seed)
    if task_count is not None:
        tasks = tasks[:task_count]
    executors = [f"node{n:04d}" for n in range(config.provisioner.max_nodes)]

    results = []
    for policy in policies:
        scheduler = Scheduler(config.scheduler.model_copy(update={"policy": policy}))
        for executor_id in executors:
            scheduler.register_executor(executor_id, config.node.slots)
        for task in tasks:
            scheduler.enqueue(task)

        notify_ns = 0
        pickup_ns = 0
        dispatched = 0
        while scheduler.queue_length:
            started = time.perf_counter_ns()
            executor_id = scheduler.notify_candidate()
            notify_ns += time.perf_counter_ns() - started
            if executor_id is None:
                logger.warning(f"{policy.value}: no executor accepts the remaining {scheduler.queue_length} tasks")
                break

            started = time.perf_counter_ns()
            picked = scheduler.select_tasks_for_pickup(executor_id)
            pickup_ns += time.perf_counter_ns() - started

            if policy.caches:
                added = [obj for task in picked for obj in task.required_objects]
                scheduler.on_index_update(executor_id, added=added)
            for _ in picked:
                scheduler.task_finished(executor_id)
            dispatched += len(picked)

        total_ns = notify_ns + pickup_ns
        per = max(dispatched, 1)
        stats = scheduler.stats
        result = BenchResult(
            policy=policy.value,
            tasks=dispatched,
            executors=len(executors),
            decisions_per_s=dispatched / (total_ns / 1e9) if total_ns else 0.0,
            notify_us_per_decision=notify_ns / 1e3 / per,
            pickup_us_per_decision=pickup_ns / 1e3 / per,
            inspected_per_decision=stats.inspected / per,
            empty_pickups=stats.empty_pickups,
        )
        logger.info(f"{policy.value}: {result.decisions_per_s:.0f} decisions/s over {dispatched} tasks")
        results.append(result)
    return results

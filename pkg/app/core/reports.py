"""
Report files written for runs and sweeps.

Provides:
- ``series.csv``, ``tasks.csv``, ``summary.csv``, ``slowdown.csv`` per run
- ``decisions.tsv`` and ``provisioning.csv`` when tracing is enabled
- ``model.txt`` (closed-form prediction vs simulation) and ``config.txt``
- ``comparison.csv`` for sweeps
- ``format_summary``: the human-readable run summary printed by the CLI
"""

import csv
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

from app.core.config import RunConfig, render_config
from app.core.logging import get_logger
from app.core.metrics import SeriesSample, TaskRecord
from app.core.provisioner import ProvisioningSample
from app.core.scheduler import Decision
from app.core.units import US_PER_S
from app.models.metrics import IntervalSlowdown, ModelReport, RunReport

logger = get_logger(__name__)

SERIES_HEADER = [
    "time_us",
    "throughput_local_bps",
    "throughput_remote_bps",
    "throughput_gpfs_bps",
    "ideal_bps",
    "queue_len",
    "nodes",
    "busy",
    "cpu_util",
]
TASKS_HEADER = ["task_id", "arrival_us", "wq_us", "e_us", "d_us"]
SLOWDOWN_HEADER = ["interval", "rate_per_s", "start_us", "task_count", "ideal_us", "actual_us", "slowdown"]
DECISIONS_HEADER = ["time_us", "task_id", "executor_id", "policy", "local_hits", "misses"]
PROVISIONING_HEADER = ["time_us", "registered", "pending", "queue_len"]
COMPARISON_HEADER = [
    "cell",
    "policy",
    "cache_bits",
    "wet_us",
    "speedup",
    "cpu_hours",
    "performance_index",
    "hr_local",
    "hr_remote",
    "hr_store",
    "avg_response_us",
    "efficiency",
]


def _cell(value: Any) -> Any:
    if value is None:
        return ""
    if hasattr(value, "value"):
        return value.value
    return value


def write_rows(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]], delimiter: str = ",") -> Path:
    """Write a header line and rows; None becomes an empty field."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, delimiter=delimiter)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(value) for value in row])
    return path


def read_rows(path: Path, delimiter: str = ",") -> list[dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f, delimiter=delimiter))


def write_series(path: Path, series: Sequence[SeriesSample]) -> Path:
    return write_rows(path, SERIES_HEADER, series)


def write_tasks(path: Path, tasks: Sequence[TaskRecord]) -> Path:
    return write_rows(path, TASKS_HEADER, sorted(tasks, key=lambda record: record.task_id))


def write_summary(path: Path, report: RunReport) -> Path:
    data = report.model_dump()
    return write_rows(path, list(data), [list(data.values())])


def write_slowdown(path: Path, rows: Sequence[IntervalSlowdown]) -> Path:
    return write_rows(path, SLOWDOWN_HEADER, ([getattr(row, name) for name in SLOWDOWN_HEADER] for row in rows))


def write_decisions(path: Path, decisions: Sequence[Decision]) -> Path:
    return write_rows(path, DECISIONS_HEADER, decisions, delimiter="\t")


def write_provisioning(path: Path, samples: Sequence[ProvisioningSample]) -> Path:
    return write_rows(path, PROVISIONING_HEADER, samples)


def write_config(path: Path, config: RunConfig) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_config(config), encoding="utf-8")
    return path


def format_model(model: ModelReport, report: Optional[RunReport] = None) -> str:
    """Closed-form quantities, one ``name = value`` per line."""
    lines = [
        f"task_count = {model.task_count}",
        f"executor_count = {model.executor_count}",
        f"arrival_rate_per_s = {model.arrival_rate_per_s:.6g}",
        f"computational_intensity = {model.computational_intensity:.6g}",
        f"avg_exec_time_us = {model.avg_exec_time_us:.6g}",
        f"overhead_us = {model.overhead_us:.6g}",
        f"miss_rate = {model.miss_rate:.6g}",
        f"contended_copy_us = {model.contended_copy_us:.6g}",
        f"avg_exec_with_overhead_us = {model.avg_exec_with_overhead_us:.6g}",
        f"execution_time_us = {model.execution_time_us:.6g}",
        f"execution_time_with_overhead_us = {model.execution_time_with_overhead_us:.6g}",
        f"efficiency = {model.efficiency:.6g}",
        f"speedup = {model.speedup:.6g}",
        f"working_set_bits = {model.working_set_bits}",
        f"aggregate_cache_bits = {model.aggregate_cache_bits}",
        f"working_set_fits = {str(model.working_set_fits).lower()}",
    ]
    if model.expected_efficiency is not None:
        lines.append(f"expected_efficiency = {model.expected_efficiency:.6g}")
    if report is not None:
        lines.append(f"simulated_wet_us = {report.wet_us}")
        if report.model_error_pct is not None:
            lines.append(f"model_error_pct = {report.model_error_pct:.4g}")
    return "\n".join(lines) + "\n"


def write_model(path: Path, model: ModelReport, report: Optional[RunReport] = None) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_model(model, report), encoding="utf-8")
    return path


def write_comparison(path: Path, cells: Sequence[tuple[str, RunReport]]) -> Path:
    rows = (
        [
            label,
            report.policy,
            report.cache_bits,
            report.wet_us,
            report.speedup,
            report.cpu_hours,
            report.performance_index,
            report.hr_local,
            report.hr_remote,
            report.hr_store,
            report.avg_response_us,
            report.efficiency,
        ]
        for label, report in cells
    )
    return write_rows(path, COMPARISON_HEADER, rows)


def format_summary(report: RunReport) -> str:
    """Multi-line summary of a run for the terminal."""

    def gbps(bps: float) -> str:
        return f"{bps / 1e9:.2f} Gb/s"

    lines = [
        f"policy            {report.policy}",
        f"tasks             {report.task_count}",
        f"WET               {report.wet_us / US_PER_S:.2f} s (ideal {report.ideal_wet_us / US_PER_S:.2f} s)",
        f"efficiency        {report.efficiency:.3f}",
        f"slowdown          {report.slowdown:.3f}",
        f"hit rates         local {report.hr_local:.3f}  remote {report.hr_remote:.3f}  "
        f"store {report.hr_store:.3f}",
        f"throughput        avg {gbps(report.avg_throughput_bps)}  peak {gbps(report.peak_throughput_bps)}",
        f"CPU hours         {report.cpu_hours:.2f} (mean util {report.mean_cpu_util:.3f})",
        f"avg response      {report.avg_response_us / US_PER_S:.3f} s",
        f"nodes (peak)      {report.max_nodes}",
    ]
    if report.speedup is not None:
        lines.append(f"speedup           {report.speedup:.3f}")
    if report.model_error_pct is not None:
        lines.append(f"model error       {report.model_error_pct:.2f} %")
    return "\n".join(lines)

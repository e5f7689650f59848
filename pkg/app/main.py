"""
Data Diffusion Simulator - Command Line Entry Point.

Subcommands:
- run: simulate one configuration and write its reports
- sweep: run a Cartesian grid of configurations and compare them
- model: print the closed-form prediction for a configuration
- bench-scheduler: measure dispatcher decisions per second per policy

Exit codes: 0 ok, 2 configuration error, 3 stalled simulation, 1 any other
simulator error.
"""

import argparse
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

from app.core.config import load_run_config, settings
from app.core.exceptions import ConfigError, SimulationError, StalledError
from app.core.experiments import (
    bench_scheduler,
    expand_sweep,
    parse_axis,
    run_model,
    run_single,
    run_sweep,
    write_run,
)
from app.core.logging import get_logger, set_level
from app.core.reports import format_model, format_summary
from app.models.config import DispatchPolicy

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2
EXIT_STALLED = 3


def _overrides(args: argparse.Namespace) -> dict[str, Any]:
    """Nested config values given on the command line."""
    overrides: dict[str, Any] = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if getattr(args, "out", None) is not None:
        overrides["output_dir"] = str(args.out)
    if getattr(args, "tasks", None) is not None:
        overrides.setdefault("workload", {})["task_count"] = args.tasks
    for item in args.set or []:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"--set expects key=value, got {item!r}")
        *sections, name = key.strip().split(".")
        node = overrides
        for section in sections:
            node = node.setdefault(section, {})
        node[name] = value.strip()
    return overrides


def _add_config_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="flat key = value config file")
    parser.add_argument("--preset", help="bundled preset name")
    parser.add_argument("--seed", type=int, help="random seed (overrides config)")
    parser.add_argument(
        "--set",
        action="append",
        metavar="KEY=VALUE",
        help="override one config key, e.g. --set node.cache_bits=2GB (repeatable)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ddsim", description=f"{settings.APP_NAME} {settings.APP_VERSION}")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate one configuration")
    _add_config_arguments(run)
    run.add_argument("--out", type=Path, help="output directory")
    run.add_argument("--tasks", type=int, help="override workload.task_count")

    sweep = sub.add_parser("sweep", help="run a parameter grid")
    _add_config_arguments(sweep)
    sweep.add_argument("--out", type=Path, help="output directory")
    sweep.add_argument("--tasks", type=int, help="override workload.task_count")
    sweep.add_argument(
        "--axis",
        action="append",
        required=True,
        metavar="KEY=V1,V2",
        help="sweep axis, e.g. --axis node.cache_bits=1GB,2GB or --axis preset=gcc-1gb,baseline-gpfs",
    )
    sweep.add_argument("--jobs", type=int, default=settings.DEFAULT_JOBS, help="parallel worker processes")

    model = sub.add_parser("model", help="closed-form prediction")
    _add_config_arguments(model)
    model.add_argument("--tasks", type=int, help="override workload.task_count")

    bench = sub.add_parser("bench-scheduler", help="dispatcher micro-benchmark")
    _add_config_arguments(bench)
    bench.add_argument("--tasks", type=int, help="override workload.task_count")
    bench.add_argument(
        "--policy",
        action="append",
        choices=[policy.value for policy in DispatchPolicy],
        help="policy to measure (repeatable; default all)",
    )
    return parser


def _cmd_run(args: argparse.Namespace) -> int:
    config = load_run_config(args.config, args.preset, _overrides(args))
    logger.info(f"Resolved config {config.label} (seed {config.seed})")
    result = run_single(config)
    write_run(result, config.output_dir)
    print(format_summary(result.report))
    return EXIT_OK


def _cmd_sweep(args: argparse.Namespace) -> int:
    axes = dict(parse_axis(text) for text in args.axis)
    overrides = _overrides(args)
    out_dir = Path(overrides.pop("output_dir", settings.DEFAULT_OUTPUT_DIR))
    cells = expand_sweep(axes, out_dir, args.config, args.preset, overrides)
    logger.info(f"Sweeping {len(cells)} cells with {args.jobs} workers into {out_dir}")
    results = run_sweep(cells, out_dir, jobs=args.jobs, baseline_wet_us=cells[0].config.metrics.baseline_wet_us)
    for label, report in results:
        sp = f"{report.speedup:.3f}" if report.speedup is not None else "-"
        pi = f"{report.performance_index:.3f}" if report.performance_index is not None else "-"
        print(f"{label:<48} WET {report.wet_us / 1e6:10.1f} s  SP {sp:>7}  PI {pi:>7}  HR_L {report.hr_local:.3f}")
    return EXIT_OK


def _cmd_model(args: argparse.Namespace) -> int:
    config = load_run_config(args.config, args.preset, _overrides(args))
    print(format_model(run_model(config)), end="")
    return EXIT_OK


def _cmd_bench(args: argparse.Namespace) -> int:
    preset = args.preset or (None if args.config else "microbench")
    config = load_run_config(args.config, preset, _overrides(args))
    policies = [DispatchPolicy(name) for name in args.policy] if args.policy else list(DispatchPolicy)
    print(f"{'policy':<24}{'decisions/s':>14}{'notify us':>12}{'pickup us':>12}{'inspected':>12}")
    for result in bench_scheduler(config, policies):
        print(
            f"{result.policy:<24}{result.decisions_per_s:>14.0f}{result.notify_us_per_decision:>12.2f}"
            f"{result.pickup_us_per_decision:>12.2f}{result.inspected_per_decision:>12.1f}"
        )
    return EXIT_OK


COMMANDS = {
    "run": _cmd_run,
    "sweep": _cmd_sweep,
    "model": _cmd_model,
    "bench-scheduler": _cmd_bench,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.log_level:
        set_level(args.log_level)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as e:
        logger.error(f"Configuration error: {e.message}")
        return EXIT_CONFIG
    except StalledError as e:
        logger.error(f"Simulation stalled: {e.message}")
        return EXIT_STALLED
    except SimulationError as e:
        logger.error(f"Simulation failed ({e.code}): {e.message}")
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())

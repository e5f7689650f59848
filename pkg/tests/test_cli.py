"""
Tests for the ddsim command line.
"""

import pytest

from app import main as cli
from app.core.exceptions import NoPathError, StalledError
from app.core.reports import read_rows


def test_run_writes_reports(tmp_path, capsys):
    """A successful run exits 0, prints the summary and writes its files."""
    # Act
    code = cli.main(["run", "--preset", "oracle", "--tasks", "20", "--out", str(tmp_path)])

    # Assert
    assert code == cli.EXIT_OK
    assert "max-compute-util" in capsys.readouterr().out
    assert (tmp_path / "summary.csv").exists()
    assert read_rows(tmp_path / "summary.csv")[0]["task_count"] == "20"


@pytest.mark.parametrize(
    "argv",
    [
        ["run", "--preset", "no-such-preset"],
        ["run", "--preset", "oracle", "--set", "node.slots=zero"],
        ["run", "--preset", "oracle", "--set", "missing-equals"],
        ["model", "--set", "node.slots=2"],
    ],
)
def test_configuration_errors_exit_2(argv):
    """Unknown presets, invalid values, malformed --set and a missing seed exit 2."""
    # Act / Assert
    assert cli.main(argv) == cli.EXIT_CONFIG


def test_stalled_run_exits_3(monkeypatch):
    """A stalled simulation has its own exit code."""
    # Arrange
    def stall(config):
        raise StalledError("no progress")

    monkeypatch.setattr(cli, "run_single", stall)

    # Act / Assert
    assert cli.main(["run", "--preset", "oracle"]) == cli.EXIT_STALLED


def test_other_failures_exit_1(monkeypatch):
    """Any other simulator error exits 1."""
    # Arrange
    def fail(config):
        raise NoPathError("store unreachable")

    monkeypatch.setattr(cli, "run_single", fail)

    # Act / Assert
    assert cli.main(["run", "--preset", "oracle"]) == cli.EXIT_FAILED


def test_model_prints_the_prediction(capsys):
    """The model subcommand prints name = value lines."""
    # Act
    code = cli.main(["model", "--preset", "oracle"])

    # Assert
    out = capsys.readouterr().out
    assert code == cli.EXIT_OK
    assert "execution_time_with_overhead_us = " in out
    assert "executor_count = 8" in out


def test_sweep_writes_the_comparison(tmp_path):
    """Each axis value becomes a cell of comparison.csv."""
    # Act
    code = cli.main(
        ["sweep", "--preset", "oracle", "--tasks", "10", "--out", str(tmp_path), "--axis", "node.slots=1,2"]
    )

    # Assert
    assert code == cli.EXIT_OK
    rows = read_rows(tmp_path / "comparison.csv")
    assert [row["cell"] for row in rows] == ["node.slots=1", "node.slots=2"]


def test_bench_scheduler(capsys):
    """The micro-benchmark prints one row per requested policy."""
    # Act
    code = cli.main(
        [
            "bench-scheduler",
            "--tasks",
            "50",
            "--policy",
            "first-available",
            "--policy",
            "max-compute-util",
            "--set",
            "provisioner.min_nodes=2",
            "--set",
            "provisioner.max_nodes=2",
        ]
    )

    # Assert
    rows = [line.split()[0] for line in capsys.readouterr().out.splitlines() if line and not line[0].isspace()]
    assert code == cli.EXIT_OK
    assert rows == ["policy", "first-available", "max-compute-util"]


def test_subcommand_is_required():
    """argparse rejects a missing subcommand."""
    # Act / Assert
    with pytest.raises(SystemExit):
        cli.main([])

"""
Tests for the arrival schedule, file selection and trace replay.
"""

from collections import Counter

import numpy as np
import pytest
from pydantic import ValidationError

from app.core.exceptions import EmptyWorkloadError, TraceReadError
from app.core.workload import (
    arrival_times,
    assign_files,
    build_schedule,
    generate_workload,
    ideal_execution_time,
    ideal_throughput,
    next_rate,
    read_trace,
    schedule_from_tasks,
    working_set_bits,
)
from app.models.workload import ArrivalSchedule, FileSelection, WorkloadSpec

DEFAULT_RATES = [1, 2, 3, 4, 6, 8, 11, 15, 20, 26, 34, 45, 59, 77, 101, 132, 172, 224, 292, 380, 494, 643, 836, 1000]


@pytest.fixture
def default_schedule() -> ArrivalSchedule:
    return build_schedule(WorkloadSpec())


class TestSchedule:
    def test_default_rate_sequence(self, default_schedule):
        """The default ramp steps 1 -> 1000 tasks/s in 24 intervals."""
        # Act
        rates = default_schedule.rates

        # Assert
        assert rates == DEFAULT_RATES

    def test_default_task_count_and_span(self, default_schedule):
        """Exactly 250K tasks spanning 1414.9 s, the last interval truncated."""
        # Act / Assert
        assert default_schedule.task_count == 250_000
        assert default_schedule.total_span_us == 1_414_900_000
        assert default_schedule.intervals[-1].task_count == 34_900

    def test_rate_recurrence_caps_at_max(self):
        """Rates grow by ceiling of the product and stop at the cap."""
        # Act / Assert
        assert next_rate(45, 1.3, 1000) == 59
        assert next_rate(836, 1.3, 1000) == 1000
        assert next_rate(1000, 1.3, 1000) == 1000

    def test_arrivals_are_evenly_spaced_and_sorted(self, default_schedule):
        """Arrivals never decrease and sit at 1/rate within an interval."""
        # Act
        times = arrival_times(default_schedule)

        # Assert
        assert len(times) == 250_000
        assert np.all(np.diff(times) >= 0)
        assert times[1] - times[0] == 1_000_000

    def test_constant_rate_is_a_single_interval(self):
        """initial == max rate gives one interval holding every task."""
        # Arrange
        spec = WorkloadSpec(task_count=10, initial_rate_per_s=5, max_rate_per_s=5)

        # Act
        schedule = build_schedule(spec)

        # Assert
        assert len(schedule.intervals) == 1
        assert schedule.total_span_us == 2_000_000

    def test_growth_factor_must_exceed_one(self):
        """A flat growth factor is rejected; constant rates use initial == max."""
        # Act / Assert
        with pytest.raises(ValidationError):
            WorkloadSpec(growth_factor=1.0)

    def test_poisson_arrivals_are_seeded(self):
        """Poisson arrivals repeat under the same seed and stay in their interval."""
        # Arrange
        spec = WorkloadSpec(task_count=500, initial_rate_per_s=10, growth_factor=2, max_rate_per_s=40, poisson=True)

        # Act
        first = arrival_times(build_schedule(spec, seed=3))
        second = arrival_times(build_schedule(spec, seed=3))

        # Assert
        assert np.array_equal(first, second)
        assert np.all(np.diff(first) >= 0)


class TestIdeal:
    def test_default_ideal_time(self, default_schedule):
        """The ideal time is the span plus one task's compute time."""
        # Act / Assert
        assert ideal_execution_time(default_schedule) == 1_414_910_000

    def test_single_task(self):
        """One task at 1/s computing 10 ms ideally takes 1.01 s."""
        # Arrange
        schedule = build_schedule(WorkloadSpec(task_count=1, initial_rate_per_s=1, max_rate_per_s=1))

        # Act / Assert
        assert ideal_execution_time(schedule) == 1_010_000

    def test_empty_schedule_is_an_error(self):
        """No tasks, no ideal time."""
        # Arrange
        schedule = ArrivalSchedule(intervals=[], total_span_us=0)

        # Act / Assert
        with pytest.raises(EmptyWorkloadError):
            ideal_execution_time(schedule)

    @pytest.mark.parametrize(("t_s", "expected"), [(720, 4.72e9), (1400, 80e9), (2000, 0.0)])
    def test_ideal_throughput(self, default_schedule, t_s, expected):
        """Ideal throughput is the current rate times the file size."""
        # Act
        result = ideal_throughput(default_schedule, 80_000_000, t_s * 1_000_000)

        # Assert
        assert result == pytest.approx(expected)


class TestFiles:
    def test_default_working_set(self):
        """10K files of 10 MB make a 100 GB working set."""
        # Act / Assert
        assert WorkloadSpec().working_set_bits == 100 * 8 * 10**9

    def test_selection_is_deterministic(self):
        """The same seed draws the same files."""
        # Arrange
        spec = WorkloadSpec(task_count=200, file_count=50, initial_rate_per_s=100, max_rate_per_s=100)

        # Act
        first = generate_workload(spec, seed=5)[1]
        second = generate_workload(spec, seed=5)[1]

        # Assert
        assert first == second

    def test_uniform_selection_is_balanced(self):
        """Each file is drawn close to tasks / files times."""
        # Arrange
        spec = WorkloadSpec(task_count=25_000, file_count=1_000, initial_rate_per_s=1000, max_rate_per_s=1000)
        schedule = build_schedule(spec)

        # Act
        counts = Counter(task.required_objects[0] for task in assign_files(schedule, spec, seed=1))

        # Assert
        assert len(counts) == 1_000
        assert 5 < min(counts.values())
        assert max(counts.values()) < 60

    def test_zipf_favours_low_ranks(self):
        """Under Zipf the first file is the most popular."""
        # Arrange
        spec = WorkloadSpec(
            task_count=2_000,
            file_count=100,
            initial_rate_per_s=1000,
            max_rate_per_s=1000,
            selection=FileSelection.ZIPF,
        )

        # Act
        _, tasks = generate_workload(spec, seed=2)
        counts = Counter(task.required_objects[0] for task in tasks)

        # Assert
        assert counts.most_common(1)[0][0] == "f0"

    def test_several_files_per_task_are_distinct(self):
        """Multi-file tasks never repeat an object."""
        # Arrange
        spec = WorkloadSpec(task_count=50, file_count=5, files_per_task=3, initial_rate_per_s=50, max_rate_per_s=50)

        # Act
        _, tasks = generate_workload(spec, seed=9)

        # Assert
        assert all(len(set(task.required_objects)) == 3 for task in tasks)
        assert working_set_bits(tasks, 8) <= 5 * 8


class TestTrace:
    def test_trace_round_trip(self, tmp_path):
        """Trace lines become tasks in order; '-' means no files."""
        # Arrange
        path = tmp_path / "trace.tsv"
        path.write_text("# arrival\tfiles\tcompute\n0\tf1,f2\t100\n\n5\t-\t0\n")

        # Act
        tasks = read_trace(path, dispatch_overhead_us=7)

        # Assert
        assert [task.required_objects for task in tasks] == [("f1", "f2"), ()]
        assert tasks[1].arrival_time_us == 5
        assert tasks[0].dispatch_overhead_us == 7

    @pytest.mark.parametrize("body", ["0\tf1\n", "x\tf1\t1\n", "5\tf1\t0\n1\tf2\t0\n", "# only a comment\n"])
    def test_malformed_trace_is_rejected(self, tmp_path, body):
        """Wrong field counts, bad numbers, decreasing arrivals and empty traces fail."""
        # Arrange
        path = tmp_path / "trace.tsv"
        path.write_text(body)

        # Act / Assert
        with pytest.raises(TraceReadError):
            read_trace(path)

    def test_missing_trace_is_rejected(self, tmp_path):
        """An unreadable trace file is an error."""
        # Act / Assert
        with pytest.raises(TraceReadError):
            read_trace(tmp_path / "absent.tsv")

    def test_schedule_from_trace_spans_the_last_arrival(self, tmp_path):
        """A replayed trace becomes one interval ending just after its last arrival."""
        # Arrange
        path = tmp_path / "trace.tsv"
        path.write_text("0\tf1\t10\n999\tf2\t20\n")
        tasks = read_trace(path)

        # Act
        schedule = schedule_from_tasks(tasks)

        # Assert
        assert schedule.total_span_us == 1_000
        assert schedule.last_arrival_us == 999
        assert ideal_execution_time(schedule) == 1_020

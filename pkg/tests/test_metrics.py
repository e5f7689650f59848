"""
Tests for the metrics ledger and derived run metrics.
"""

import pytest

from app.core.exceptions import EmptyWorkloadError
from app.core.metrics import (
    MetricsLedger,
    TaskRecord,
    average_response_time,
    build_report,
    hit_rates,
    model_error,
    normalize_performance_indices,
    performance_index,
    slowdown_series,
    speedup_vs_baseline,
)
from app.models.metrics import AccessClass
from app.models.workload import ArrivalInterval, ArrivalSchedule

S = 1_000_000


def _record(task_id: int, arrival: int, wq: int, e: int, d: int = 0) -> TaskRecord:
    return TaskRecord(task_id=task_id, arrival_us=arrival, wq_us=wq, e_us=e, d_us=d)


@pytest.fixture
def two_interval_schedule() -> ArrivalSchedule:
    return ArrivalSchedule(
        intervals=[
            ArrivalInterval(index=0, rate_per_s=1, start_us=0, end_us=2 * S, task_count=2, last_arrival_us=S),
            ArrivalInterval(
                index=1, rate_per_s=2, start_us=2 * S, end_us=3 * S, task_count=2, first_task=2, last_arrival_us=2_500_000
            ),
        ],
        total_span_us=3 * S,
        compute_time_us=100_000,
    )


class TestHitRates:
    @pytest.mark.parametrize(
        ("hits", "expected"),
        [((78, 1, 21), (0.78, 0.01, 0.21)), ((88, 6, 6), (0.88, 0.06, 0.06)), ((0, 0, 5), (0.0, 0.0, 1.0))],
    )
    def test_hit_rates(self, hits, expected):
        """Each access class over all accesses."""
        # Act
        result = hit_rates(*hits)

        # Assert
        assert result == pytest.approx(expected)
        assert sum(result) == pytest.approx(1.0)

    def test_zero_accesses_is_an_error(self):
        """Hit rates are undefined without accesses."""
        # Act / Assert
        with pytest.raises(EmptyWorkloadError):
            hit_rates(0, 0, 0)


@pytest.mark.parametrize(("baseline", "wet", "expected"), [(5011, 1436, 3.49), (5011, 3762, 1.33), (7, 7, 1.0)])
def test_speedup_vs_baseline(baseline, wet, expected):
    """Speedup is the baseline WET over the run's WET."""
    # Act / Assert
    assert speedup_vs_baseline(baseline * S, wet * S) == pytest.approx(expected, abs=0.005)


class TestPerformanceIndex:
    def test_normalized_against_the_best_run(self):
        """Equal speedups with fewer CPU hours score higher."""
        # Act
        result = normalize_performance_indices([(3.5, 17.0), (3.5, 24.0)])

        # Assert
        assert result[0] == 1.0
        assert result[1] == pytest.approx(17 / 24)

    def test_static_pool_joins_the_set(self):
        """A 46 CPU-hour run with the same speedup scores 17/46."""
        # Act
        result = performance_index(3.5, 46.0, [(3.5, 17.0), (3.5, 24.0)])

        # Assert
        assert result == pytest.approx(0.369, abs=0.001)

    def test_singleton_set_is_one(self):
        """A run compared only to itself is the best run."""
        # Act / Assert
        assert performance_index(2.0, 5.0, []) == 1.0

    def test_empty_set_is_an_error(self):
        """Normalization needs at least one run."""
        # Act / Assert
        with pytest.raises(EmptyWorkloadError):
            normalize_performance_indices([])


class TestResponseTime:
    def test_single_task_sum(self):
        """AR_T sums waiting, execution and delivery."""
        # Act
        result = average_response_time([_record(0, 0, S, 2 * S, 100_000)])

        # Assert
        assert result == 3_100_000

    def test_mean_over_tasks(self):
        """The average is taken over completed tasks."""
        # Act / Assert
        assert average_response_time([_record(0, 0, 0, 2), _record(1, 0, 2, 2)]) == 3

    def test_no_tasks_is_an_error(self):
        """No completed task, no response time."""
        # Act / Assert
        with pytest.raises(EmptyWorkloadError):
            average_response_time([])


class TestModelError:
    @pytest.mark.parametrize(("sim", "analytic", "expected"), [(100, 100, 0.0), (105, 100, 5.0), (95, 100, 5.0)])
    def test_relative_error(self, sim, analytic, expected):
        """Absolute relative difference in percent."""
        # Act / Assert
        assert model_error(sim, analytic) == pytest.approx(expected)

    def test_non_positive_analytic_is_rejected(self):
        """The analytic time must be positive."""
        # Act / Assert
        with pytest.raises(ValueError):
            model_error(1, 0)


class TestSlowdown:
    def test_ideal_run_has_unit_slowdown(self, two_interval_schedule):
        """Tasks finishing exactly one compute time after arriving give 1.0."""
        # Arrange
        tasks = [
            _record(0, 0, 0, 100_000),
            _record(1, S, 0, 100_000),
            _record(2, 2 * S, 0, 100_000),
            _record(3, 2_500_000, 0, 100_000),
        ]

        # Act
        rows = slowdown_series(tasks, two_interval_schedule)

        # Assert
        assert [row.slowdown for row in rows] == [1.0, 1.0]

    def test_late_interval_is_slowed(self, two_interval_schedule):
        """An interval finishing twice as late as ideal has slowdown 2."""
        # Arrange
        tasks = [
            _record(0, 0, 0, 100_000),
            _record(1, S, 0, 100_000),
            _record(2, 2 * S, 0, 100_000),
            _record(3, 2_500_000, 600_000, 100_000),
        ]

        # Act
        rows = slowdown_series(tasks, two_interval_schedule)

        # Assert
        assert rows[1].ideal_us == 600_000
        assert rows[1].actual_us == 1_200_000
        assert rows[1].slowdown == pytest.approx(2.0)


class TestLedger:
    def test_record_task_counts_accesses(self):
        """Each access lands in its class; the WET follows the last completion."""
        # Arrange
        ledger = MetricsLedger()

        # Act
        ledger.record_task(_record(0, 0, 5, 10), [(AccessClass.LOCAL, 8), (AccessClass.STORE, 8)])
        ledger.record_task(_record(1, 3, 0, 4), [(AccessClass.REMOTE, 8)])

        # Assert
        assert (ledger.h_local, ledger.h_remote, ledger.h_store) == (1, 1, 1)
        assert ledger.total_bits == 24
        assert ledger.wet_us == 15
        assert ledger.busy_time_us == 14

    def test_cpu_time_counts_open_nodes_to_the_end(self):
        """Node time runs from registration to release, or to the WET."""
        # Arrange
        ledger = MetricsLedger(slots_per_node=2)
        ledger.node_registered("a", 0)
        ledger.node_registered("b", 10)
        ledger.node_released("b", 30)
        ledger.wet_us = 100

        # Act / Assert
        assert ledger.cpu_time_us == (100 + 20) * 2
        assert ledger.max_nodes == 2

    def test_samples_are_per_window(self):
        """Each sample reports the bits delivered since the previous one."""
        # Arrange
        ledger = MetricsLedger()
        ledger.record_task(_record(0, 0, 0, 1), [(AccessClass.STORE, 2_000_000)])

        # Act
        first = ledger.sample(S, ideal_bps=5.0, queue_length=0, nodes=1, busy=0, cpu_util=0.0)
        second = ledger.sample(2 * S, ideal_bps=5.0, queue_length=0, nodes=1, busy=0, cpu_util=0.0)
        repeat = ledger.sample(2 * S, ideal_bps=5.0, queue_length=0, nodes=1, busy=0, cpu_util=0.0)

        # Assert
        assert first.throughput_gpfs_bps == 2_000_000
        assert second.throughput_bps == 0.0
        assert repeat is None


def test_build_report(two_interval_schedule):
    """The report derives hit rates, efficiency, slowdown and speedup from the ledger."""
    # Arrange
    ledger = MetricsLedger()
    ledger.node_registered("a", 0)
    ledger.record_task(_record(0, 0, 0, 2 * S), [(AccessClass.LOCAL, 800), (AccessClass.STORE, 800)])
    ledger.sample(2 * S, ideal_bps=0.0, queue_length=0, nodes=1, busy=0, cpu_util=0.0)

    # Act
    report = build_report(ledger, "max-compute-util", 8_000, ideal_wet_us=S, baseline_wet_us=4 * S, model_wet_us=2 * S)

    # Assert
    assert (report.hr_local, report.hr_store) == (0.5, 0.5)
    assert report.bytes_local == 100
    assert report.efficiency == 0.5
    assert report.slowdown == 2.0
    assert report.speedup == 2.0
    assert report.performance_index == 1.0
    assert report.model_error_pct == 0.0
    assert report.avg_throughput_bps == 800.0
    assert report.mean_cpu_util == 1.0

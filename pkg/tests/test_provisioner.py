"""
Tests for the dynamic resource provisioner.
"""

import pytest

from app.core.provisioner import Provisioner
from app.models.config import AllocationPolicy, ProvisionerConfig


@pytest.fixture
def make_provisioner():
    def _make(slots: int = 1, seed: int = 1, **config):
        config.setdefault("max_nodes", 64)
        return Provisioner(ProvisionerConfig(**config), slots_per_node=slots, seed=seed)

    return _make


class TestEvaluate:
    def test_disabled_never_grows(self, make_provisioner):
        """A static pool never requests nodes."""
        # Arrange
        provisioner = make_provisioner(disabled=True)

        # Act / Assert
        assert provisioner.evaluate(queue_length=1000, registered=2, pending=0, now_us=0) == 0

    @pytest.mark.parametrize(
        ("policy", "expected"),
        [
            (AllocationPolicy.ONE_AT_A_TIME, 1),
            (AllocationPolicy.ALL_AT_ONCE, 62),
            (AllocationPolicy.EXPONENTIAL, 2),
            (AllocationPolicy.DEMAND, 62),
        ],
    )
    def test_growth_policies(self, make_provisioner, policy, expected):
        """Each allocation policy sizes the request its own way, capped at max."""
        # Arrange
        provisioner = make_provisioner(allocation_policy=policy)

        # Act
        count = provisioner.evaluate(queue_length=100, registered=2, pending=0, now_us=0)

        # Assert
        assert count == expected

    def test_demand_covers_the_excess_queue(self, make_provisioner):
        """Demand growth asks for enough slots to drain the excess."""
        # Arrange
        provisioner = make_provisioner(slots=2, allocation_policy=AllocationPolicy.DEMAND)

        # Act
        count = provisioner.evaluate(queue_length=10, registered=1, pending=1, now_us=0, idle_slots=2)

        # Assert
        assert count == 3

    def test_idle_capacity_absorbs_the_queue(self, make_provisioner):
        """No growth while idle and pending slots cover the queue."""
        # Arrange
        provisioner = make_provisioner(slots=2)

        # Act / Assert
        assert provisioner.evaluate(queue_length=6, registered=2, pending=1, now_us=0, idle_slots=4) == 0

    def test_full_pool_never_grows(self, make_provisioner):
        """Registered plus pending nodes never exceed max."""
        # Arrange
        provisioner = make_provisioner(max_nodes=4)

        # Act / Assert
        assert provisioner.evaluate(queue_length=100, registered=3, pending=1, now_us=0) == 0


class TestAllocation:
    def test_latency_is_sampled_in_range_and_seeded(self, make_provisioner):
        """Ready times fall in the configured range and repeat per seed."""
        # Arrange
        first = make_provisioner(seed=4)
        second = make_provisioner(seed=4)

        # Act
        a = [first.request(1, 0).ready_at_us for _ in range(5)]
        b = [second.request(1, 0).ready_at_us for _ in range(5)]

        # Assert
        assert a == b
        assert all(30_000_000 <= ready <= 60_000_000 for ready in a)

    def test_zero_latency_registers_immediately(self, make_provisioner):
        """lo = hi = 0 makes nodes available the same instant."""
        # Arrange
        provisioner = make_provisioner(allocation_latency_min_us=0, allocation_latency_max_us=0)
        provisioner.request(2, 10)

        # Act
        nodes = provisioner.on_allocation_ready(10)

        # Assert
        assert nodes == ["node0000", "node0001"]
        assert provisioner.registered_count == 2
        assert provisioner.pending_count == 0

    def test_requests_resolve_in_ready_order(self, make_provisioner):
        """Two requests in flight register independently as their latency elapses."""
        # Arrange
        provisioner = make_provisioner(allocation_latency_min_us=5, allocation_latency_max_us=5)
        provisioner.request(1, 0)
        provisioner.request(2, 3)

        # Act
        early = provisioner.on_allocation_ready(5)
        late = provisioner.on_allocation_ready(8)

        # Assert
        assert early == ["node0000"]
        assert late == ["node0001", "node0002"]

    def test_static_pool_starts_full(self, make_provisioner):
        """In static mode max_nodes are held from t = 0."""
        # Arrange
        provisioner = make_provisioner(disabled=True, max_nodes=3)

        # Act / Assert
        assert provisioner.initial_nodes(0) == ["node0000", "node0001", "node0002"]


class TestRelease:
    def test_no_timeout_never_releases(self, make_provisioner):
        """Without an idle timeout nodes are kept forever."""
        # Arrange
        provisioner = make_provisioner(min_nodes=2)
        provisioner.initial_nodes(0)

        # Act / Assert
        assert provisioner.release_idle(10**12) == []

    def test_long_idle_node_is_released(self, make_provisioner):
        """A node idle for twice the timeout goes away."""
        # Arrange
        provisioner = make_provisioner(min_nodes=0, idle_release_timeout_us=100)
        provisioner.request(1, 0)
        provisioner.on_allocation_ready(60_000_000)

        # Act
        released = provisioner.release_idle(60_000_200)

        # Assert
        assert released == ["node0000"]
        assert provisioner.registered_count == 0

    def test_release_stops_at_min_nodes(self, make_provisioner):
        """Idle nodes below the floor are kept, longest-idle released first."""
        # Arrange
        provisioner = make_provisioner(min_nodes=1, idle_release_timeout_us=100)
        provisioner.nodes = {"a": 0, "b": 0}
        provisioner.idle_since = {"a": 50, "b": 10}

        # Act
        released = provisioner.release_idle(1_000)

        # Assert
        assert released == ["b"]
        assert list(provisioner.nodes) == ["a"]

    def test_busy_node_is_kept(self, make_provisioner):
        """Marking a node busy resets its idle clock."""
        # Arrange
        provisioner = make_provisioner(min_nodes=0, idle_release_timeout_us=100)
        provisioner.nodes = {"a": 0}
        provisioner.mark_busy("a")

        # Act / Assert
        assert provisioner.release_idle(1_000) == []
        provisioner.mark_idle("a", 1_000)
        assert provisioner.release_idle(1_100) == ["a"]


def test_trace_records_samples(make_provisioner):
    """With tracing on each evaluation is recorded."""
    # Arrange
    provisioner = make_provisioner(trace=True)

    # Act
    provisioner.record(5, queue_length=9)

    # Assert
    assert provisioner.samples[0] == (5, 0, 0, 9)

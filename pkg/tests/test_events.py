"""
Tests for the event queue.
"""

import pytest

from app.core.events import EventKind, EventQueue


def test_events_run_in_time_then_schedule_order():
    """Earlier events first; same-instant events in the order they were scheduled."""
    # Arrange
    queue = EventQueue()
    seen = []
    for kind in EventKind:
        queue.add_handler(kind, lambda event: seen.append((event.time_us, event.payload)))
    queue.schedule(10, EventKind.NOTIFY, "b")
    queue.schedule(5, EventKind.TASK_ARRIVAL, "a")
    queue.schedule(10, EventKind.PICKUP, "c")

    # Act
    while not queue.empty:
        queue.advance()

    # Assert
    assert seen == [(5, "a"), (10, "b"), (10, "c")]
    assert queue.now_us == 10
    assert queue.processed == 3


def test_scheduling_in_the_past_is_an_error():
    """Time never goes backwards."""
    # Arrange
    queue = EventQueue()
    queue.add_handler(EventKind.STATS_SAMPLE, lambda event: None)
    queue.schedule(100, EventKind.STATS_SAMPLE)
    queue.advance()

    # Act / Assert
    with pytest.raises(ValueError):
        queue.schedule(99, EventKind.STATS_SAMPLE)


def test_event_without_handler_is_an_error():
    """Every scheduled kind needs a handler."""
    # Arrange
    queue = EventQueue()
    queue.schedule(0, EventKind.INDEX_UPDATE)

    # Act / Assert
    with pytest.raises(KeyError):
        queue.advance()


def test_peek_does_not_advance_time():
    """Peeking reports the next time without consuming the event."""
    # Arrange
    queue = EventQueue()
    queue.schedule(42, EventKind.TASK_COMPLETE)

    # Act / Assert
    assert queue.peek_time() == 42
    assert queue.now_us == 0
    assert len(queue) == 1

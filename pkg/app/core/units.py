"""
Unit-aware quantities for configuration values.

All sizes are integer bits, all durations integer microseconds and all
bandwidths bits per second. Config values may carry a unit suffix; a suffix
from the wrong dimension is rejected.
"""

import math
import re
from typing import Annotated, Any

from pydantic import BeforeValidator

SIZE_UNITS: dict[str, int] = {
    "b": 1,
    "Kb": 10**3,
    "Mb": 10**6,
    "Gb": 10**9,
    "Tb": 10**12,
    "B": 8,
    "KB": 8 * 10**3,
    "MB": 8 * 10**6,
    "GB": 8 * 10**9,
    "TB": 8 * 10**12,
}

DURATION_UNITS: dict[str, int] = {
    "us": 1,
    "ms": 10**3,
    "s": 10**6,
    "min": 60 * 10**6,
    "h": 3600 * 10**6,
}

RATE_UNITS: dict[str, int] = {
    "bps": 1,
    "Kbps": 10**3,
    "Mbps": 10**6,
    "Gbps": 10**9,
    "Tbps": 10**12,
}

_DIMENSIONS = {
    "size": SIZE_UNITS,
    "duration": DURATION_UNITS,
    "rate": RATE_UNITS,
}

_QUANTITY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([A-Za-z]*)\s*$")

INFINITE_WORDS = {"inf", "infinite", "never", "none"}

US_PER_S = 1_000_000


def _parse(value: Any, dimension: str) -> float:
    if isinstance(value, bool):
        raise ValueError(f"expected a {dimension}, got a boolean")
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise ValueError(f"expected a {dimension}, got {type(value).__name__}")

    match = _QUANTITY.match(value)
    if not match:
        raise ValueError(f"cannot parse {value!r} as a {dimension}")
    number, suffix = float(match.group(1)), match.group(2)
    if not suffix:
        return number

    units = _DIMENSIONS[dimension]
    if suffix in units:
        return number * units[suffix]
    for other, other_units in _DIMENSIONS.items():
        if other != dimension and suffix in other_units:
            raise ValueError(
                f"mismatched units: {suffix!r} is a {other} unit, expected a {dimension}"
            )
    raise ValueError(f"unknown {dimension} unit {suffix!r}")


def parse_size(value: Any) -> int:
    """Parse a size into integer bits."""
    bits = _parse(value, "size")
    if bits < 0:
        raise ValueError("size must be nonnegative")
    return int(round(bits))


def parse_duration(value: Any) -> int:
    """Parse a duration into integer microseconds."""
    us = _parse(value, "duration")
    if us < 0:
        raise ValueError("duration must be nonnegative")
    return int(round(us))


def parse_optional_duration(value: Any) -> int | None:
    """Parse a duration where ``inf``/``never`` means unbounded (None)."""
    if value is None:
        return None
    if isinstance(value, str) and value.strip().lower() in INFINITE_WORDS:
        return None
    if isinstance(value, float) and math.isinf(value):
        return None
    return parse_duration(value)


def parse_rate(value: Any) -> float:
    """Parse a bandwidth into bits per second."""
    bps = _parse(value, "rate")
    if bps < 0:
        raise ValueError("rate must be nonnegative")
    return bps


SizeBits = Annotated[int, BeforeValidator(parse_size)]
DurationUs = Annotated[int, BeforeValidator(parse_duration)]
OptionalDurationUs = Annotated[int | None, BeforeValidator(parse_optional_duration)]
RateBps = Annotated[float, BeforeValidator(parse_rate)]


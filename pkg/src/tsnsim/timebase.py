"""Integer picosecond time values and unit parsing.

All simulation times and durations are plain ``int`` picosecond counts.
"""

from __future__ import annotations

import re
from fractions import Fraction

PS = 1
NS = 1_000
US = 1_000_000
MS = 1_000_000_000
S = 1_000_000_000_000

UNITS = {"ps": PS, "ns": NS, "us": US, "µs": US, "ms": MS, "s": S}

_DURATION_RE = re.compile(r"^\s*([+-]?\d+(?:\.\d+)?)\s*(ps|ns|us|µs|ms|s)?\s*$")


def parse_duration(value: int | str) -> int:
    """Parse ``125ms`` / ``-250ns`` / ``1.5us`` / a bare int of picoseconds.

    Raises ValueError for malformed input or values that are not a whole
    number of picoseconds.
    """
    if isinstance(value, bool):
        raise ValueError(f"not a duration: {value!r}")
    if isinstance(value, int):
        return value
    if not isinstance(value, str):
        raise ValueError(f"not a duration: {value!r}")
    m = _DURATION_RE.match(value)
    if m is None:
        raise ValueError(f"not a duration: {value!r}")
    ps = Fraction(m.group(1)) * UNITS[m.group(2) or "ps"]
    if ps.denominator != 1:
        raise ValueError(f"{value!r} is not a whole number of picoseconds")
    return int(ps)


def format_duration(ps: int) -> str:
    """Shortest exact unit-suffixed form, e.g. 125_000_000_000 -> '125ms'."""
    for name in ("s", "ms", "us", "ns"):
        if ps % UNITS[name] == 0:
            return f"{ps // UNITS[name]}{name}"
    return f"{ps}ps"


def seconds(ps: int) -> float:
    return ps / S

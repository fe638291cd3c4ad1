"""ISO-8601 <-> UTC-nanosecond timestamp conversion.

All timestamps are carried internally as integer nanoseconds since the Unix
epoch (UTC). Parsing keeps full nanosecond precision even though
datetime.fromisoformat only supports microseconds.
"""

from __future__ import annotations

import re
from datetime import datetime, timezone

NS_PER_SEC = 1_000_000_000

_FRACTION_RE = re.compile(r"\.(\d+)")


def parse_iso_ns(text: str) -> int:
    """Parse an ISO-8601 timestamp with timezone into UTC nanoseconds."""
    s = text.strip()
    if s.endswith(("Z", "z")):
        s = s[:-1] + "+00:00"
    m = _FRACTION_RE.search(s)
    frac_ns = 0
    if m:
        digits = m.group(1)[:9]
        frac_ns = int(digits.ljust(9, "0"))
        s = s[: m.start()] + s[m.end():]
    dt = datetime.fromisoformat(s)
    if dt.tzinfo is None:
        raise ValueError(f"timestamp lacks timezone: {text!r}")
    return int(dt.timestamp()) * NS_PER_SEC + frac_ns


def format_iso_ns(ns: int) -> str:
    """Format UTC nanoseconds as ISO-8601 with a +00:00 offset."""
    ns = int(ns)
    secs, frac = divmod(ns, NS_PER_SEC)
    dt = datetime.fromtimestamp(secs, tz=timezone.utc)
    base = dt.strftime("%Y-%m-%dT%H:%M:%S")
    if frac:
        digits = f"{frac:09d}".rstrip("0")
        # pad to a 3/6/9-digit group so the fraction parses back exactly
        width = ((len(digits) + 2) // 3) * 3
        base += "." + digits.ljust(width, "0")
    return base + "+00:00"


def date_of_ns(ns: int):
    """UTC calendar date of a nanosecond timestamp."""
    return datetime.fromtimestamp(int(ns) // NS_PER_SEC, tz=timezone.utc).date()

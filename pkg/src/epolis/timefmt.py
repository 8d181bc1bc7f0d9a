"""Millisecond timestamps and their ISO 8601 rendering.

Timestamps are carried as integer milliseconds since the Unix epoch (UTC)
everywhere inside the engine and the store; the ISO form appears only at
export and API boundaries.
"""

from __future__ import annotations

from datetime import datetime, timezone

from .errors import ParseError

_ISO_FMT = "%Y-%m-%dT%H:%M:%S"


def ms_to_iso(ms: int) -> str:
    """Render epoch milliseconds as e.g. 2024-01-15T10:23:45.123Z."""
    secs, rem = divmod(int(ms), 1000)
    dt = datetime.fromtimestamp(secs, tz=timezone.utc)
    return f"{dt.strftime(_ISO_FMT)}.{rem:03d}Z"


def iso_to_ms(text: str) -> int:
    """Inverse of ms_to_iso; accepts only the exact rendering above."""
    if not text.endswith("Z"):
        raise ParseError(f"timestamp {text!r} is not UTC ISO 8601 with trailing Z")
    body = text[:-1]
    try:
        main, frac = body.split(".")
        dt = datetime.strptime(main, _ISO_FMT).replace(tzinfo=timezone.utc)
        if len(frac) != 3:
            raise ValueError("expected millisecond precision")
        return int(dt.timestamp()) * 1000 + int(frac)
    except ValueError as exc:
        raise ParseError(f"bad timestamp {text!r}: {exc}") from None

"""Clock abstraction: monotone time from the OS or from a virtual timeline.

All platform timestamps are float seconds since platform start, so the
wall clock anchors itself at construction and the virtual clock simply
starts at zero.
"""

from __future__ import annotations

import threading
import time


class Clock:
    def now(self) -> float:
        raise NotImplementedError


class WallClock(Clock):
    """Monotonic OS time, zeroed at construction."""

    def __init__(self) -> None:
        self._t0 = time.monotonic()

    def now(self) -> float:
        return time.monotonic() - self._t0


class VirtualClock(Clock):
    """Manually advanced time for the deterministic simulation mode."""

    def __init__(self, start: float = 0.0) -> None:
        self._now = start
        self._lock = threading.Lock()

    def now(self) -> float:
        with self._lock:
            return self._now

    def advance_to(self, t: float) -> None:
        with self._lock:
            if t < self._now:
                raise ValueError(f"virtual clock cannot go backwards: {t} < {self._now}")
            self._now = t

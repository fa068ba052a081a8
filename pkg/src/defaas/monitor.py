"""CPU utilization monitoring and the busy/idle hysteresis state machine.

The state machine is deliberately conjunctive: a transition fires only when
*every* sample in the trailing window clears the threshold, i.e. the
condition has held continuously for the whole window. Anything in between
the two thresholds preserves the prior state.
"""

from __future__ import annotations

import threading
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Deque, List, Optional, Sequence, Tuple


class State(str, Enum):
    BUSY = "busy"
    IDLE = "idle"


@dataclass(frozen=True)
class UtilizationSample:
    t: float
    u: float


@dataclass(frozen=True)
class HysteresisConfig:
    busy_threshold: float = 0.90
    idle_threshold: float = 0.60
    window: float = 30.0
    sample_interval: float = 1.0

    def __post_init__(self) -> None:
        if not (0 < self.idle_threshold < self.busy_threshold <= 1):
            raise ValueError(f"need 0 < idle_threshold < busy_threshold <= 1, got {self}")
        if self.window <= 0:
            raise ValueError("window must be > 0")
        if self.sample_interval <= 0:
            raise ValueError("sample_interval must be > 0")


@dataclass(frozen=True)
class SchedulerState:
    state: State
    entered_at: float


class OutOfOrderSample(ValueError):
    pass


def decide(
    window_samples: Sequence[UtilizationSample],
    prior: State,
    cfg: HysteresisConfig,
) -> State:
    """Pure transition rule over the samples inside the trailing window."""
    if not window_samples:
        return prior
    if all(s.u >= cfg.busy_threshold for s in window_samples):
        return State.BUSY
    if all(s.u <= cfg.idle_threshold for s in window_samples):
        return State.IDLE
    return prior


class UtilizationMonitor:
    """Retains the trailing window of samples and drives the state machine.

    record() is called by the sampler; evaluate()/window_mean() may be
    called concurrently from the scheduler thread.
    """

    def __init__(
        self,
        cfg: HysteresisConfig,
        initial_state: State = State.IDLE,
        initial_time: float = 0.0,
    ) -> None:
        self.cfg = cfg
        self._lock = threading.Lock()
        self._samples: Deque[UtilizationSample] = deque()
        self._first_t: Optional[float] = None
        self._current = SchedulerState(state=initial_state, entered_at=initial_time)

    def record(self, sample: UtilizationSample) -> None:
        if not (0.0 <= sample.u <= 1.0):
            raise ValueError(f"utilization must be in [0,1], got {sample.u}")
        with self._lock:
            if self._samples and sample.t < self._samples[-1].t:
                raise OutOfOrderSample(f"sample at t={sample.t} after t={self._samples[-1].t}")
            if self._first_t is None:
                self._first_t = sample.t
            self._samples.append(sample)
            self._prune(sample.t)

    def _prune(self, now: float) -> None:
        # keep everything inside the window plus the newest sample before it,
        # which window_mean needs for the step value at the window start
        cutoff = now - self.cfg.window
        while len(self._samples) >= 2 and self._samples[1].t <= cutoff:
            self._samples.popleft()

    def _window(self, now: float) -> List[UtilizationSample]:
        lo = now - self.cfg.window
        return [s for s in self._samples if lo <= s.t <= now]

    @property
    def current(self) -> SchedulerState:
        with self._lock:
            return self._current

    def evaluate(self, now: float) -> SchedulerState:
        """Apply the hysteresis rule at `now`, updating the stored state.

        No transition happens until sampling history spans a full window
        (startup stays in the initial state).
        """
        with self._lock:
            prior = self._current
            window = self._window(now)
            if not window or self._first_t is None or self._first_t > now - self.cfg.window:
                return prior
            new_state = decide(window, prior.state, self.cfg)
            if new_state is not prior.state:
                self._current = SchedulerState(state=new_state, entered_at=now)
            return self._current

    def window_mean(self, now: float, window: Optional[float] = None) -> Optional[float]:
        """Time-weighted mean utilization over [now - window, now].

        Samples are treated as a step function (each sample's value holds
        until the next one); returns None when no samples exist yet.
        """
        w = self.cfg.window if window is None else window
        with self._lock:
            if not self._samples or self._samples[0].t > now:
                return None
            lo = now - w
            pts: List[Tuple[float, float]] = [(s.t, s.u) for s in self._samples if s.t <= now]
            if not pts:
                return None
            total = 0.0
            span = 0.0
            for i, (t, u) in enumerate(pts):
                seg_start = max(t, lo)
                seg_end = min(pts[i + 1][0], now) if i + 1 < len(pts) else now
                if seg_end > seg_start:
                    total += u * (seg_end - seg_start)
                    span += seg_end - seg_start
            if span <= 0.0:
                return pts[-1][1]  # all samples at a single instant
            return total / span


class ScriptedSource:
    """Utilization source replaying a fixed schedule; for tests and for
    forcing scheduler states in experiments."""

    def __init__(self, fn: Callable[[float], float]) -> None:
        self._fn = fn

    def sample(self, now: float) -> float:
        return min(1.0, max(0.0, self._fn(now)))

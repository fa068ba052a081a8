"""Deterministic virtual-time executor under processor sharing.

Model: at any instant the residual capacity for function work is
C * (1 - external_load(t)) cores. That capacity is divided equally among
the n running cpu-bound tasks, each capped at one core, so the per-task
rate is min(1, R/n). Fixed-latency tasks complete after their duration and
consume no capacity. External load is piecewise constant; its breakpoints
and task submits/completions are the only instants where rates change, so
integrating work between events is exact arithmetic, not approximation.

Unlike the Burn backend there is no worker pool: processor sharing is the
multiprogramming model, so every admitted task runs immediately and the
admission limit bounds total in-flight tasks.

Identical inputs produce bit-identical event traces: the engine orders
events by (time, insertion sequence) and nothing reads the wall clock.
"""

from __future__ import annotations

import heapq
from bisect import bisect_right
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from ..clock import VirtualClock
from ..model import CpuBound, Invocation, Work
from . import AdmissionQueueFull, CompletionHook, ExecutorConfig, ExecutorCounters, TaskClass

_EPS = 1e-9  # remaining core-seconds below this count as done


class Event:
    __slots__ = ("time", "seq", "fn", "cancelled")

    def __init__(self, time: float, seq: int, fn: Callable[[], None]) -> None:
        self.time = time
        self.seq = seq
        self.fn = fn
        self.cancelled = False

    def __lt__(self, other: "Event") -> bool:
        return (self.time, self.seq) < (other.time, other.seq)


class SimEngine:
    """Minimal discrete-event engine driving a VirtualClock."""

    def __init__(self, clock: Optional[VirtualClock] = None) -> None:
        self.clock = clock or VirtualClock()
        self._heap: List[Event] = []
        self._seq = 0

    @property
    def now(self) -> float:
        return self.clock.now()

    def schedule(self, t: float, fn: Callable[[], None]) -> Event:
        if t < self.now - _EPS:
            raise ValueError(f"cannot schedule event in the past: {t} < {self.now}")
        self._seq += 1
        ev = Event(max(t, self.now), self._seq, fn)
        heapq.heappush(self._heap, ev)
        return ev

    def run(self, until: Optional[float] = None, max_events: int = 50_000_000) -> None:
        """Process events in time order, stopping before any event past
        `until`; the clock only moves as events execute."""
        processed = 0
        while self._heap:
            ev = self._heap[0]
            if until is not None and ev.time > until:
                break
            heapq.heappop(self._heap)
            if ev.cancelled:
                continue
            self.clock.advance_to(ev.time)
            ev.fn()
            processed += 1
            if processed > max_events:
                raise RuntimeError("simulation event budget exhausted (runaway reschedule loop?)")

    def run_until(self, t: float, max_events: int = 50_000_000) -> None:
        """run(until=t), then advance the clock to exactly t."""
        self.run(until=t, max_events=max_events)
        if t > self.now:
            self.clock.advance_to(t)

    def step(self) -> Optional[float]:
        """Advance to and process exactly the next event; returns its time,
        or None when nothing is scheduled."""
        while self._heap:
            ev = heapq.heappop(self._heap)
            if ev.cancelled:
                continue
            self.clock.advance_to(ev.time)
            ev.fn()
            return ev.time
        return None

    def pending_events(self) -> int:
        return sum(1 for ev in self._heap if not ev.cancelled)


class StepLoad:
    """Piecewise-constant external load: each point's value holds until the
    next point; zero before the first point."""

    def __init__(self, points: Sequence[Tuple[float, float]]) -> None:
        if not points:
            points = [(0.0, 0.0)]
        self._ts = [p[0] for p in points]
        self._vs = [p[1] for p in points]
        if any(b <= a for a, b in zip(self._ts, self._ts[1:])):
            raise ValueError("load breakpoints must be strictly increasing")
        if any(not (0.0 <= v <= 1.0) for v in self._vs):
            raise ValueError("load fractions must be in [0,1]")

    @classmethod
    def constant(cls, fraction: float) -> "StepLoad":
        return cls([(0.0, fraction)])

    def value(self, t: float) -> float:
        i = bisect_right(self._ts, t)
        return self._vs[i - 1] if i else 0.0

    def next_breakpoint_after(self, t: float) -> Optional[float]:
        i = bisect_right(self._ts, t)
        return self._ts[i] if i < len(self._ts) else None


@dataclass
class _Task:
    inv: Invocation
    klass: TaskClass
    work: Work
    remaining: float
    start: float = 0.0


class SimulatedExecutor:
    """Processor-sharing executor on a SimEngine."""

    def __init__(
        self,
        engine: SimEngine,
        config: ExecutorConfig,
        on_complete: CompletionHook,
        external_load: Optional[StepLoad] = None,
    ) -> None:
        self.engine = engine
        self.config = config
        self.on_complete = on_complete
        self.load = external_load or StepLoad.constant(0.0)
        self.counters = ExecutorCounters()
        self._cpu: Dict[str, _Task] = {}
        self._fixed: Dict[str, _Task] = {}
        self._last_t = engine.now
        self._completion_ev: Optional[Event] = None
        self._schedule_breakpoint()

    # -- capacity ------------------------------------------------------------

    def _residual(self, t: float) -> float:
        return self.config.cores * (1.0 - self.load.value(t))

    def _rate(self, t: float) -> float:
        n = len(self._cpu)
        if n == 0:
            return 0.0
        return min(1.0, self._residual(t) / n)

    def utilization(self, now: float) -> float:
        used = self.load.value(now) * self.config.cores + min(len(self._cpu), self._residual(now))
        return min(1.0, used / self.config.cores)

    # -- bookkeeping -----------------------------------------------------------

    def running_count(self) -> int:
        return len(self._cpu) + len(self._fixed)

    def waiting_count(self) -> int:
        return 0  # processor sharing runs every admitted task

    def has_work(self) -> bool:
        return self.running_count() > 0

    def admission_space(self) -> int:
        return max(0, self.config.admission_queue_limit - self.running_count())

    # -- dynamics ----------------------------------------------------------------

    def _integrate_to(self, t: float) -> None:
        if t <= self._last_t:
            return
        # rate is constant over (last_t, t]: breakpoints and task changes
        # are always engine events, which land here before taking effect
        rate = self._rate(self._last_t)
        if rate > 0.0:
            dt = t - self._last_t
            for task in self._cpu.values():
                task.remaining -= rate * dt
        self._last_t = t

    def _reschedule(self) -> None:
        if self._completion_ev is not None:
            self._completion_ev.cancelled = True
            self._completion_ev = None
        if not self._cpu:
            return
        rate = self._rate(self._last_t)
        if rate <= 0.0:
            return  # starved until the next load breakpoint
        shortest = min(task.remaining for task in self._cpu.values())
        eta = self._last_t + max(0.0, shortest) / rate
        self._completion_ev = self.engine.schedule(eta, self._on_completion_event)

    def _schedule_breakpoint(self) -> None:
        nxt = self.load.next_breakpoint_after(self.engine.now)
        if nxt is not None:
            self.engine.schedule(nxt, self._on_breakpoint)

    def _on_breakpoint(self) -> None:
        self._integrate_to(self.engine.now)
        self._reschedule()
        self._schedule_breakpoint()

    def _on_completion_event(self) -> None:
        now = self.engine.now
        self._integrate_to(now)
        done = [t for t in self._cpu.values() if t.remaining <= _EPS]
        for task in done:
            del self._cpu[task.inv.id]
        self._reschedule()
        for task in done:
            self._finish(task, now)

    def _finish(self, task: _Task, end: float) -> None:
        self.counters.completed += 1
        self.on_complete(task.inv, task.start, end)

    def _complete_fixed(self, task: _Task) -> None:
        end = self.engine.now
        self._integrate_to(end)
        self._fixed.pop(task.inv.id, None)
        self._finish(task, end)

    # -- public API -----------------------------------------------------------------

    def submit(self, inv: Invocation, klass: TaskClass, work: Work, force: bool = False) -> None:
        """Start a task under processor sharing.

        `force` (urgent dispatches) bypasses the in-flight limit: latency
        objectives outrank load shedding.
        """
        if not force and self.running_count() >= self.config.admission_queue_limit:
            self.counters.rejected += 1
            raise AdmissionQueueFull(f"in-flight limit {self.config.admission_queue_limit} reached")
        now = self.engine.now
        self._integrate_to(now)
        self.counters.submitted += 1
        task = _Task(
            inv=inv,
            klass=klass,
            work=work,
            remaining=work.core_seconds if isinstance(work, CpuBound) else 0.0,
            start=now,
        )
        if isinstance(work, CpuBound):
            self._cpu[inv.id] = task
            self._reschedule()
        else:
            self._fixed[inv.id] = task
            self.engine.schedule(now + work.seconds, lambda task=task: self._complete_fixed(task))
        return None

"""Real-CPU executor backend plus the duty-cycle artificial load generator.

Tasks run on a worker pool of exactly `cores` threads; cpu-bound work spins
through the burn kernel (thread CPU time, so the OS scheduler provides the
contention model), fixed-latency work sleeps. The admission queue is
class-prioritized: sync client-facing tasks never wait behind delayed ones.
"""

from __future__ import annotations

import threading
import time
from collections import deque
from typing import Callable, Deque, Optional, Tuple

import psutil

from ..clock import Clock
from ..model import CpuBound, FixedLatency, Invocation, Work
from . import AdmissionQueueFull, CompletionHook, ExecutorConfig, ExecutorCounters, TaskClass
from .kernels import burn


class BurnHandle:
    """Completion handle for one submitted task."""

    def __init__(self) -> None:
        self._done = threading.Event()
        self.start: Optional[float] = None
        self.end: Optional[float] = None

    def wait(self, timeout: Optional[float] = None) -> bool:
        return self._done.wait(timeout)


class BurnExecutor:
    def __init__(self, config: ExecutorConfig, clock: Clock, on_complete: CompletionHook) -> None:
        self.config = config
        self.clock = clock
        self.on_complete = on_complete
        self.counters = ExecutorCounters()
        self._cond = threading.Condition()
        self._waiting_sync: Deque[Tuple[Invocation, Work, BurnHandle]] = deque()
        self._waiting_delayed: Deque[Tuple[Invocation, Work, BurnHandle]] = deque()
        self._running = 0
        self._stop = False
        self._cpu_probe = psutil.cpu_percent(interval=None)  # prime the delta-based reading
        self._workers = [
            threading.Thread(target=self._worker, name=f"burn-worker-{i}", daemon=True)
            for i in range(config.cores)
        ]
        for w in self._workers:
            w.start()

    # -- submission ----------------------------------------------------------

    def submit(self, inv: Invocation, klass: TaskClass, work: Work, force: bool = False) -> BurnHandle:
        handle = BurnHandle()
        with self._cond:
            if self._stop:
                raise RuntimeError("executor is shut down")
            if not force and self.waiting_count() >= self.config.admission_queue_limit:
                self.counters.rejected += 1
                raise AdmissionQueueFull(f"admission queue at limit {self.config.admission_queue_limit}")
            self.counters.submitted += 1
            if klass is TaskClass.SYNC_CLIENT_FACING:
                self._waiting_sync.append((inv, work, handle))
            else:
                self._waiting_delayed.append((inv, work, handle))
            self._cond.notify()
        return handle

    # -- worker loop ------------------------------------------------------------

    def _worker(self) -> None:
        while True:
            with self._cond:
                while not self._stop and not (self._waiting_sync or self._waiting_delayed):
                    self._cond.wait()
                if self._stop and not (self._waiting_sync or self._waiting_delayed):
                    return
                if self._waiting_sync:
                    inv, work, handle = self._waiting_sync.popleft()
                else:
                    inv, work, handle = self._waiting_delayed.popleft()
                self._running += 1
            try:
                start = self.clock.now()
                if isinstance(work, CpuBound):
                    burn(work.core_seconds)
                elif isinstance(work, FixedLatency):
                    time.sleep(work.seconds)
                end = self.clock.now()
                handle.start, handle.end = start, end
                self.counters.completed += 1
                try:
                    self.on_complete(inv, start, end)
                finally:
                    handle._done.set()
            finally:
                with self._cond:
                    self._running -= 1
                    self._cond.notify_all()

    # -- introspection -------------------------------------------------------------

    def running_count(self) -> int:
        with self._cond:
            return self._running

    def waiting_count(self) -> int:
        return len(self._waiting_sync) + len(self._waiting_delayed)

    def has_work(self) -> bool:
        with self._cond:
            return self._running > 0 or bool(self._waiting_sync or self._waiting_delayed)

    def admission_space(self) -> int:
        return max(0, self.config.admission_queue_limit - self.waiting_count())

    def utilization(self, now: float) -> float:
        """Whole-system CPU fraction since the previous reading (functions
        plus artificial load plus anything else on the machine)."""
        return min(1.0, psutil.cpu_percent(interval=None) / 100.0)

    # -- lifecycle ---------------------------------------------------------------------

    def shutdown(self, drain: bool = True, timeout: float = 30.0) -> None:
        deadline = time.monotonic() + timeout
        if drain:
            with self._cond:
                while (self._waiting_sync or self._waiting_delayed or self._running) and time.monotonic() < deadline:
                    self._cond.wait(timeout=0.1)
        with self._cond:
            self._stop = True
            self._cond.notify_all()
        for w in self._workers:
            w.join(timeout=max(0.0, deadline - time.monotonic()))


class DutyCycleLoad:
    """Artificial external load: one spinner thread per core alternates
    burn and sleep inside short periods to track a target fraction."""

    def __init__(
        self,
        profile: Callable[[float], float],
        clock: Clock,
        threads: int,
        period: float = 0.1,
    ) -> None:
        self._profile = profile
        self._clock = clock
        self._period = period
        self._stop = threading.Event()
        self._threads = [
            threading.Thread(target=self._spin, name=f"load-spinner-{i}", daemon=True)
            for i in range(threads)
        ]

    def start(self) -> None:
        for t in self._threads:
            t.start()

    def _spin(self) -> None:
        while not self._stop.is_set():
            fraction = min(1.0, max(0.0, self._profile(self._clock.now())))
            if fraction > 0.0:
                burn(fraction * self._period)
            rest = (1.0 - fraction) * self._period
            if rest > 0.0:
                self._stop.wait(rest)

    def stop(self) -> None:
        self._stop.set()
        for t in self._threads:
            t.join(timeout=2.0)

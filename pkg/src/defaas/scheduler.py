"""The call scheduler: pops delayed invocations from the EDF queue and hands
them to the executor, urgent-only while Busy, urgent plus bounded backfill
while Idle.

Urgency is quantified as deadline <= now + tick_interval + estimated
runtime on a dedicated core: the weakest margin under which an urgent call
dispatched at the next tick still meets its objective without contention.
Urgent calls are dispatched regardless of state and regardless of executor
saturation; objectives outrank load shedding.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from enum import Enum
from typing import Callable, List, Optional, Set

from .delayed_queue import DelayedCallQueue
from .executor import AdmissionQueueFull
from .model import FunctionSpec, Invocation
from .monitor import State, UtilizationMonitor


class DispatchReason(str, Enum):
    URGENT = "urgent"
    BACKFILL = "backfill"


@dataclass(frozen=True)
class SchedulerConfig:
    tick_interval: float = 1.0
    urgency_margin: Optional[float] = None  # None: tick_interval + estimated runtime
    idle_backfill_cap: int = 4

    def __post_init__(self) -> None:
        if self.tick_interval <= 0:
            raise ValueError("tick_interval must be > 0")
        if self.idle_backfill_cap < 0:
            raise ValueError("idle_backfill_cap must be >= 0")


@dataclass(frozen=True)
class DispatchDecision:
    invocation_id: str
    reason: DispatchReason
    dispatch_time: float
    deadline: float
    lateness: float  # dispatch_time - deadline; negative when early


def is_urgent(inv: Invocation, now: float, margin: float) -> bool:
    """A queued call is urgent once its deadline falls within the margin;
    overdue calls are always urgent."""
    return inv.deadline <= now + margin


class CallScheduler:
    def __init__(
        self,
        queue: DelayedCallQueue,
        executor,
        monitor: UtilizationMonitor,
        registry: Callable[[str], FunctionSpec],
        cfg: SchedulerConfig,
        submit: Callable[[Invocation, bool], None],  # (invocation, force)
        decision_sink: Optional[Callable[[DispatchDecision], None]] = None,
    ) -> None:
        self.queue = queue
        self.executor = executor
        self.monitor = monitor
        self.registry = registry
        self.cfg = cfg
        self._submit = submit
        self._decision_sink = decision_sink
        self._backfill_in_flight: Set[str] = set()
        self._lock = threading.Lock()
        self.dispatched_urgent = 0
        self.dispatched_backfill = 0

    # -- margins --------------------------------------------------------------

    def margin_for(self, inv: Invocation) -> float:
        if self.cfg.urgency_margin is not None:
            return self.cfg.urgency_margin
        return self.cfg.tick_interval + self.registry(inv.function).estimated_runtime()

    def _peek_margin(self, invs_max_runtime: float) -> float:
        if self.cfg.urgency_margin is not None:
            return self.cfg.urgency_margin
        return self.cfg.tick_interval + invs_max_runtime

    # -- one scheduling round ----------------------------------------------------

    def tick(self, now: float) -> List[DispatchDecision]:
        state = self.monitor.evaluate(now).state

        # per-function margins are not monotone in deadline order, so peek
        # wide (largest margin) and filter per invocation
        snapshot = self.queue.snapshot()
        if not snapshot:
            return []
        widest = max(self.registry(i.function).estimated_runtime() for i in snapshot)
        urgent = [
            inv
            for inv in self.queue.peek_urgent(now, self._peek_margin(widest))
            if is_urgent(inv, now, self.margin_for(inv))
        ]
        batch = [(inv, DispatchReason.URGENT) for inv in urgent]

        if state is State.IDLE:
            taken = {inv.id for inv in urgent}
            with self._lock:
                budget = self.cfg.idle_backfill_cap - len(self._backfill_in_flight)
            budget = min(budget, self.executor.admission_space())
            for inv in snapshot:
                if budget <= 0:
                    break
                if inv.id in taken:
                    continue
                batch.append((inv, DispatchReason.BACKFILL))
                budget -= 1

        # EDF order across the whole round, urgent and backfill together
        batch.sort(key=lambda pair: (pair[0].deadline, pair[0].arrival_time, pair[0].id))

        decisions: List[DispatchDecision] = []
        for inv, reason in batch:
            self.queue.remove(inv.id, now)
            if reason is DispatchReason.BACKFILL:
                with self._lock:
                    self._backfill_in_flight.add(inv.id)
                self.dispatched_backfill += 1
            else:
                self.dispatched_urgent += 1
            try:
                self._submit(inv, reason is DispatchReason.URGENT)
            except AdmissionQueueFull:
                # only reachable for backfill racing another submitter;
                # never drop a durably-dispatched call
                self._submit(inv, True)
            decision = DispatchDecision(
                invocation_id=inv.id,
                reason=reason,
                dispatch_time=now,
                deadline=inv.deadline,
                lateness=now - inv.deadline,
            )
            decisions.append(decision)
            if self._decision_sink is not None:
                self._decision_sink(decision)
        return decisions

    def notify_complete(self, invocation_id: str) -> None:
        with self._lock:
            self._backfill_in_flight.discard(invocation_id)

    def backfill_in_flight(self) -> int:
        with self._lock:
            return len(self._backfill_in_flight)

    # -- threaded loop (Burn mode) --------------------------------------------

    def run_loop(self, clock, stop: threading.Event) -> None:
        """Tick every tick_interval until stopped; the in-between sleep is
        interruptible so shutdown is prompt."""
        while not stop.is_set():
            t0 = clock.now()
            self.tick(t0)
            elapsed = clock.now() - t0
            stop.wait(max(0.0, self.cfg.tick_interval - elapsed))

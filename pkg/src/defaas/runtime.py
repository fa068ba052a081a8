"""Platform assembly: registry, invocation factory, trigger fan-out, policy.

Two execution policies share this wiring. Under `deferred`, accepted async
calls go to the durable EDF queue and wait for the scheduler; under
`baseline`, they are submitted to the executor immediately. Synchronous
calls always execute immediately.

Completion flow: the executor reports (invocation, start, end); the runtime
creates the triggered child invocations (async children reach the delayed
queue *before* the parent's outcome record is emitted), then emits one
outcome record per invocation to the metrics sink.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, List, Optional

from .clock import Clock
from .delayed_queue import DelayedCallQueue
from .model import (
    FunctionSpec,
    Invocation,
    Mode,
    compute_deadline,
    validate_registration,
)
from .monitor import UtilizationMonitor
from .executor import TaskClass
from .scheduler import CallScheduler, DispatchDecision, SchedulerConfig


class Policy(str, Enum):
    BASELINE = "baseline"
    DEFERRED = "deferred"


class UnknownFunction(KeyError):
    pass


@dataclass(frozen=True)
class InvocationOutcome:
    """Everything the metrics layer needs about one finished invocation."""

    workflow_id: str
    invocation_id: str
    function: str
    mode: Mode
    arrival: float
    deadline: Optional[float]
    dispatch: float
    start: float
    end: float


MetricsSink = Callable[[InvocationOutcome], None]
DecisionSink = Callable[[DispatchDecision], None]


class PlatformRuntime:
    def __init__(
        self,
        clock: Clock,
        queue: DelayedCallQueue,
        monitor: UtilizationMonitor,
        executor,
        scheduler_cfg: SchedulerConfig,
        policy: Policy = Policy.DEFERRED,
        metrics_sink: Optional[MetricsSink] = None,
        decision_sink: Optional[DecisionSink] = None,
    ) -> None:
        self.clock = clock
        self.queue = queue
        self.monitor = monitor
        self.executor = executor
        self.policy = policy
        self.metrics_sink = metrics_sink
        self._registry: Dict[str, FunctionSpec] = {}
        self._registry_lock = threading.Lock()
        self._id_lock = threading.Lock()
        self._inv_seq = 0
        self._wf_seq = 0
        self._dispatch_times: Dict[str, float] = {}
        self.scheduler = CallScheduler(
            queue=queue,
            executor=executor,
            monitor=monitor,
            registry=self.spec,
            cfg=scheduler_cfg,
            submit=self._submit_delayed,
            decision_sink=decision_sink,
        )

    # -- registry ---------------------------------------------------------------

    def register(self, spec: FunctionSpec) -> None:
        with self._registry_lock:
            validate_registration(spec, self._registry)
            self._registry[spec.name] = spec

    def spec(self, name: str) -> FunctionSpec:
        try:
            return self._registry[name]
        except KeyError:
            raise UnknownFunction(name) from None

    def functions(self) -> List[str]:
        with self._registry_lock:
            return list(self._registry)

    # -- id generation -------------------------------------------------------------

    def _next_invocation_id(self) -> str:
        with self._id_lock:
            self._inv_seq += 1
            return f"i{self._inv_seq:06d}"

    def next_workflow_id(self) -> str:
        with self._id_lock:
            self._wf_seq += 1
            return f"w{self._wf_seq:06d}"

    # -- invocation entry points ------------------------------------------------------

    def make_invocation(
        self,
        function: str,
        mode: Mode,
        arrival: float,
        workflow_id: Optional[str] = None,
        parent_id: Optional[str] = None,
        payload: bytes = b"",
    ) -> Invocation:
        spec = self.spec(function)
        return Invocation(
            id=self._next_invocation_id(),
            function=function,
            mode=mode,
            arrival_time=arrival,
            deadline=compute_deadline(arrival, spec) if mode is Mode.ASYNC else None,
            workflow_id=workflow_id or self.next_workflow_id(),
            parent_id=parent_id,
            payload=payload,
        )

    def invoke_sync(self, inv: Invocation):
        """Execute immediately; returns the executor handle (Burn mode) or
        None (simulated mode completes through engine events)."""
        self._dispatch_times[inv.id] = inv.arrival_time
        return self.executor.submit(inv, TaskClass.SYNC_CLIENT_FACING, self.spec(inv.function).work)

    def invoke_async(self, inv: Invocation) -> None:
        """Accept an async call: durably enqueue (deferred) or execute
        immediately (baseline). Returns only after the call is safe."""
        if self.policy is Policy.DEFERRED:
            self.queue.enqueue(inv)
        else:
            self._dispatch_times[inv.id] = inv.arrival_time
            self.executor.submit(inv, TaskClass.DELAYED, self.spec(inv.function).work, force=True)

    def accept(self, function: str, mode: Mode, payload: bytes = b"") -> Invocation:
        """Gateway entry: build and route an externally arriving invocation."""
        inv = self.make_invocation(function, mode, self.clock.now(), payload=payload)
        if mode is Mode.SYNC:
            handle = self.invoke_sync(inv)
            return inv, handle
        self.invoke_async(inv)
        return inv, None

    # -- scheduler glue ----------------------------------------------------------------

    def _submit_delayed(self, inv: Invocation, force: bool) -> None:
        self._dispatch_times[inv.id] = self.clock.now()
        self.executor.submit(inv, TaskClass.DELAYED, self.spec(inv.function).work, force=force)

    # -- completion flow ------------------------------------------------------------------

    def on_complete(self, inv: Invocation, start: float, end: float) -> None:
        spec = self.spec(inv.function)
        for target, mode in spec.triggers_on_completion:
            child = self.make_invocation(
                function=target,
                mode=mode,
                arrival=end,
                workflow_id=inv.workflow_id,
                parent_id=inv.id,
                payload=inv.payload,
            )
            if mode is Mode.ASYNC:
                self.invoke_async(child)
            else:
                self._dispatch_times[child.id] = child.arrival_time
                self.executor.submit(child, TaskClass.SYNC_CLIENT_FACING, self.spec(target).work)
        self.scheduler.notify_complete(inv.id)
        if self.metrics_sink is not None:
            self.metrics_sink(
                InvocationOutcome(
                    workflow_id=inv.workflow_id,
                    invocation_id=inv.id,
                    function=inv.function,
                    mode=inv.mode,
                    arrival=inv.arrival_time,
                    deadline=inv.deadline,
                    dispatch=self._dispatch_times.pop(inv.id, inv.arrival_time),
                    start=start,
                    end=end,
                )
            )
        else:
            self._dispatch_times.pop(inv.id, None)

"""Bounded-capacity call executor with two interchangeable backends.

SimulatedExecutor (sim.py) runs on a virtual clock under an exact
processor-sharing contention model; BurnExecutor (burn.py) really spins
CPUs on a worker pool. Both report completions through a single callback
so the platform can fire triggers and collect metrics identically.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable

from ..model import Invocation

CompletionHook = Callable[[Invocation, float, float], None]  # (invocation, start, end)


class TaskClass(str, Enum):
    SYNC_CLIENT_FACING = "sync"
    DELAYED = "delayed"


class ExecMode(str, Enum):
    SIMULATED = "simulated"
    BURN = "burn"


class AdmissionQueueFull(RuntimeError):
    """Backpressure: the executor's waiting room is full."""


@dataclass(frozen=True)
class ExecutorConfig:
    cores: int = 8
    mode: ExecMode = ExecMode.SIMULATED
    admission_queue_limit: int = 1024

    def __post_init__(self) -> None:
        if self.cores < 1:
            raise ValueError("cores must be >= 1")
        if self.admission_queue_limit < 0:
            raise ValueError("admission_queue_limit must be >= 0")


@dataclass(frozen=True)
class CompletionRecord:
    invocation_id: str
    start_time: float
    end_time: float
    triggered: tuple

    @property
    def execution_duration(self) -> float:
        return self.end_time - self.start_time


@dataclass
class ExecutorCounters:
    submitted: int = 0
    completed: int = 0
    rejected: int = 0

    def snapshot(self) -> dict:
        return {"submitted": self.submitted, "completed": self.completed, "rejected": self.rejected}

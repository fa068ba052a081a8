"""Shared domain model: function specs, invocations and deadline arithmetic.

Everything here is an immutable value object; instances are safe to share
across the gateway, scheduler and executor threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Optional, Tuple, Union


class Mode(str, Enum):
    SYNC = "sync"
    ASYNC = "async"


@dataclass(frozen=True)
class CpuBound:
    """Work measured in seconds of single-core CPU time."""

    core_seconds: float


@dataclass(frozen=True)
class FixedLatency:
    """Work that takes a fixed duration and no meaningful CPU."""

    seconds: float


Work = Union[CpuBound, FixedLatency]


@dataclass(frozen=True)
class FunctionSpec:
    """A deployed function: its work model, its maximum additional delay,
    and the calls fired when it completes."""

    name: str
    max_delay: float
    work: Work
    triggers_on_completion: Tuple[Tuple[str, Mode], ...] = ()

    def estimated_runtime(self) -> float:
        """Execution time on one dedicated core; feeds the urgency margin."""
        if isinstance(self.work, CpuBound):
            return self.work.core_seconds
        return self.work.seconds


@dataclass(frozen=True)
class Invocation:
    id: str
    function: str
    mode: Mode
    arrival_time: float
    deadline: Optional[float]
    workflow_id: str
    parent_id: Optional[str] = None
    payload: bytes = b""


def compute_deadline(arrival: float, spec: FunctionSpec) -> float:
    """An async call may be delayed at most spec.max_delay past its arrival."""
    return arrival + spec.max_delay


class RegistrationError(ValueError):
    pass


class DuplicateName(RegistrationError):
    pass


class TriggerCycle(RegistrationError):
    pass


class UnknownTriggerTarget(RegistrationError):
    pass


class InvalidWork(RegistrationError):
    pass


def validate_registration(spec: FunctionSpec, registry: Mapping[str, FunctionSpec]) -> None:
    """Admission check for a new function spec against the current registry.

    Raises DuplicateName, InvalidWork, UnknownTriggerTarget or TriggerCycle.
    Trigger targets may reference the function being registered (which is a
    1-cycle and therefore rejected) or any already-registered function.
    """
    if spec.name in registry:
        raise DuplicateName(f"function {spec.name!r} already registered")
    if spec.max_delay < 0:
        raise InvalidWork(f"max_delay must be >= 0, got {spec.max_delay}")
    if isinstance(spec.work, CpuBound):
        if not spec.work.core_seconds > 0:
            raise InvalidWork(f"cpu_bound work needs core_seconds > 0, got {spec.work.core_seconds}")
    elif isinstance(spec.work, FixedLatency):
        if spec.work.seconds < 0:
            raise InvalidWork(f"fixed_latency duration must be >= 0, got {spec.work.seconds}")
    else:
        raise InvalidWork(f"unknown work model {spec.work!r}")

    known = set(registry) | {spec.name}
    for target, _mode in spec.triggers_on_completion:
        if target not in known:
            raise UnknownTriggerTarget(f"{spec.name!r} triggers unregistered function {target!r}")

    # the existing registry is acyclic, so any new cycle must pass through
    # spec.name: walk forward from it and see whether we come back
    edges = {name: [t for t, _ in s.triggers_on_completion] for name, s in registry.items()}
    edges[spec.name] = [t for t, _ in spec.triggers_on_completion]
    stack = list(edges[spec.name])
    seen = set()
    while stack:
        node = stack.pop()
        if node == spec.name:
            raise TriggerCycle(f"registering {spec.name!r} would create a trigger cycle")
        if node in seen:
            continue
        seen.add(node)
        stack.extend(edges.get(node, ()))

"""defaas: deadline-aware deferred execution for FaaS-style async calls.

Async invocations are accepted with a latency objective, durably queued in
an earliest-deadline-first queue, and dispatched by a busy/idle scheduler
driven by CPU-utilization hysteresis. Includes a deterministic virtual-time
platform for experiments and a real CPU-burn backend.
"""

__version__ = "0.1.0"

from .model import (  # noqa: F401
    CpuBound,
    FixedLatency,
    FunctionSpec,
    Invocation,
    Mode,
    compute_deadline,
    validate_registration,
)

"""HTTP front door.

Routes (durations in JSON and headers are integer milliseconds):

    PUT  /functions        register a function spec -> 201
    POST /fn/{name}        invoke; async selected by X-Invoke-Mode header
                           or ?mode=async (header wins)
    GET  /queue            pending/earliest/overdue snapshot
    GET  /state            busy-idle state and when it was entered
    GET  /metrics          rolling utilization and executor counters

Async accepts return 204 with X-Invocation-Id and X-Deadline headers after
the durable enqueue; no function code runs on the accept path.
"""

from __future__ import annotations

from typing import List, Literal, Optional

from fastapi import Body, FastAPI, Query, Request, Response
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .delayed_queue import StorageFailure
from .executor import AdmissionQueueFull
from .model import CpuBound, FixedLatency, FunctionSpec, Mode, RegistrationError, DuplicateName
from .runtime import PlatformRuntime, UnknownFunction


def _ms(seconds: Optional[float]) -> Optional[int]:
    return None if seconds is None else int(round(seconds * 1000))


class WorkIn(BaseModel):
    kind: Literal["cpu_bound", "fixed_latency"]
    cpu_ms: Optional[int] = Field(default=None, description="single-core CPU time for cpu_bound work")
    duration_ms: Optional[int] = Field(default=None, description="duration for fixed_latency work")


class TriggerIn(BaseModel):
    function: str
    mode: Literal["sync", "async"] = "async"


class FunctionIn(BaseModel):
    name: str
    max_delay_ms: int = 0
    work: WorkIn
    triggers: List[TriggerIn] = []


def _spec_from_request(body: FunctionIn) -> FunctionSpec:
    if body.work.kind == "cpu_bound":
        if body.work.cpu_ms is None:
            raise ValueError("cpu_bound work requires cpu_ms")
        work = CpuBound(core_seconds=body.work.cpu_ms / 1000.0)
    else:
        if body.work.duration_ms is None:
            raise ValueError("fixed_latency work requires duration_ms")
        work = FixedLatency(seconds=body.work.duration_ms / 1000.0)
    return FunctionSpec(
        name=body.name,
        max_delay=body.max_delay_ms / 1000.0,
        work=work,
        triggers_on_completion=tuple((t.function, Mode(t.mode)) for t in body.triggers),
    )


def create_app(runtime: PlatformRuntime) -> FastAPI:
    app = FastAPI(title="defaas", docs_url=None, redoc_url=None)

    @app.put("/functions", status_code=201)
    def register_function(body: FunctionIn):
        try:
            runtime.register(_spec_from_request(body))
        except DuplicateName as exc:
            return JSONResponse(status_code=409, content={"detail": str(exc)})
        except (RegistrationError, ValueError) as exc:
            return JSONResponse(status_code=400, content={"detail": str(exc)})
        return {"name": body.name}

    @app.post("/fn/{name}")
    def invoke(
        name: str,
        request: Request,
        mode: Optional[str] = Query(default=None),
        payload: bytes = Body(default=b""),
    ):
        header_mode = request.headers.get("X-Invoke-Mode")
        chosen = (header_mode or mode or "sync").lower()
        if chosen not in ("sync", "async"):
            return JSONResponse(status_code=400, content={"detail": f"unknown mode {chosen!r}"})
        try:
            if chosen == "async":
                inv, _ = runtime.accept(name, Mode.ASYNC, payload)
                return Response(
                    status_code=204,
                    headers={
                        "X-Invocation-Id": inv.id,
                        "X-Deadline": str(_ms(inv.deadline)),
                    },
                )
            inv, handle = runtime.accept(name, Mode.SYNC, payload)
            if handle is None:
                return JSONResponse(status_code=500, content={"detail": "sync invoke unsupported by this executor"})
            handle.wait()
            return {
                "invocation_id": inv.id,
                "function": name,
                "start_ms": _ms(handle.start),
                "end_ms": _ms(handle.end),
                "duration_ms": _ms(handle.end - handle.start),
            }
        except UnknownFunction:
            return JSONResponse(status_code=404, content={"detail": f"unknown function {name!r}"})
        except AdmissionQueueFull:
            return JSONResponse(status_code=503, content={"detail": "executor admission queue full"})
        except StorageFailure as exc:
            # the enqueue did not land; the client must not see an accept
            return JSONResponse(status_code=500, content={"detail": f"storage failure: {exc}"})

    @app.get("/queue")
    def queue_stats():
        stats = runtime.queue.stats(runtime.clock.now())
        return {
            "pending_count": stats.pending_count,
            "earliest_deadline_ms": _ms(stats.earliest_deadline),
            "overdue_count": stats.overdue_count,
        }

    @app.get("/state")
    def scheduler_state():
        current = runtime.monitor.current
        return {"state": current.state.value, "entered_at_ms": _ms(current.entered_at)}

    @app.get("/metrics")
    def metrics():
        now = runtime.clock.now()
        return {
            "utilization_window_mean": runtime.monitor.window_mean(now),
            "executor": runtime.executor.counters.snapshot(),
            "executor_running": runtime.executor.running_count(),
            "executor_waiting": runtime.executor.waiting_count(),
            "scheduler": {
                "dispatched_urgent": runtime.scheduler.dispatched_urgent,
                "dispatched_backfill": runtime.scheduler.dispatched_backfill,
                "backfill_in_flight": runtime.scheduler.backfill_in_flight(),
            },
        }

    return app

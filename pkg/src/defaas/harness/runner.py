"""Experiment runner: boots a fresh platform, drives the workload, and
writes the result directory (invocations.csv, utilization.csv,
dispatches.csv, run.json).

Simulated mode is single-threaded on a virtual clock and fully
deterministic for a fixed config. Burn mode runs the live platform (real
executor, duty-cycle load spinners, HTTP gateway) and drives it over HTTP;
its numbers depend on the machine.

Arrivals call the first configured function synchronously (the workflow
front door); everything downstream follows the trigger graph. After the
last phase ends the run drains under the final load level until the queue
and executor are empty.
"""

from __future__ import annotations

import datetime as _dt
import json
import math
import os
import random
import threading
import time
import urllib.request
from typing import List, Optional

from ..clock import WallClock
from ..delayed_queue import DelayedCallQueue
from ..executor import ExecMode, ExecutorConfig
from ..executor.burn import BurnExecutor, DutyCycleLoad
from ..executor.sim import SimEngine, SimulatedExecutor, StepLoad
from ..gateway import create_app
from ..model import Mode
from ..monitor import UtilizationMonitor, UtilizationSample
from ..runtime import PlatformRuntime
from .config import ExperimentConfig
from .loadprofile import artificial_load, compile_steps, phase_label, total_duration
from .metrics import RUN_JSON, RunWriter


class RunnerError(RuntimeError):
    pass


def _arrival_times(cfg: ExperimentConfig, horizon: float) -> List[float]:
    if cfg.arrival_process == "poisson":
        rng = random.Random(cfg.seed)
        times = []
        t = rng.expovariate(cfg.request_rate)
        while t < horizon:
            times.append(t)
            t += rng.expovariate(cfg.request_rate)
        return times
    n = math.ceil(horizon * cfg.request_rate - 1e-9)
    return [k / cfg.request_rate for k in range(n)]


def _write_run_json(out_dir: str, cfg: ExperimentConfig, valid: bool, error: Optional[str],
                    counts: dict, started_at: str, wall_seconds: float) -> None:
    meta = {
        "schema": 1,
        "label": {"policy": cfg.policy.value, "mode": cfg.mode, "time_scale": cfg.time_scale},
        "config": cfg.describe(),
        "counts": counts,
        "valid": valid,
        "error": error,
        "started_at": started_at,
        "wall_seconds": wall_seconds,
    }
    with open(os.path.join(out_dir, RUN_JSON), "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def run_experiment(cfg: ExperimentConfig, out_dir: str) -> dict:
    cfg.validate()
    os.makedirs(out_dir, exist_ok=True)
    started_at = _dt.datetime.now(_dt.timezone.utc).isoformat()
    t0 = time.monotonic()
    error: Optional[str] = None
    counts: dict = {}
    try:
        if cfg.mode == "sim":
            counts = _run_sim(cfg, out_dir)
        else:
            counts = _run_burn(cfg, out_dir)
        valid = True
    except Exception as exc:
        valid = False
        error = f"{type(exc).__name__}: {exc}"
    _write_run_json(out_dir, cfg, valid, error, counts, started_at, time.monotonic() - t0)
    if not valid:
        raise RunnerError(error)
    return counts


# -- simulated mode ----------------------------------------------------------


def _run_sim(cfg: ExperimentConfig, out_dir: str) -> dict:
    phases = cfg.scaled_phases()
    horizon = total_duration(phases)
    sample_interval = cfg.sample_interval * cfg.time_scale
    tick_interval = cfg.tick_interval * cfg.time_scale

    engine = SimEngine()
    load = StepLoad(compile_steps(phases, sample_interval))
    executor = SimulatedExecutor(
        engine,
        ExecutorConfig(cores=cfg.cores, mode=ExecMode.SIMULATED, admission_queue_limit=cfg.admission_queue_limit),
        on_complete=lambda *a: None,
        external_load=load,
    )
    queue = DelayedCallQueue(os.path.join(out_dir, "queue.wal"), fsync=cfg.queue_fsync)
    monitor = UtilizationMonitor(cfg.hysteresis(), initial_state=cfg.initial_state)
    writer = RunWriter(out_dir)
    runtime = PlatformRuntime(
        clock=engine.clock,
        queue=queue,
        monitor=monitor,
        executor=executor,
        scheduler_cfg=cfg.scheduler(),
        policy=cfg.policy,
        metrics_sink=lambda o: writer.outcome(o, phase_label(o.arrival, phases)),
        decision_sink=writer.decision,
    )
    executor.on_complete = runtime.on_complete

    specs = cfg.scaled_functions()
    for spec in reversed(specs):  # trigger targets must already exist
        runtime.register(spec)
    entry = specs[0].name

    def busy() -> bool:
        return len(queue) > 0 or executor.has_work()

    def arrive() -> None:
        runtime.accept(entry, Mode.SYNC)

    for t in _arrival_times(cfg, horizon):
        engine.schedule(t, arrive)

    def sample() -> None:
        now = engine.now
        u = executor.utilization(now)
        monitor.record(UtilizationSample(now, u))
        writer.sample(now, u)
        if now < horizon or busy():
            engine.schedule(now + sample_interval, sample)

    def tick() -> None:
        now = engine.now
        runtime.scheduler.tick(now)
        if now < horizon or busy():
            engine.schedule(now + tick_interval, tick)

    engine.schedule(0.0, sample)
    engine.schedule(0.0, tick)

    # generous drain budget: the longest chain of objectives plus slack
    max_delay = max((s.max_delay for s in specs), default=0.0)
    limit = horizon + (max_delay * max(1, len(specs))) + 100 * tick_interval
    engine.run(until=limit)
    if engine.pending_events() or busy():
        raise RunnerError(f"simulation did not drain within its budget ({limit:.1f}s)")

    writer.close()
    queue.close()
    return {
        "requests": len(_arrival_times(cfg, horizon)),
        "invocations_completed": executor.counters.completed,
        "dispatched_urgent": runtime.scheduler.dispatched_urgent,
        "dispatched_backfill": runtime.scheduler.dispatched_backfill,
        "sim_end_s": engine.now,
    }


# -- burn mode ------------------------------------------------------------------


def _run_burn(cfg: ExperimentConfig, out_dir: str) -> dict:
    import uvicorn

    phases = cfg.scaled_phases()
    horizon = total_duration(phases)
    sample_interval = cfg.sample_interval * cfg.time_scale
    clock = WallClock()

    executor = BurnExecutor(
        ExecutorConfig(cores=cfg.cores, mode=ExecMode.BURN, admission_queue_limit=cfg.admission_queue_limit),
        clock,
        on_complete=lambda *a: None,
    )
    queue = DelayedCallQueue(os.path.join(out_dir, "queue.wal"), fsync=cfg.queue_fsync)
    monitor = UtilizationMonitor(cfg.hysteresis(), initial_state=cfg.initial_state)
    writer = RunWriter(out_dir)
    write_lock = threading.Lock()

    def outcome_sink(o) -> None:
        with write_lock:
            writer.outcome(o, phase_label(o.arrival, phases))

    def decision_sink(d) -> None:
        with write_lock:
            writer.decision(d)

    runtime = PlatformRuntime(
        clock=clock,
        queue=queue,
        monitor=monitor,
        executor=executor,
        scheduler_cfg=cfg.scheduler(),
        policy=cfg.policy,
        metrics_sink=outcome_sink,
        decision_sink=decision_sink,
    )
    executor.on_complete = runtime.on_complete
    specs = cfg.scaled_functions()
    for spec in reversed(specs):
        runtime.register(spec)
    entry = specs[0].name

    app = create_app(runtime)
    server = uvicorn.Server(uvicorn.Config(app, host="127.0.0.1", port=0, log_level="error"))
    server_thread = threading.Thread(target=server.run, daemon=True)
    server_thread.start()
    while not server.started:
        time.sleep(0.01)
    port = server.servers[0].sockets[0].getsockname()[1]
    base = f"http://127.0.0.1:{port}"

    stop = threading.Event()

    def sampler() -> None:
        while not stop.is_set():
            now = clock.now()
            u = executor.utilization(now)
            monitor.record(UtilizationSample(now, u))
            with write_lock:
                writer.sample(now, u)
            stop.wait(sample_interval)

    sampler_thread = threading.Thread(target=sampler, daemon=True)
    scheduler_thread = threading.Thread(target=runtime.scheduler.run_loop, args=(clock, stop), daemon=True)
    spinners = DutyCycleLoad(lambda t: artificial_load(t, phases), clock, threads=cfg.cores)

    def post(path: str) -> None:
        req = urllib.request.Request(base + path, data=b"", method="POST")
        urllib.request.urlopen(req, timeout=600).read()

    errors: List[str] = []

    def generator() -> None:
        times = _arrival_times(cfg, horizon)
        workers: List[threading.Thread] = []
        for t in times:
            delay = t - clock.now()
            if delay > 0 and stop.wait(delay):
                break
            w = threading.Thread(target=_safe_post, args=(post, f"/fn/{entry}", errors), daemon=True)
            w.start()
            workers.append(w)
        for w in workers:
            w.join(timeout=600)

    sampler_thread.start()
    scheduler_thread.start()
    spinners.start()
    try:
        generator()
        deadline = time.monotonic() + horizon + 600
        while (len(queue) > 0 or executor.has_work()) and time.monotonic() < deadline:
            time.sleep(max(0.05, sample_interval / 2))
        drained = len(queue) == 0 and not executor.has_work()
    finally:
        stop.set()
        spinners.stop()
        scheduler_thread.join(timeout=10)
        sampler_thread.join(timeout=10)
        server.should_exit = True
        server_thread.join(timeout=10)
        executor.shutdown(drain=False)
        writer.close()
        queue.close()
    if errors:
        raise RunnerError(f"{len(errors)} request errors, first: {errors[0]}")
    if not drained:
        raise RunnerError("burn run did not drain within its budget")
    return {
        "requests": len(_arrival_times(cfg, horizon)),
        "invocations_completed": executor.counters.completed,
        "dispatched_urgent": runtime.scheduler.dispatched_urgent,
        "dispatched_backfill": runtime.scheduler.dispatched_backfill,
    }


def _safe_post(post, path: str, errors: List[str]) -> None:
    try:
        post(path)
    except Exception as exc:  # noqa: BLE001 - collected and reported by the runner
        errors.append(f"{path}: {exc}")

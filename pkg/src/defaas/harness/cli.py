"""Experiment command line.

    experiment run --config cfg.yaml --mode sim|burn --policy baseline|deferred --out DIR
    experiment summarize --in DIR [--json]
    experiment serve --config cfg.yaml [--port P]

Exit codes: 0 success, 2 validation/config error, 1 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from ..runtime import Policy
from . import config as config_mod
from .metrics import SUMMARY_JSON, format_summary, summarize
from .runner import RunnerError, run_experiment


def _cmd_run(args: argparse.Namespace) -> int:
    try:
        cfg = config_mod.load(args.config)
        if args.mode:
            cfg.mode = args.mode
        if args.policy:
            cfg.policy = Policy(args.policy)
        cfg.validate()
    except (config_mod.ConfigError, OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        counts = run_experiment(cfg, args.out)
    except RunnerError as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return 1
    print(json.dumps({"out": args.out, **counts}))
    return 0


def _cmd_summarize(args: argparse.Namespace) -> int:
    try:
        summary = summarize(args.indir)
    except FileNotFoundError as exc:
        print(f"summarize error: {exc}", file=sys.stderr)
        return 2
    out_path = f"{args.indir}/{SUMMARY_JSON}"
    with open(out_path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    if args.json:
        print(json.dumps(summary, sort_keys=True))
    else:
        print(format_summary(summary))
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from ..clock import WallClock
    from ..delayed_queue import DelayedCallQueue
    from ..executor import ExecMode, ExecutorConfig
    from ..executor.burn import BurnExecutor
    from ..gateway import create_app
    from ..monitor import UtilizationMonitor
    from ..runtime import PlatformRuntime

    try:
        cfg = config_mod.load(args.config) if args.config else config_mod.ExperimentConfig(
            phases=[], time_scale=1.0
        )
    except (config_mod.ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    clock = WallClock()
    executor = BurnExecutor(
        ExecutorConfig(cores=cfg.cores, mode=ExecMode.BURN, admission_queue_limit=cfg.admission_queue_limit),
        clock,
        on_complete=lambda *a: None,
    )
    queue = DelayedCallQueue(args.queue_path, fsync=cfg.queue_fsync)
    monitor = UtilizationMonitor(cfg.hysteresis(), initial_state=cfg.initial_state)
    runtime = PlatformRuntime(
        clock=clock,
        queue=queue,
        monitor=monitor,
        executor=executor,
        scheduler_cfg=cfg.scheduler(),
        policy=cfg.policy,
    )
    executor.on_complete = runtime.on_complete

    import threading

    stop = threading.Event()
    sched = threading.Thread(target=runtime.scheduler.run_loop, args=(clock, stop), daemon=True)
    sched.start()

    def sampler() -> None:
        from ..monitor import UtilizationSample

        interval = cfg.sample_interval * cfg.time_scale
        while not stop.is_set():
            now = clock.now()
            monitor.record(UtilizationSample(now, executor.utilization(now)))
            stop.wait(interval)

    threading.Thread(target=sampler, daemon=True).start()
    try:
        uvicorn.run(create_app(runtime), host=args.host, port=args.port, log_level="info")
    finally:
        stop.set()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="experiment", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run an experiment and write a result directory")
    run_p.add_argument("--config", required=True)
    run_p.add_argument("--mode", choices=["sim", "burn"], default=None)
    run_p.add_argument("--policy", choices=["baseline", "deferred"], default=None)
    run_p.add_argument("--out", required=True)
    run_p.set_defaults(fn=_cmd_run)

    sum_p = sub.add_parser("summarize", help="summarize a result directory")
    sum_p.add_argument("--in", dest="indir", required=True)
    sum_p.add_argument("--json", action="store_true", help="print machine-readable JSON instead of the table")
    sum_p.set_defaults(fn=_cmd_summarize)

    srv_p = sub.add_parser("serve", help="serve the live platform over HTTP")
    srv_p.add_argument("--config", default=None)
    srv_p.add_argument("--host", default="127.0.0.1")
    srv_p.add_argument("--port", type=int, default=8080)
    srv_p.add_argument("--queue-path", default="delayed-queue.wal")
    srv_p.set_defaults(fn=_cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())

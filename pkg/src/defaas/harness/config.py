"""Experiment configuration: YAML file parsing and validation.

File keys mirror ExperimentConfig; durations are given in seconds at paper
scale and multiplied by time_scale when the platform is built, so one file
serves every scale. Work core-seconds are deliberately not scaled.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import yaml

from ..executor import ExecutorConfig
from ..model import CpuBound, FixedLatency, FunctionSpec, Mode
from ..monitor import HysteresisConfig, State
from ..runtime import Policy
from ..scheduler import SchedulerConfig
from .loadprofile import Constant, Phase, Ramp, validate_phases
from .usecase import default_use_case


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    time_scale: float = 1.0
    request_rate: float = 1.0
    phases: List[Phase] = field(default_factory=list)
    functions: Optional[List[FunctionSpec]] = None  # None: default use case
    policy: Policy = Policy.DEFERRED
    mode: str = "sim"  # sim | burn
    seed: int = 0
    arrival_process: str = "constant"  # constant | poisson
    initial_state: State = State.IDLE
    cores: int = 8
    admission_queue_limit: int = 1024
    tick_interval: float = 1.0
    urgency_margin: Optional[float] = None
    idle_backfill_cap: int = 4
    busy_threshold: float = 0.90
    idle_threshold: float = 0.60
    window: float = 30.0
    sample_interval: float = 1.0
    queue_fsync: bool = True

    def validate(self) -> None:
        if self.time_scale <= 0:
            raise ConfigError("time_scale must be > 0")
        if self.request_rate <= 0:
            raise ConfigError("request_rate must be > 0")
        if self.mode not in ("sim", "burn"):
            raise ConfigError(f"mode must be sim or burn, got {self.mode!r}")
        if self.arrival_process not in ("constant", "poisson"):
            raise ConfigError(f"arrival_process must be constant or poisson, got {self.arrival_process!r}")
        try:
            validate_phases(self.phases)
            HysteresisConfig(
                busy_threshold=self.busy_threshold,
                idle_threshold=self.idle_threshold,
                window=self.window,
                sample_interval=self.sample_interval,
            )
            SchedulerConfig(
                tick_interval=self.tick_interval,
                urgency_margin=self.urgency_margin,
                idle_backfill_cap=self.idle_backfill_cap,
            )
            ExecutorConfig(cores=self.cores, admission_queue_limit=self.admission_queue_limit)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    # -- scaled views ------------------------------------------------------

    def scaled_phases(self) -> List[Phase]:
        return [Phase(p.label, p.duration * self.time_scale, p.load) for p in self.phases]

    def scaled_functions(self) -> List[FunctionSpec]:
        if self.functions is None:
            return default_use_case(self.time_scale)
        return [
            FunctionSpec(
                name=s.name,
                max_delay=s.max_delay * self.time_scale,
                work=s.work,
                triggers_on_completion=s.triggers_on_completion,
            )
            for s in self.functions
        ]

    def hysteresis(self) -> HysteresisConfig:
        return HysteresisConfig(
            busy_threshold=self.busy_threshold,
            idle_threshold=self.idle_threshold,
            window=self.window * self.time_scale,
            sample_interval=self.sample_interval * self.time_scale,
        )

    def scheduler(self) -> SchedulerConfig:
        return SchedulerConfig(
            tick_interval=self.tick_interval * self.time_scale,
            urgency_margin=None if self.urgency_margin is None else self.urgency_margin * self.time_scale,
            idle_backfill_cap=self.idle_backfill_cap,
        )

    def executor(self) -> ExecutorConfig:
        return ExecutorConfig(cores=self.cores, admission_queue_limit=self.admission_queue_limit)

    def describe(self) -> Dict:
        return {
            "time_scale": self.time_scale,
            "request_rate": self.request_rate,
            "policy": self.policy.value,
            "mode": self.mode,
            "seed": self.seed,
            "arrival_process": self.arrival_process,
            "initial_state": self.initial_state.value,
            "phases": [
                {
                    "label": p.label,
                    "duration_s": p.duration,
                    "load": (
                        {"kind": "constant", "fraction": p.load.fraction}
                        if isinstance(p.load, Constant)
                        else {"kind": "ramp", "start": p.load.start, "end": p.load.end}
                    ),
                }
                for p in self.phases
            ],
            "functions": "default" if self.functions is None else [s.name for s in self.functions],
            "cores": self.cores,
            "tick_interval_s": self.tick_interval,
            "idle_backfill_cap": self.idle_backfill_cap,
            "busy_threshold": self.busy_threshold,
            "idle_threshold": self.idle_threshold,
            "window_s": self.window,
            "sample_interval_s": self.sample_interval,
        }


def _parse_load(obj: dict) -> object:
    kind = obj.get("kind")
    if kind == "constant":
        return Constant(float(obj["fraction"]))
    if kind == "ramp":
        return Ramp(float(obj["start"]), float(obj["end"]))
    raise ConfigError(f"unknown load kind {kind!r}")


def _parse_work(obj: dict):
    kind = obj.get("kind")
    if kind == "cpu_bound":
        return CpuBound(float(obj["core_seconds"]))
    if kind == "fixed_latency":
        return FixedLatency(float(obj["seconds"]))
    raise ConfigError(f"unknown work kind {kind!r}")


def _parse_functions(items: Sequence[dict]) -> List[FunctionSpec]:
    specs = []
    for item in items:
        triggers = tuple(
            (t["function"], Mode(t.get("mode", "async"))) for t in item.get("triggers", [])
        )
        specs.append(
            FunctionSpec(
                name=item["name"],
                max_delay=float(item.get("max_delay_s", 0.0)),
                work=_parse_work(item["work"]),
                triggers_on_completion=triggers,
            )
        )
    return specs


def from_dict(raw: dict) -> ExperimentConfig:
    try:
        phases = [
            Phase(
                label=str(p.get("label", f"phase{i + 1}")),
                duration=float(p["duration_s"]),
                load=_parse_load(p["load"]),
            )
            for i, p in enumerate(raw.get("phases", []))
        ]
        functions_raw = raw.get("functions", "default")
        functions = None if functions_raw in ("default", None) else _parse_functions(functions_raw)
        executor = raw.get("executor", {})
        scheduler = raw.get("scheduler", {})
        monitor = raw.get("monitor", {})
        cfg = ExperimentConfig(
            time_scale=float(raw.get("time_scale", 1.0)),
            request_rate=float(raw.get("request_rate", 1.0)),
            phases=phases,
            functions=functions,
            policy=Policy(raw.get("policy", "deferred")),
            mode=str(raw.get("mode", "sim")),
            seed=int(raw.get("seed", 0)),
            arrival_process=str(raw.get("arrival_process", "constant")),
            initial_state=State(raw.get("initial_state", "idle")),
            cores=int(executor.get("cores", 8)),
            admission_queue_limit=int(executor.get("admission_queue_limit", 1024)),
            tick_interval=float(scheduler.get("tick_interval_s", 1.0)),
            urgency_margin=(
                None
                if scheduler.get("urgency_margin_s") is None
                else float(scheduler["urgency_margin_s"])
            ),
            idle_backfill_cap=int(scheduler.get("idle_backfill_cap", 4)),
            busy_threshold=float(monitor.get("busy_threshold", 0.90)),
            idle_threshold=float(monitor.get("idle_threshold", 0.60)),
            window=float(monitor.get("window_s", 30.0)),
            sample_interval=float(monitor.get("sample_interval_s", 1.0)),
            queue_fsync=bool(raw.get("queue_fsync", True)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad config: {exc}") from exc
    cfg.validate()
    return cfg


def load(path: str) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        raw = yaml.safe_load(fh)
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return from_dict(raw)

"""Experiment metrics: CSV emission and summary statistics.

Schemas (RFC 4180, header row, LF line endings, no timestamps so reruns
are byte-identical):

    invocations.csv  workflow_id,invocation_id,function,mode,arrival_s,
                     deadline_s,dispatch_s,start_s,end_s,phase
    utilization.csv  t_s,utilization
    dispatches.csv   t_s,invocation_id,reason,deadline_s,lateness_s

Percentiles use the nearest-rank rule on the fully sorted sample
(index ceil(q/100 * n) - 1); the standard deviation is the population
form. Workflow duration is the sum of execution durations (end - start)
over every invocation sharing a workflow_id.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

from ..runtime import InvocationOutcome
from ..scheduler import DispatchDecision

INVOCATIONS_CSV = "invocations.csv"
UTILIZATION_CSV = "utilization.csv"
DISPATCHES_CSV = "dispatches.csv"
RUN_JSON = "run.json"
SUMMARY_JSON = "summary.json"

_INV_HEADER = [
    "workflow_id",
    "invocation_id",
    "function",
    "mode",
    "arrival_s",
    "deadline_s",
    "dispatch_s",
    "start_s",
    "end_s",
    "phase",
]


@dataclass(frozen=True)
class MetricsRecord:
    workflow_id: str
    invocation_id: str
    function: str
    mode: str
    arrival: float
    deadline: Optional[float]
    dispatch: float
    start: float
    end: float
    phase: str


class RunWriter:
    """Streams the three CSV files for one experiment run."""

    def __init__(self, out_dir: str) -> None:
        os.makedirs(out_dir, exist_ok=True)
        self.out_dir = out_dir
        self._inv_fh = open(os.path.join(out_dir, INVOCATIONS_CSV), "w", newline="", encoding="utf-8")
        self._util_fh = open(os.path.join(out_dir, UTILIZATION_CSV), "w", newline="", encoding="utf-8")
        self._disp_fh = open(os.path.join(out_dir, DISPATCHES_CSV), "w", newline="", encoding="utf-8")
        self._inv = csv.writer(self._inv_fh, lineterminator="\n")
        self._util = csv.writer(self._util_fh, lineterminator="\n")
        self._disp = csv.writer(self._disp_fh, lineterminator="\n")
        self._inv.writerow(_INV_HEADER)
        self._util.writerow(["t_s", "utilization"])
        self._disp.writerow(["t_s", "invocation_id", "reason", "deadline_s", "lateness_s"])

    def outcome(self, o: InvocationOutcome, phase: str) -> None:
        self._inv.writerow(
            [
                o.workflow_id,
                o.invocation_id,
                o.function,
                o.mode.value,
                o.arrival,
                "" if o.deadline is None else o.deadline,
                o.dispatch,
                o.start,
                o.end,
                phase,
            ]
        )

    def sample(self, t: float, u: float) -> None:
        self._util.writerow([t, u])

    def decision(self, d: DispatchDecision) -> None:
        self._disp.writerow([d.dispatch_time, d.invocation_id, d.reason.value, d.deadline, d.lateness])

    def close(self) -> None:
        for fh in (self._inv_fh, self._util_fh, self._disp_fh):
            fh.close()


# -- reading -----------------------------------------------------------------


def read_invocations(path: str) -> List[MetricsRecord]:
    records: List[MetricsRecord] = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            records.append(
                MetricsRecord(
                    workflow_id=row["workflow_id"],
                    invocation_id=row["invocation_id"],
                    function=row["function"],
                    mode=row["mode"],
                    arrival=float(row["arrival_s"]),
                    deadline=float(row["deadline_s"]) if row["deadline_s"] else None,
                    dispatch=float(row["dispatch_s"]),
                    start=float(row["start_s"]),
                    end=float(row["end_s"]),
                    phase=row["phase"],
                )
            )
    return records


def read_utilization(path: str) -> List[tuple]:
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            rows.append((float(row["t_s"]), float(row["utilization"])))
    return rows


# -- statistics -------------------------------------------------------------


def percentile(values: Sequence[float], q: float) -> float:
    """Nearest-rank percentile over the full sorted sample."""
    if not values:
        raise ValueError("percentile of empty sample")
    if not (0 < q <= 100):
        raise ValueError("q must be in (0, 100]")
    ordered = sorted(values)
    idx = max(0, math.ceil(q / 100.0 * len(ordered)) - 1)
    return ordered[idx]


def _mean(values: Sequence[float]) -> float:
    total = 0.0
    for v in values:
        total += v
    return total / len(values)


def _std(values: Sequence[float]) -> float:
    m = _mean(values)
    acc = 0.0
    for v in values:
        acc += (v - m) * (v - m)
    return math.sqrt(acc / len(values))


def _latency_stats(values: Sequence[float]) -> Optional[dict]:
    if not values:
        return None
    return {
        "count": len(values),
        "mean": _mean(values),
        "std": _std(values),
        "p50": percentile(values, 50),
        "p99": percentile(values, 99),
    }


def _duration_stats(values: Sequence[float]) -> Optional[dict]:
    if not values:
        return None
    return {"count": len(values), "mean": _mean(values), "p99": percentile(values, 99)}


def summarize(run_dir: str) -> dict:
    """Per-phase and overall statistics for one result directory."""
    records = read_invocations(os.path.join(run_dir, INVOCATIONS_CSV))
    util = read_utilization(os.path.join(run_dir, UTILIZATION_CSV))
    with open(os.path.join(run_dir, RUN_JSON), encoding="utf-8") as fh:
        run_meta = json.load(fh)

    time_scale = run_meta["config"]["time_scale"]
    phase_bounds = []
    start = 0.0
    for p in run_meta["config"]["phases"]:
        dur = p["duration_s"] * time_scale
        phase_bounds.append((p["label"], start, start + dur))
        start += dur
    total = start

    # sync request-response latency, in file order
    sync_all: List[float] = []
    sync_by_phase: Dict[str, List[float]] = {}
    for r in records:
        if r.mode != "sync":
            continue
        latency = r.end - r.arrival
        sync_all.append(latency)
        sync_by_phase.setdefault(r.phase, []).append(latency)

    # workflow duration keyed to the phase of the workflow's earliest arrival
    wf_duration: Dict[str, float] = {}
    wf_phase: Dict[str, str] = {}
    wf_first_arrival: Dict[str, float] = {}
    for r in records:
        wf_duration[r.workflow_id] = wf_duration.get(r.workflow_id, 0.0) + (r.end - r.start)
        if r.workflow_id not in wf_first_arrival or r.arrival < wf_first_arrival[r.workflow_id]:
            wf_first_arrival[r.workflow_id] = r.arrival
            wf_phase[r.workflow_id] = r.phase
    wf_all = list(wf_duration.values())
    wf_by_phase: Dict[str, List[float]] = {}
    for wf_id, duration in wf_duration.items():
        wf_by_phase.setdefault(wf_phase[wf_id], []).append(duration)

    util_by_phase: Dict[str, List[float]] = {}
    util_overall: List[float] = []
    for t, u in util:
        if t < total:
            util_overall.append(u)
        for label, lo, hi in phase_bounds:
            if lo <= t < hi:
                util_by_phase.setdefault(label, []).append(u)
                break

    def block(label: Optional[str]) -> dict:
        sync = sync_all if label is None else sync_by_phase.get(label, [])
        wf = wf_all if label is None else wf_by_phase.get(label, [])
        us = util_overall if label is None else util_by_phase.get(label, [])
        return {
            "sync_latency": _latency_stats(sync),
            "workflow_duration": _duration_stats(wf),
            "utilization_mean": _mean(us) if us else None,
        }

    labels = [label for label, _, _ in phase_bounds]
    if any(r.phase == "drain" for r in records):
        labels.append("drain")
    return {
        "label": run_meta.get("label", {}),
        "overall": block(None),
        "phases": {label: block(label) for label in labels},
    }


def format_summary(summary: dict) -> str:
    """Fixed-width text table; values printed with six decimals."""

    def fmt(v) -> str:
        return "-" if v is None else f"{v:.6f}"

    lines = []
    label = summary.get("label", {})
    lines.append(
        "run: policy={} mode={} time_scale={}".format(
            label.get("policy", "?"), label.get("mode", "?"), label.get("time_scale", "?")
        )
    )
    header = (
        f"{'scope':<12} {'n_sync':>7} {'lat_mean':>12} {'lat_std':>12} "
        f"{'lat_p50':>12} {'lat_p99':>12} {'n_wf':>6} {'wf_mean':>12} {'wf_p99':>12} {'util_mean':>10}"
    )
    lines.append(header)
    lines.append("-" * len(header))

    def row(name: str, blk: dict) -> str:
        sync = blk.get("sync_latency") or {}
        wf = blk.get("workflow_duration") or {}
        return (
            f"{name:<12} {sync.get('count', 0):>7} {fmt(sync.get('mean')):>12} {fmt(sync.get('std')):>12} "
            f"{fmt(sync.get('p50')):>12} {fmt(sync.get('p99')):>12} {wf.get('count', 0):>6} "
            f"{fmt(wf.get('mean')):>12} {fmt(wf.get('p99')):>12} {fmt(blk.get('utilization_mean')):>10}"
        )

    lines.append(row("overall", summary["overall"]))
    for label_name, blk in summary["phases"].items():
        lines.append(row(label_name, blk))
    return "\n".join(lines)

"""Phased artificial-load profiles.

A profile is a list of phases, each either constant or a linear ramp.
`artificial_load` evaluates the exact (continuous) profile; the simulator
consumes `compile_steps`, which discretizes ramps into a piecewise-constant
staircase at the utilization-sample cadence. Past the end of the last phase
the final value holds (the drain period runs under the last phase's load).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple, Union


@dataclass(frozen=True)
class Constant:
    fraction: float


@dataclass(frozen=True)
class Ramp:
    start: float
    end: float


LoadSpec = Union[Constant, Ramp]


@dataclass(frozen=True)
class Phase:
    label: str
    duration: float
    load: LoadSpec


def validate_phases(phases: Sequence[Phase]) -> None:
    if not phases:
        raise ValueError("phase list must be non-empty")
    for p in phases:
        if p.duration <= 0:
            raise ValueError(f"phase {p.label!r} must have positive duration")
        values = (p.load.fraction,) if isinstance(p.load, Constant) else (p.load.start, p.load.end)
        if any(not (0.0 <= v <= 1.0) for v in values):
            raise ValueError(f"phase {p.label!r} has load outside [0,1]")


def total_duration(phases: Sequence[Phase]) -> float:
    return sum(p.duration for p in phases)


def scale_phases(phases: Sequence[Phase], time_scale: float) -> List[Phase]:
    return [Phase(p.label, p.duration * time_scale, p.load) for p in phases]


def artificial_load(t: float, phases: Sequence[Phase]) -> float:
    """Exact load fraction at time t since experiment start."""
    if t < 0:
        raise ValueError("t must be >= 0")
    start = 0.0
    last = 0.0
    for p in phases:
        end = start + p.duration
        if t < end:
            if isinstance(p.load, Constant):
                return p.load.fraction
            return p.load.start + (p.load.end - p.load.start) * (t - start) / p.duration
        last = p.load.fraction if isinstance(p.load, Constant) else p.load.end
        start = end
    return last  # past the end: hold the final value


def phase_label(t: float, phases: Sequence[Phase]) -> str:
    start = 0.0
    for p in phases:
        end = start + p.duration
        if t < end:
            return p.label
        start = end
    return "drain"


def compile_steps(phases: Sequence[Phase], step: float) -> List[Tuple[float, float]]:
    """Piecewise-constant breakpoints for the simulator: constants produce
    one point, ramps one point per `step`, each holding the ramp's value at
    the left endpoint."""
    if step <= 0:
        raise ValueError("step must be > 0")
    points: List[Tuple[float, float]] = []
    start = 0.0
    for p in phases:
        if isinstance(p.load, Constant):
            points.append((start, p.load.fraction))
        else:
            n = int(math.ceil(p.duration / step - 1e-9))
            for k in range(n):
                t = start + k * step
                points.append((t, artificial_load(t, phases)))
        start += p.duration
    # hold the final value through any drain period
    final = phases[-1].load.fraction if isinstance(phases[-1].load, Constant) else phases[-1].load.end
    points.append((start, final))
    return points

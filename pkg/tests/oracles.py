"""Independent reference implementations the tests check against.

These deliberately share no code with the package: the queue model is a
sorted list, the processor-sharing oracle is fixed-step Euler integration,
and the percentile oracle is a full sort.
"""

from __future__ import annotations

import math
from bisect import insort
from typing import Dict, List, Optional, Sequence, Tuple


class ReferenceQueue:
    """In-memory model of the delayed queue: EDF by (deadline, arrival, id),
    exactly-once pops, duplicate rejection."""

    def __init__(self) -> None:
        self._entries: List[Tuple[float, float, str]] = []
        self._by_id: Dict[str, object] = {}
        self._seen: set = set()

    def enqueue(self, inv) -> bool:
        if inv.id in self._seen:
            return False
        insort(self._entries, (inv.deadline, inv.arrival_time, inv.id))
        self._by_id[inv.id] = inv
        self._seen.add(inv.id)
        return True

    def pop_earliest(self):
        if not self._entries:
            return None
        _, _, inv_id = self._entries.pop(0)
        return self._by_id.pop(inv_id)

    def peek_urgent(self, now: float, margin: float) -> List[str]:
        return [iid for d, _, iid in self._entries if d <= now + margin]

    def pending_ids(self) -> List[str]:
        return [iid for _, _, iid in self._entries]

    def earliest_deadline(self) -> Optional[float]:
        return self._entries[0][0] if self._entries else None

    def overdue_count(self, now: float) -> int:
        return sum(1 for d, _, _ in self._entries if d < now)

    def __len__(self) -> int:
        return len(self._entries)


def step_load_value(points: Sequence[Tuple[float, float]], t: float) -> float:
    value = 0.0
    for pt, pv in points:
        if pt <= t:
            value = pv
        else:
            break
    return value


def euler_completion_times(
    tasks: Sequence[Tuple[str, float, float]],
    load_points: Sequence[Tuple[float, float]],
    cores: int,
    dt: float = 0.001,
    horizon: float = 1000.0,
) -> Dict[str, float]:
    """Fixed-step integration of the sharing rule min(1, C*(1-ext)/n).

    tasks: (id, submit_time, core_seconds). Completion is reported at the
    end of the step where remaining work crosses zero.
    """
    pending = sorted(tasks, key=lambda x: (x[1], x[0]))
    remaining: Dict[str, float] = {}
    done: Dict[str, float] = {}
    i = 0
    t = 0.0
    steps = int(math.ceil(horizon / dt))
    for _ in range(steps):
        while i < len(pending) and pending[i][1] <= t + 1e-12:
            remaining[pending[i][0]] = pending[i][2]
            i += 1
        if remaining:
            ext = step_load_value(load_points, t)
            rate = min(1.0, cores * (1.0 - ext) / len(remaining))
            finished = []
            for tid in remaining:
                remaining[tid] -= rate * dt
                if remaining[tid] <= 0.0:
                    finished.append(tid)
            for tid in finished:
                del remaining[tid]
                done[tid] = t + dt
        t += dt
        if i >= len(pending) and not remaining:
            break
    if len(done) != len(tasks):
        raise RuntimeError("oracle horizon too short for scenario")
    return done


def percentile_by_sort(values: Sequence[float], q: float) -> float:
    """Nearest-rank percentile straight from the definition."""
    ordered = sorted(values)
    rank = math.ceil(q / 100.0 * len(ordered))
    return ordered[max(rank, 1) - 1]

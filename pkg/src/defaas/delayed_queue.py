"""Durable earliest-deadline-first queue of accepted asynchronous invocations.

The pending set lives in memory ordered by (deadline, arrival_time, id);
every mutation is appended to a write-ahead log *before* it becomes
observable, so replaying the log from empty reproduces the pending set
exactly. Recovery tolerates a torn tail record and refuses interior damage.

Single writer discipline is not assumed: enqueue arrives from gateway
threads while the scheduler pops, so all mutations go through one lock.
"""

from __future__ import annotations

import base64
import heapq
import json
import threading
from dataclasses import dataclass
from typing import Dict, List, Optional, Set, Tuple

from .model import Invocation, Mode
from .wal import CorruptLog, RecordLog, scan

__all__ = [
    "DelayedCallQueue",
    "QueueStats",
    "NotAsync",
    "DuplicateId",
    "StorageFailure",
    "CorruptLog",
]


class NotAsync(ValueError):
    pass


class DuplicateId(ValueError):
    pass


class StorageFailure(RuntimeError):
    """The log append failed; the operation did not take effect and the
    caller must not acknowledge the client."""


@dataclass(frozen=True)
class QueueStats:
    pending_count: int
    earliest_deadline: Optional[float]
    overdue_count: int


def _inv_to_json(inv: Invocation) -> dict:
    return {
        "id": inv.id,
        "function": inv.function,
        "mode": inv.mode.value,
        "arrival_time": inv.arrival_time,
        "deadline": inv.deadline,
        "workflow_id": inv.workflow_id,
        "parent_id": inv.parent_id,
        "payload": base64.b64encode(inv.payload).decode("ascii"),
    }


def _inv_from_json(obj: dict) -> Invocation:
    return Invocation(
        id=obj["id"],
        function=obj["function"],
        mode=Mode(obj["mode"]),
        arrival_time=obj["arrival_time"],
        deadline=obj["deadline"],
        workflow_id=obj["workflow_id"],
        parent_id=obj.get("parent_id"),
        payload=base64.b64decode(obj.get("payload", "")),
    )


class DelayedCallQueue:
    """EDF priority queue with write-ahead persistence and crash recovery."""

    def __init__(self, path: str, fsync: bool = True, compact_ratio: float = 2.0) -> None:
        self._lock = threading.RLock()
        self._compact_ratio = compact_ratio
        self._pending: Dict[str, Invocation] = {}
        self._dispatched_ids: Set[str] = set()
        self._heap: List[Tuple[float, float, str]] = []
        self._seq = 0
        self._dispatched_in_log = 0
        valid_bytes = self._replay(path)
        self._log = RecordLog(path, fsync=fsync, truncate_to=valid_bytes)

    # -- recovery ----------------------------------------------------------

    def _replay(self, path: str) -> int:
        records, valid_bytes, _size = scan(path)
        for raw in records:
            try:
                event = json.loads(raw.decode("utf-8"))
            except (UnicodeDecodeError, json.JSONDecodeError) as exc:
                raise CorruptLog(f"{path}: undecodable record: {exc}") from exc
            seq = event.get("seq")
            if not isinstance(seq, int) or seq <= self._seq:
                raise CorruptLog(f"{path}: sequence numbers not strictly increasing at {seq}")
            self._seq = seq
            kind = event.get("kind")
            if kind == "enqueued":
                inv = _inv_from_json(event["inv"])
                self._pending[inv.id] = inv
                heapq.heappush(self._heap, (inv.deadline, inv.arrival_time, inv.id))
            elif kind == "dispatched":
                inv_id = event["id"]
                self._pending.pop(inv_id, None)
                self._dispatched_ids.add(inv_id)
                self._dispatched_in_log += 1
            else:
                raise CorruptLog(f"{path}: unknown event kind {kind!r}")
        return valid_bytes

    # -- mutations ---------------------------------------------------------

    def _append(self, event: dict) -> None:
        try:
            self._log.append(json.dumps(event, separators=(",", ":")).encode("utf-8"))
        except OSError as exc:
            raise StorageFailure(str(exc)) from exc

    def enqueue(self, inv: Invocation) -> None:
        """Durably record and admit a pending async invocation.

        The log append happens before the ack (the return), so a crash
        after enqueue returns can never lose the invocation.
        """
        if inv.mode is not Mode.ASYNC or inv.deadline is None:
            raise NotAsync(f"invocation {inv.id} is not an async call with a deadline")
        with self._lock:
            if inv.id in self._pending or inv.id in self._dispatched_ids:
                raise DuplicateId(f"invocation id {inv.id} already seen")
            self._seq += 1
            self._append({"seq": self._seq, "kind": "enqueued", "inv": _inv_to_json(inv)})
            self._pending[inv.id] = inv
            heapq.heappush(self._heap, (inv.deadline, inv.arrival_time, inv.id))

    def remove(self, inv_id: str, now: float) -> Invocation:
        """Durably mark one pending invocation dispatched and return it.

        Used by the scheduler to pop the exact urgent set; pop_earliest is
        this applied to the head.
        """
        with self._lock:
            if inv_id not in self._pending:
                raise KeyError(inv_id)
            self._seq += 1
            self._append({"seq": self._seq, "kind": "dispatched", "id": inv_id, "t": now})
            inv = self._pending.pop(inv_id)
            self._dispatched_ids.add(inv_id)
            self._dispatched_in_log += 1
            self._maybe_compact()
            return inv

    def pop_earliest(self, now: float) -> Optional[Invocation]:
        with self._lock:
            head = self.peek_earliest()
            if head is None:
                return None
            return self.remove(head.id, now)

    # -- reads -------------------------------------------------------------

    def peek_earliest(self) -> Optional[Invocation]:
        with self._lock:
            while self._heap:
                _, _, inv_id = self._heap[0]
                if inv_id in self._pending:
                    return self._pending[inv_id]
                heapq.heappop(self._heap)  # stale entry from remove()
            return None

    def snapshot(self) -> List[Invocation]:
        """Pending invocations in EDF order (deadline, arrival_time, id)."""
        with self._lock:
            return [
                self._pending[i]
                for _, _, i in sorted((inv.deadline, inv.arrival_time, inv.id) for inv in self._pending.values())
            ]

    def peek_urgent(self, now: float, margin: float) -> List[Invocation]:
        """All pending invocations with deadline <= now + margin, EDF order,
        without removal. Overdue entries are included."""
        if margin < 0:
            raise ValueError("margin must be >= 0")
        cutoff = now + margin
        return [inv for inv in self.snapshot() if inv.deadline <= cutoff]

    def stats(self, now: float) -> QueueStats:
        with self._lock:
            head = self.peek_earliest()
            overdue = sum(1 for inv in self._pending.values() if inv.deadline < now)
            return QueueStats(
                pending_count=len(self._pending),
                earliest_deadline=None if head is None else head.deadline,
                overdue_count=overdue,
            )

    def __len__(self) -> int:
        with self._lock:
            return len(self._pending)

    # -- maintenance ---------------------------------------------------------

    def _maybe_compact(self) -> None:
        if self._dispatched_in_log <= self._compact_ratio * len(self._pending):
            return
        self._seq = 0
        payloads = []
        for inv in self.snapshot():
            self._seq += 1
            payloads.append(
                json.dumps(
                    {"seq": self._seq, "kind": "enqueued", "inv": _inv_to_json(inv)},
                    separators=(",", ":"),
                ).encode("utf-8")
            )
        try:
            self._log.rewrite(payloads)
        except OSError as exc:
            raise StorageFailure(str(exc)) from exc
        self._dispatched_in_log = 0

    def close(self) -> None:
        with self._lock:
            self._log.close()

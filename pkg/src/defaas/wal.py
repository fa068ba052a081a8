"""Append-only record log with per-record checksums and torn-tail recovery.

File format (little-endian):

    [u32 payload length][u32 CRC32 of payload][payload bytes] ...

A record whose bytes run past end-of-file, or whose checksum fails *at the
tail*, is treated as a torn write and dropped on read. A checksum failure
with more data behind it means the file was damaged in place, which readers
must refuse rather than silently skip.
"""

from __future__ import annotations

import os
import struct
import zlib
from typing import List, Sequence, Tuple

_HEADER = struct.Struct("<II")
_MAX_RECORD = 1 << 26  # 64 MiB; anything larger is damage, not data


class CorruptLog(Exception):
    """Interior (non-tail) damage in a record log."""


def scan(path: str) -> Tuple[List[bytes], int, int]:
    """Read every intact record; a torn tail is discarded silently.

    Returns (records, valid_bytes, file_bytes): valid_bytes < file_bytes
    means a torn tail that an appender must truncate before writing more,
    or later records would hide behind the garbage.
    """
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except FileNotFoundError:
        return [], 0, 0

    records: List[bytes] = []
    pos = 0
    size = len(data)
    while pos < size:
        if size - pos < _HEADER.size:
            break  # torn header at tail
        length, crc = _HEADER.unpack_from(data, pos)
        body_start = pos + _HEADER.size
        body_end = body_start + length
        if length > _MAX_RECORD or body_end > size:
            # claimed bytes do not exist: torn tail
            break
        payload = data[body_start:body_end]
        if zlib.crc32(payload) != crc:
            if body_end == size:
                break  # torn tail: header landed, body did not
            raise CorruptLog(f"{path}: checksum mismatch at offset {pos} with data after it")
        records.append(payload)
        pos = body_end
    return records, pos, size


def read_records(path: str) -> List[bytes]:
    return scan(path)[0]


class RecordLog:
    """Appender for the log format above. Not thread-safe by itself;
    callers serialize access. `truncate_to` chops a torn tail so appends
    continue from the last intact record."""

    def __init__(self, path: str, fsync: bool = True, truncate_to: int = -1) -> None:
        self.path = path
        self._fsync = fsync
        if truncate_to >= 0 and os.path.exists(path) and os.path.getsize(path) > truncate_to:
            with open(path, "r+b") as fh:
                fh.truncate(truncate_to)
                fh.flush()
                if fsync:
                    os.fsync(fh.fileno())
        self._fh = open(path, "ab")

    def append(self, payload: bytes) -> None:
        frame = _HEADER.pack(len(payload), zlib.crc32(payload)) + payload
        self._fh.write(frame)
        self._fh.flush()
        if self._fsync:
            os.fsync(self._fh.fileno())

    def rewrite(self, payloads: Sequence[bytes]) -> None:
        """Atomically replace the log contents (compaction)."""
        tmp = self.path + ".tmp"
        with open(tmp, "wb") as fh:
            for payload in payloads:
                fh.write(_HEADER.pack(len(payload), zlib.crc32(payload)) + payload)
            fh.flush()
            if self._fsync:
                os.fsync(fh.fileno())
        self._fh.close()
        os.replace(tmp, self.path)
        if self._fsync:
            dir_fd = os.open(os.path.dirname(os.path.abspath(self.path)) or ".", os.O_RDONLY)
            try:
                os.fsync(dir_fd)
            finally:
                os.close(dir_fd)
        self._fh = open(self.path, "ab")

    def close(self) -> None:
        self._fh.close()

"""Append-only JSON-lines journal with crash-tolerant reading."""

from __future__ import annotations

import json
import os

from .errors import JournalError, StorageError


class Journal:
    """One JSON object per line; each append is flushed and fsynced.

    A final line without its newline (or that fails to parse) is treated as
    a torn write and dropped on read. A bad line anywhere else is corruption.
    """

    def __init__(self, path):
        self.path = os.fspath(path)

    def exists(self):
        return os.path.exists(self.path)

    def append(self, obj: dict) -> None:
        line = json.dumps(obj, separators=(",", ":")) + "\n"
        try:
            d = os.path.dirname(self.path)
            if d:
                os.makedirs(d, exist_ok=True)
            self._heal_torn_tail()
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(line)
                fh.flush()
                os.fsync(fh.fileno())
        except OSError as exc:
            raise StorageError(f"cannot append to journal {self.path}: {exc}") from exc

    def _heal_torn_tail(self):
        # Appending after a torn line would glue two records together or
        # leave garbage mid-file, so cut the tail back to the last good line.
        if not os.path.exists(self.path) or os.path.getsize(self.path) == 0:
            return
        with open(self.path, "rb+") as fh:
            data = fh.read()
            body = data[:-1] if data.endswith(b"\n") else data
            start = body.rfind(b"\n") + 1
            if data.endswith(b"\n") and _parses(body[start:]):
                return
            fh.seek(start)
            fh.truncate()

    def read(self) -> list[dict]:
        if not self.exists():
            return []
        try:
            with open(self.path, "rb") as fh:
                data = fh.read()
        except OSError as exc:
            raise StorageError(f"cannot read journal {self.path}: {exc}") from exc
        lines = data.split(b"\n")
        complete, tail = lines[:-1], lines[-1]
        records = []
        for i, raw in enumerate(complete):
            if not raw.strip():
                continue
            try:
                obj = _load(raw)
            except ValueError as exc:
                if i == len(complete) - 1 and not tail:
                    # Last line fully written but unparsable: torn record.
                    break
                raise JournalError(
                    f"journal {self.path} corrupt at line {i + 1}: {exc}; "
                    f"{len(records)} records before it are valid",
                    valid_records=records,
                    line_number=i + 1,
                ) from exc
            records.append(obj)
        return records

    def reset(self):
        try:
            if self.exists():
                os.remove(self.path)
        except OSError as exc:
            raise StorageError(f"cannot remove journal {self.path}: {exc}") from exc


def _load(raw):
    obj = json.loads(raw)
    if not isinstance(obj, dict):
        raise ValueError("not an object")
    return obj


def _parses(raw):
    if not raw.strip():
        return True
    try:
        _load(raw)
    except ValueError:
        return False
    return True

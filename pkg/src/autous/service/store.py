"""Embedded persistent case store.

One directory, no database server.  Every case is an append-only log of JSON
records ``{"revision": n, "payload": {...}}``; the live state is the last
complete line.  Writers must present the revision they read (compare-and-set),
so lost updates are impossible and stale writers get a conflict instead of
silently clobbering.  Long logs are compacted to a single-record file via
write-temp-then-rename, which is also how a torn append is survived: a partial
trailing line (no newline) is ignored on read.
"""

from __future__ import annotations

import json
import os
import threading
import time
from pathlib import Path

from ..exceptions import StoreConflictError, ValidationError

# Crockford base32, as used by ULID text encoding.
_ALPHABET = "0123456789ABCDEFGHJKMNPQRSTVWXYZ"

_ulid_lock = threading.Lock()
_ulid_last: tuple[int, int] | None = None  # (timestamp_ms, entropy)


def new_case_id() -> str:
    """ULID-style id: 48-bit ms timestamp + 80 random bits, base32, sortable.

    Within one process, ids generated in the same millisecond reuse the last
    entropy plus one, so creation order and lexicographic order agree.
    """
    global _ulid_last
    with _ulid_lock:
        now_ms = int(time.time() * 1000)
        entropy = int.from_bytes(os.urandom(10), "big")
        if _ulid_last is not None and _ulid_last[0] >= now_ms:
            now_ms = _ulid_last[0]
            entropy = (_ulid_last[1] + 1) % (1 << 80)
        _ulid_last = (now_ms, entropy)
    value = (now_ms << 80) | entropy
    chars = []
    for _ in range(26):
        chars.append(_ALPHABET[value & 0x1F])
        value >>= 5
    return "".join(reversed(chars))


class CaseStore:
    """Durable per-case record log with conditional (revision-checked) writes."""

    def __init__(self, root: str | Path, compact_after: int = 64):
        self.root = Path(root)
        self.cases_dir = self.root / "cases"
        self.blobs_dir = self.root / "blobs"
        self.cases_dir.mkdir(parents=True, exist_ok=True)
        self.blobs_dir.mkdir(parents=True, exist_ok=True)
        if compact_after < 1:
            raise ValidationError("compact_after must be >= 1")
        self.compact_after = compact_after
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def _lock_for(self, case_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(case_id, threading.Lock())

    def _log_path(self, case_id: str) -> Path:
        if not case_id or "/" in case_id or case_id.startswith("."):
            raise ValidationError(f"bad case id {case_id!r}")
        return self.cases_dir / f"{case_id}.log"

    def _read_records(self, case_id: str) -> list[dict]:
        path = self._log_path(case_id)
        if not path.exists():
            raise KeyError(case_id)
        records = []
        with open(path, "rb") as fh:
            data = fh.read()
        for line in data.split(b"\n")[:-1]:  # trailing partial line is ignored
            if line.strip():
                records.append(json.loads(line.decode("utf-8")))
        if not records:
            raise KeyError(case_id)
        return records

    def _append(self, case_id: str, record: dict) -> None:
        line = json.dumps(record, ensure_ascii=False) + "\n"
        with open(self._log_path(case_id), "ab") as fh:
            fh.write(line.encode("utf-8"))
            fh.flush()
            os.fsync(fh.fileno())

    def _compact(self, case_id: str, record: dict) -> None:
        path = self._log_path(case_id)
        tmp = path.with_suffix(".tmp")
        with open(tmp, "wb") as fh:
            fh.write((json.dumps(record, ensure_ascii=False) + "\n").encode("utf-8"))
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)

    def create(self, payload: dict, case_id: str | None = None) -> tuple[str, int]:
        case_id = case_id or new_case_id()
        with self._lock_for(case_id):
            if self._log_path(case_id).exists():
                raise StoreConflictError(f"case {case_id} already exists")
            self._append(case_id, {"revision": 1, "payload": payload})
        return case_id, 1

    def get(self, case_id: str) -> tuple[dict, int]:
        with self._lock_for(case_id):
            record = self._read_records(case_id)[-1]
        return record["payload"], record["revision"]

    def put(self, case_id: str, payload: dict, expected_revision: int) -> int:
        """Write iff the case is still at ``expected_revision``."""
        with self._lock_for(case_id):
            records = self._read_records(case_id)
            current = records[-1]["revision"]
            if current != expected_revision:
                raise StoreConflictError(
                    f"case {case_id}: revision {expected_revision} is stale "
                    f"(current {current})"
                )
            record = {"revision": current + 1, "payload": payload}
            if len(records) + 1 >= self.compact_after:
                self._compact(case_id, record)
            else:
                self._append(case_id, record)
            return record["revision"]

    def list_ids(self) -> list[str]:
        return sorted(p.stem for p in self.cases_dir.glob("*.log"))

    def load_all(self) -> list[tuple[str, dict, int]]:
        out = []
        for case_id in self.list_ids():
            payload, revision = self.get(case_id)
            out.append((case_id, payload, revision))
        return out

    def save_blob(self, case_id: str, data: bytes, suffix: str) -> str:
        if not suffix.startswith("."):
            suffix = "." + suffix
        safe = "".join(c for c in suffix if c.isalnum() or c == ".")
        path = self.blobs_dir / f"{case_id}{safe}"
        tmp = path.with_suffix(path.suffix + ".tmp")
        with open(tmp, "wb") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
        return str(path)

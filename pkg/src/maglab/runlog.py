"""Append-only JSON-lines run log plus run-payload serialization.

Every state change in the service produces one log entry before the
response goes out. Entries carry a strictly increasing sequence number;
recovery after a crash ignores a truncated final line and continues the
sequence from the last intact entry. A write failure flips the log into
read-only mode, which the service reports on every subsequent response
instead of silently dropping records.
"""

from __future__ import annotations

import datetime as _dt
import json
import os
import threading
from pathlib import Path

import numpy as np

from maglab.errors import MaglabError
from maglab.magnetics import StagePosition
from maglab.virtlab import TRACE_HEADER, RunRecord

ENTRY_KEYS = ("seq", "iso8601_utc", "kind", "position", "seed", "payload_path")


class RunLogError(MaglabError):
    """The run log cannot accept writes (disk failure, closed log)."""


def _utc_now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")


def _sanitize(value):
    """Make run metadata JSON-serializable without losing numeric precision."""
    if isinstance(value, StagePosition):
        return [value.x, value.y, value.z]
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, dict):
        return {k: _sanitize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_sanitize(v) for v in value]
    return value


class RunLog:
    """One append-only JSONL file; safe to share between threads."""

    def __init__(self, path: str | os.PathLike, fsync: bool = False) -> None:
        self.path = Path(path)
        self.fsync = fsync
        self.read_only = False
        self.error: str | None = None
        self._lock = threading.Lock()
        self.path.parent.mkdir(parents=True, exist_ok=True)
        last = 0
        if self.path.exists():
            last = self._recover()
        self._next_seq = last + 1
        self._fh = open(self.path, "a", encoding="utf-8", newline="\n")

    def _recover(self) -> int:
        """Drop a truncated final line so appends start on a clean boundary.

        Returns the last intact sequence number. A bad line followed by more
        intact entries is real corruption, not a truncated tail, and raises
        rather than destroying data.
        """
        raw = self.path.read_bytes()
        pos = 0
        last = 0
        while True:
            nl = raw.find(b"\n", pos)
            if nl == -1:
                break
            try:
                last = int(json.loads(raw[pos:nl])["seq"])
            except (json.JSONDecodeError, KeyError, TypeError, ValueError):
                break
            pos = nl + 1
        if pos != len(raw):
            for tail_line in raw[pos:].split(b"\n")[1:]:
                try:
                    json.loads(tail_line)
                except json.JSONDecodeError:
                    continue
                raise RunLogError(
                    f"corrupt entry mid-log in {self.path}; refusing to truncate"
                )
            with open(self.path, "r+b") as fh:
                fh.truncate(pos)
        return last

    @property
    def next_seq(self) -> int:
        return self._next_seq

    def append(
        self,
        kind: str,
        position: StagePosition | tuple | list | None = None,
        seed: str | None = None,
        payload_path: str | None = None,
    ) -> int:
        """Write one entry; returns its sequence number."""
        first, _ = self.append_batch([(kind, position, seed, payload_path)])
        return first

    def append_batch(self, items) -> tuple[int, int]:
        """Write several entries atomically (no interleaving between them).

        items: iterable of (kind, position, seed, payload_path). Returns
        (first_seq, last_seq).
        """
        with self._lock:
            if self.read_only:
                raise RunLogError(f"run log is read-only: {self.error}")
            first = self._next_seq
            lines = []
            seq = first
            for kind, position, seed, payload_path in items:
                entry = {
                    "seq": seq,
                    "iso8601_utc": _utc_now(),
                    "kind": str(kind),
                    "position": _sanitize(position),
                    "seed": seed,
                    "payload_path": None if payload_path is None else str(payload_path),
                }
                lines.append(json.dumps(entry, separators=(",", ":")))
                seq += 1
            if not lines:
                return (first, first - 1)
            try:
                self._fh.write("\n".join(lines) + "\n")
                self._fh.flush()
                if self.fsync:
                    os.fsync(self._fh.fileno())
            except (OSError, ValueError) as e:
                self.read_only = True
                self.error = str(e)
                raise RunLogError(f"run log write failed: {e}") from e
            self._next_seq = seq
            return (first, seq - 1)

    def close(self) -> None:
        with self._lock:
            try:
                self._fh.close()
            except OSError:
                pass
            self.read_only = True
            self.error = self.error or "log closed"


def read_entries(path: str | os.PathLike) -> list[dict]:
    """Parse a log file; a truncated final line is dropped, not fatal."""
    raw = Path(path).read_bytes()
    if not raw:
        return []
    lines = raw.decode("utf-8", errors="replace").split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    entries: list[dict] = []
    for i, line in enumerate(lines):
        try:
            entries.append(json.loads(line))
        except json.JSONDecodeError:
            if i == len(lines) - 1:
                break
            raise RunLogError(f"corrupt log entry at line {i + 1} of {path}")
    return entries


# -- run payload files -------------------------------------------------------


def record_to_dict(record: RunRecord, fits: dict | None = None) -> dict:
    """Full-precision JSON form of one run, with optional fit summaries."""
    d = {
        "kind": record.kind,
        "sweep_values": list(record.sweep_values),
        "counts": list(record.counts),
        "shots": record.shots,
        "position": [record.position.x, record.position.y, record.position.z],
        "rng_seed": record.rng_seed,
        "timestamp": record.timestamp,
        "meta": _sanitize(record.meta),
    }
    if fits is not None:
        d["fits"] = _sanitize(fits)
    return d


def record_from_dict(d: dict) -> RunRecord:
    return RunRecord(
        kind=d["kind"],
        sweep_values=tuple(float(v) for v in d["sweep_values"]),
        counts=tuple(int(c) for c in d["counts"]),
        shots=int(d["shots"]),
        position=StagePosition(*d["position"]),
        rng_seed=d.get("rng_seed", ""),
        timestamp=d.get("timestamp", ""),
        meta=d.get("meta", {}),
    )


def write_payload(output_dir: str | os.PathLike, run_id: str, payload: dict) -> str:
    """Persist one run payload under {output_dir}/payloads/{run_id}.json."""
    p = Path(output_dir) / "payloads" / f"{run_id}.json"
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(json.dumps(payload, indent=1), encoding="utf-8")
    return str(p)


def load_payload(output_dir: str | os.PathLike, run_id: str) -> dict:
    p = Path(output_dir) / "payloads" / f"{run_id}.json"
    if not p.exists():
        raise FileNotFoundError(f"unknown run id {run_id!r} (no {p})")
    return json.loads(p.read_text(encoding="utf-8"))


def export_trace_csv(payload: dict, out_path: str | os.PathLike) -> str:
    """Write one trace as CSV: sweep_value,counts,shots,p_blockade."""
    shots = int(payload["shots"])
    rows = [",".join(TRACE_HEADER)]
    for v, c in zip(payload["sweep_values"], payload["counts"]):
        rows.append(f"{repr(float(v))},{int(c)},{shots},{repr(int(c) / shots)}")
    out = Path(out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text("\n".join(rows) + "\n", encoding="utf-8", newline="\n")
    return str(out)


def import_trace_csv(path: str | os.PathLike) -> dict:
    """Inverse of export_trace_csv, for round-trip checks."""
    lines = Path(path).read_text(encoding="utf-8").strip().split("\n")
    if lines[0] != ",".join(TRACE_HEADER):
        raise ValueError(f"unexpected trace header {lines[0]!r}")
    sweep, counts, shots = [], [], 0
    for line in lines[1:]:
        v, c, s, _ = line.split(",")
        sweep.append(float(v))
        counts.append(int(c))
        shots = int(s)
    return {"sweep_values": sweep, "counts": counts, "shots": shots}

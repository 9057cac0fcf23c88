"""Embedded persistence: append-only journal + snapshot, and the manifesting
engine that expands nested collections on demand.

Tables live in memory as plain dicts. Every mutation is journaled (length-
prefixed record with a CRC) and fsync'd before it is acknowledged; reopening
replays the snapshot plus the journal and drops any torn tail. Nested
collections in query results are either populated (requested via dot-paths)
or absent entirely — absent and empty are distinguishable.

File layout is documented in docs/storage-format.md.
"""

from __future__ import annotations

import copy
import json
import os
import struct
import threading
import zlib
from dataclasses import dataclass, field
from pathlib import Path

from .errors import (
    CursorExhausted,
    StorageFailure,
    UnknownEntityType,
    UnknownExpansionPath,
)

MAGIC_LOG = b"HVL1"
MAGIC_SNAP = b"HVS1"
TAG_SAVE = 1
TAG_DELETE = 2
TAG_SEQ = 3

MAX_EXPAND_DEPTH = 4

# Embedded collections are stored inside the parent document and projected
# out unless requested; joined collections are computed from bridge rows.
EMBEDDED: dict[str, dict] = {
    "machine": {"motors": {"commands": {"arguments": {}}}, "sensors": {}},
}
JOINED: dict[str, tuple[str, ...]] = {
    "concept": ("attributes", "actions", "anns"),
}
KINDS = ("concept", "mapping", "ann", "machine", "binding",
         "efficacy", "task", "assignment")


def _embedded_paths(tree: dict, prefix: str = "") -> set[str]:
    out = set()
    for key, sub in tree.items():
        path = f"{prefix}{key}"
        out.add(path)
        out.update(_embedded_paths(sub, path + "."))
    return out


def expansion_vocabulary(kind: str) -> set[str]:
    vocab = _embedded_paths(EMBEDDED.get(kind, {}))
    vocab.update(JOINED.get(kind, ()))
    return vocab


def validate_paths(kind: str, paths) -> set[str]:
    """Checks paths against the kind's vocabulary and closes over prefixes
    (requesting motors.commands implies motors)."""
    if kind not in KINDS:
        raise UnknownEntityType(f"unknown entity type {kind!r}")
    vocab = expansion_vocabulary(kind)
    result: set[str] = set()
    for path in paths:
        if not path or path not in vocab:
            raise UnknownExpansionPath(f"unknown expansion path {path!r} for {kind}")
        if path.count(".") + 1 > MAX_EXPAND_DEPTH:
            raise UnknownExpansionPath(f"expansion path {path!r} too deep")
        segs = path.split(".")
        for i in range(1, len(segs) + 1):
            result.add(".".join(segs[:i]))
    return result


@dataclass
class QueryResult:
    mode: str
    rows: list
    populated_paths: set


@dataclass
class Cursor:
    kind: str
    chunk_size: int
    pending: list = field(default_factory=list)
    exhausted: bool = False


class Store:
    def __init__(self, path: str | os.PathLike | None = None, fsync: bool = True):
        self.path = Path(path) if path is not None else None
        self.fsync = fsync
        self.tables: dict[str, dict[int, dict]] = {k: {} for k in KINDS}
        self._seq = 0
        self._lock = threading.RLock()
        self._log_fd = None
        if self.path is not None:
            self.path.mkdir(parents=True, exist_ok=True)
            self._recover()
            if not self.log_path.exists() or self.log_path.stat().st_size == 0:
                self.log_path.write_bytes(MAGIC_LOG)
            self._log_fd = os.open(self.log_path, os.O_WRONLY | os.O_CREAT | os.O_APPEND)

    # ---- files ----------------------------------------------------------

    @property
    def log_path(self) -> Path:
        return self.path / "hivemind.log"

    @property
    def snap_path(self) -> Path:
        return self.path / "hivemind.snap"

    def close(self):
        if self._log_fd is not None:
            os.close(self._log_fd)
            self._log_fd = None

    def _recover(self):
        if self.snap_path.exists():
            raw = self.snap_path.read_bytes()
            if raw[:4] != MAGIC_SNAP:
                raise StorageFailure("bad snapshot magic")
            body, crc = raw[4:-4], struct.unpack("<I", raw[-4:])[0]
            if zlib.crc32(body) != crc:
                raise StorageFailure("snapshot CRC mismatch")
            state = json.loads(body)
            self._seq = state["seq"]
            for kind in KINDS:
                self.tables[kind] = {int(k): v for k, v in state["tables"].get(kind, {}).items()}
        if not self.log_path.exists():
            return
        raw = self.log_path.read_bytes()
        good = 0
        if raw[:4] == MAGIC_LOG:
            pos = 4
            while pos + 4 <= len(raw):
                (length,) = struct.unpack_from("<I", raw, pos)
                end = pos + 4 + length
                if length < 5 or end > len(raw):
                    break
                rec = raw[pos + 4:end]
                body, crc = rec[:-4], struct.unpack("<I", rec[-4:])[0]
                if zlib.crc32(body) != crc:
                    break
                self._apply_record(body[0], json.loads(body[1:]))
                pos = end
                good = pos
        # drop any torn tail so appends continue from the last good record
        if good < len(raw):
            with open(self.log_path, "r+b" if raw[:4] == MAGIC_LOG else "wb") as fh:
                if raw[:4] == MAGIC_LOG:
                    fh.truncate(good)
                else:
                    fh.write(MAGIC_LOG)
        elif good == 0 and not raw:
            self.log_path.write_bytes(MAGIC_LOG)

    def _apply_record(self, tag: int, payload: dict):
        if tag == TAG_SAVE:
            doc = payload["doc"]
            self.tables[payload["kind"]][doc["id"]] = doc
            self._seq = max(self._seq, doc["id"])
        elif tag == TAG_DELETE:
            self.tables[payload["kind"]].pop(payload["id"], None)
        elif tag == TAG_SEQ:
            self._seq = max(self._seq, payload["seq"])

    def _append(self, tag: int, payload: dict):
        if self._log_fd is None:
            return
        body = bytes([tag]) + json.dumps(payload, separators=(",", ":")).encode()
        rec = body + struct.pack("<I", zlib.crc32(body))
        os.write(self._log_fd, struct.pack("<I", len(rec)) + rec)
        if self.fsync:
            os.fsync(self._log_fd)

    def compact(self):
        """Write a snapshot of the current state and truncate the journal."""
        with self._lock:
            state = {"seq": self._seq, "tables": self.tables}
            body = json.dumps(state, separators=(",", ":")).encode()
            tmp = self.snap_path.with_suffix(".snap.tmp")
            tmp.write_bytes(MAGIC_SNAP + body + struct.pack("<I", zlib.crc32(body)))
            os.replace(tmp, self.snap_path)
            if self._log_fd is not None:
                os.close(self._log_fd)
                self.log_path.write_bytes(MAGIC_LOG)
                self._log_fd = os.open(self.log_path, os.O_WRONLY | os.O_CREAT | os.O_APPEND)

    # ---- mutations ------------------------------------------------------

    def allocate_id(self) -> int:
        with self._lock:
            self._seq += 1
            self._append(TAG_SEQ, {"seq": self._seq})
            return self._seq

    def save(self, kind: str, doc: dict) -> int:
        if kind not in KINDS:
            raise UnknownEntityType(f"unknown entity type {kind!r}")
        with self._lock:
            doc = copy.deepcopy(doc)
            if doc.get("id") is None:
                self._seq += 1
                doc["id"] = self._seq
            self._append(TAG_SAVE, {"kind": kind, "doc": doc})
            self.tables[kind][doc["id"]] = doc
            return doc["id"]

    def delete(self, kind: str, entity_id: int) -> bool:
        if kind not in KINDS:
            raise UnknownEntityType(f"unknown entity type {kind!r}")
        with self._lock:
            if entity_id not in self.tables[kind]:
                return False
            self._append(TAG_DELETE, {"kind": kind, "id": entity_id})
            del self.tables[kind][entity_id]
            return True

    # ---- reads ----------------------------------------------------------

    def get(self, kind: str, entity_id: int, expand=()) -> dict | None:
        paths = validate_paths(kind, expand)
        with self._lock:
            doc = self.tables[kind].get(entity_id)
            if doc is None:
                return None
            return self._materialize(kind, doc, paths)

    def _match(self, doc: dict, filter) -> bool:
        if filter is None:
            return True
        if callable(filter):
            return filter(doc)
        return all(doc.get(k) == v for k, v in filter.items())

    def _select_ids(self, kind: str, filter) -> list[int]:
        if kind not in KINDS:
            raise UnknownEntityType(f"unknown entity type {kind!r}")
        table = self.tables[kind]
        return [i for i in sorted(table) if self._match(table[i], filter)]

    def load_bulk(self, kind: str, filter=None, expand=()) -> QueryResult:
        paths = validate_paths(kind, expand)
        with self._lock:
            ids = self._select_ids(kind, filter)
            rows = [self._materialize(kind, self.tables[kind][i], paths) for i in ids]
        return QueryResult(mode="bulk", rows=rows, populated_paths=paths)

    def open_stream(self, kind: str, filter=None, chunk_size: int = 100) -> Cursor:
        if chunk_size < 1:
            raise StorageFailure("chunk_size must be >= 1")
        with self._lock:
            ids = self._select_ids(kind, filter)
        return Cursor(kind=kind, chunk_size=chunk_size, pending=ids)

    def manifest_chunk(self, cursor: Cursor, expand=()) -> list[dict]:
        paths = validate_paths(cursor.kind, expand)
        if cursor.exhausted:
            raise CursorExhausted("cursor already exhausted")
        take, cursor.pending = cursor.pending[:cursor.chunk_size], cursor.pending[cursor.chunk_size:]
        if len(take) < cursor.chunk_size or not cursor.pending:
            cursor.exhausted = True
        with self._lock:
            table = self.tables[cursor.kind]
            return [self._materialize(cursor.kind, table[i], paths)
                    for i in take if i in table]

    # ---- manifesting ----------------------------------------------------

    _DEEP_KINDS = ("machine", "binding", "task")

    def _materialize(self, kind: str, doc: dict, paths: set[str]) -> dict:
        if kind in self._DEEP_KINDS:
            out = copy.deepcopy(doc)
        else:
            # flat documents: one-level copy keeps reads cheap
            out = {k: (v.copy() if isinstance(v, (list, dict)) else v)
                   for k, v in doc.items()}
        tree = EMBEDDED.get(kind, {})
        self._project(out, tree, paths, "")
        for join in JOINED.get(kind, ()):
            if join in paths:
                out[join] = self._resolve_join(kind, doc, join)
        return out

    def _project(self, node: dict, tree: dict, paths: set[str], prefix: str):
        for key, sub in tree.items():
            path = f"{prefix}{key}"
            if path not in paths:
                node.pop(key, None)
            else:
                for child in node.get(key, []):
                    self._project(child, sub, paths, path + ".")

    def _resolve_join(self, kind: str, doc: dict, join: str) -> list[dict]:
        # concept joins: attribute/action mappings resolve to concepts,
        # ann mappings resolve to packed network packages
        mapping_kind = {"attributes": "attribute", "actions": "action", "anns": "ann"}[join]
        rows = []
        for mid in sorted(self.tables["mapping"]):
            m = self.tables["mapping"][mid]
            if m["source_id"] != doc["id"] or m["kind"] != mapping_kind:
                continue
            entry = {"target_id": m["target_id"], "mean": m["mean"], "std": m["std"]}
            target_table = "ann" if mapping_kind == "ann" else "concept"
            target = self.tables[target_table].get(m["target_id"])
            if target is not None:
                entry["target_name"] = target.get("name")
            rows.append(entry)
        rows.sort(key=lambda e: e["target_id"])
        return rows

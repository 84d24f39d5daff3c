"""Key-value storage of per-function data-flow graphs.

On disk a repository is a directory with two files:

``index``
    JSON text: format version, project fingerprint, per-file digests, and
    one entry per function (id, record offset/length, line span).
``records``
    Concatenated records, each an 8-byte little-endian header
    ``(payload_length: u32, crc32: u32)`` followed by a UTF-8 JSON payload
    ``{"metadata": ..., "dfg": ...}``.

See ``docs/repository-format.md`` for the full field list.
"""
from __future__ import annotations

import hashlib
import json
import logging
import os
import struct
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .dfg import BuildContext, FunctionDfg, build_dfg, check_slots, prune_dfg
from .parser import (
    MAIN, FunctionId, FunctionMetadata, ParseError, ScanConfig, SourceFile,
    normalize_path, parse_file, project_fingerprint, scan_project,
)

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
HEADER = struct.Struct("<II")
INDEX_FILE = "index"
RECORDS_FILE = "records"


class RepositoryError(Exception):
    pass


class DuplicateFunction(RepositoryError):
    pass


class NotFound(RepositoryError, LookupError):
    pass


class StaleRepository(RepositoryError):
    pass


class CorruptRecord(RepositoryError):
    pass


@dataclass(frozen=True)
class RecordHandle:
    offset: int
    length: int


@dataclass
class BuildReport:
    files: list[str] = field(default_factory=list)
    parse_failures: list[tuple[str, str]] = field(default_factory=list)
    diagnostics: list[str] = field(default_factory=list)
    reused: list[str] = field(default_factory=list)
    functions: int = 0

    def to_dict(self) -> dict:
        return {
            "files": self.files,
            "parse_failures": [list(p) for p in self.parse_failures],
            "diagnostics": self.diagnostics,
            "reused": self.reused,
            "functions": self.functions,
        }


def _encode(g: FunctionDfg, meta: FunctionMetadata | None) -> bytes:
    payload = {"dfg": g.to_dict(), "metadata": meta.to_dict() if meta is not None else None}
    return json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")


class DfgRepository:
    """Graphs keyed by FunctionId, plus a (path, line) -> function index."""

    def __init__(self):
        self._records = bytearray()
        self.by_id: dict[FunctionId, RecordHandle] = {}
        self.spans: dict[str, list[tuple[int, int, FunctionId]]] = {}
        self.files: dict[str, str] = {}
        self.project_fingerprint = ""
        self.context_digest = ""
        self.parse_failures: list[tuple[str, str]] = []
        self.version = FORMAT_VERSION
        self._decoded: dict[FunctionId, tuple[FunctionMetadata | None, FunctionDfg]] = {}

    def __len__(self):
        return len(self.by_id)

    def __contains__(self, fid):
        return fid in self.by_id

    # -- writing

    def put(self, g: FunctionDfg, metadata: FunctionMetadata | None = None) -> RecordHandle:
        if g.id in self.by_id:
            raise DuplicateFunction(f"function {g.id} is already stored")
        return self._append(g.id, _encode(g, metadata), self._span(g, metadata))

    def _span(self, g, meta):
        if meta is not None:
            return (meta.id.start_line, meta.end_line or meta.id.start_line)
        lines = [n.line for n in g.nodes.values()] + [n.end_line or n.line for n in g.nodes.values()]
        return (g.id.start_line, max(lines + [g.id.start_line]))

    def _append(self, fid: FunctionId, payload: bytes, span) -> RecordHandle:
        offset = len(self._records)
        self._records += HEADER.pack(len(payload), zlib.crc32(payload)) + payload
        handle = RecordHandle(offset, HEADER.size + len(payload))
        self.by_id[fid] = handle
        self.spans.setdefault(fid.path, []).append((span[0], span[1], fid))
        return handle

    # -- reading

    def raw_record(self, fid: FunctionId) -> bytes:
        try:
            h = self.by_id[fid]
        except KeyError:
            raise NotFound(f"no graph stored for {fid}") from None
        try:
            length, crc = HEADER.unpack_from(self._records, h.offset)
        except struct.error:
            raise CorruptRecord(f"record for {fid} is truncated") from None
        payload = bytes(self._records[h.offset + HEADER.size:h.offset + HEADER.size + length])
        if zlib.crc32(payload) != crc or HEADER.size + length != h.length:
            raise CorruptRecord(f"record for {fid} fails its checksum")
        return payload

    def _load(self, fid):
        hit = self._decoded.get(fid)
        if hit is None:
            d = json.loads(self.raw_record(fid))
            meta = FunctionMetadata.from_dict(d["metadata"]) if d["metadata"] is not None else None
            hit = (meta, FunctionDfg.from_dict(d["dfg"]))
            self._decoded[fid] = hit
        return hit

    def get(self, fid: FunctionId) -> FunctionDfg:
        return self._load(fid)[1]

    def metadata(self, fid: FunctionId) -> FunctionMetadata | None:
        return self._load(fid)[0]

    def function_ids(self) -> list[FunctionId]:
        return sorted(self.by_id)

    def paths(self) -> list[str]:
        return sorted(self.spans)

    def functions_in(self, path: str) -> list[FunctionId]:
        return sorted(fid for _, _, fid in self.spans.get(path, []))

    def resolve_location(self, path: str, line: int) -> FunctionId:
        """Innermost function whose span contains ``line``; the module unit otherwise."""
        try:
            path = normalize_path(path)
        except ValueError:
            raise NotFound(f"path {path!r} is outside the project") from None
        spans = self.spans.get(path)
        if not spans:
            raise NotFound(f"no functions recorded for {path!r}")
        best = None
        for start, end, fid in spans:
            if fid.qualified_name == MAIN:
                continue
            if start <= line <= end:
                key = (end - start, -start)
                if best is None or key < best[0]:
                    best = (key, fid)
        if best is not None:
            return best[1]
        for _, _, fid in spans:
            if fid.qualified_name == MAIN:
                return fid
        raise NotFound(f"no module unit recorded for {path!r}")

    # -- persistence

    def index_dict(self) -> dict:
        return {
            "format_version": self.version,
            "project_fingerprint": self.project_fingerprint,
            "context_digest": self.context_digest,
            "files": dict(sorted(self.files.items())),
            "parse_failures": [list(p) for p in self.parse_failures],
            "functions": [
                {"id": str(fid), "offset": h.offset, "length": h.length,
                 "path": fid.path, "start": s, "end": e}
                for fid, h, s, e in self._entries()
            ],
        }

    def _entries(self):
        spans = {fid: (s, e) for items in self.spans.values() for s, e, fid in items}
        for fid, h in sorted(self.by_id.items(), key=lambda kv: kv[1].offset):
            yield fid, h, spans[fid][0], spans[fid][1]

    def save(self, directory: str | os.PathLike) -> None:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        tmp_rec = d / (RECORDS_FILE + ".tmp")
        tmp_idx = d / (INDEX_FILE + ".tmp")
        tmp_rec.write_bytes(bytes(self._records))
        tmp_idx.write_text(json.dumps(self.index_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        os.replace(tmp_rec, d / RECORDS_FILE)
        os.replace(tmp_idx, d / INDEX_FILE)

    @classmethod
    def load(cls, directory: str | os.PathLike) -> DfgRepository:
        d = Path(directory)
        try:
            index = json.loads((d / INDEX_FILE).read_text(encoding="utf-8"))
            records = (d / RECORDS_FILE).read_bytes()
        except FileNotFoundError:
            raise NotFound(f"no repository at {directory}") from None
        if index.get("format_version") != FORMAT_VERSION:
            raise RepositoryError(f"unsupported repository format {index.get('format_version')!r}")
        repo = cls()
        repo._records = bytearray(records)
        repo.project_fingerprint = index["project_fingerprint"]
        repo.context_digest = index.get("context_digest", "")
        repo.files = dict(index["files"])
        repo.parse_failures = [tuple(p) for p in index.get("parse_failures", [])]
        for entry in index["functions"]:
            fid = FunctionId.parse(entry["id"])
            repo.by_id[fid] = RecordHandle(entry["offset"], entry["length"])
            repo.spans.setdefault(fid.path, []).append((entry["start"], entry["end"], fid))
        return repo

    @classmethod
    def open(cls, directory, root=None, scan_config: ScanConfig | None = None) -> DfgRepository:
        """Load a repository, failing with StaleRepository if ``root`` no longer matches it."""
        repo = cls.load(directory)
        if root is not None:
            fresh = project_fingerprint(scan_project(root, scan_config))
            if fresh != repo.project_fingerprint:
                raise StaleRepository(
                    f"repository {directory} was built from different sources "
                    f"(fingerprint {repo.project_fingerprint[:12]} != {fresh[:12]}); rebuild it")
        return repo


def context_for(units, scan_config: ScanConfig, paths) -> tuple[BuildContext, str]:
    methods = frozenset(u.id.qualified_name.rsplit(".", 1)[-1] for u in units if u.metadata.class_name)
    ctx = BuildContext(tuple(scan_config.logger_names), tuple(scan_config.source_readers), methods)
    blob = json.dumps([list(ctx.logger_names), list(ctx.source_readers), sorted(methods), sorted(paths)])
    return ctx, hashlib.sha256(blob.encode()).hexdigest()


def build_repository(root, scan_config: ScanConfig | None = None, previous: DfgRepository | None = None,
                     workers: int = 1) -> tuple[DfgRepository, BuildReport]:
    """Scan, parse, build, prune, and store every function of a project."""
    scan_config = scan_config or ScanConfig()
    report = BuildReport()
    files = scan_project(root, scan_config, report.diagnostics)
    paths = frozenset(f.path for f in files)
    report.files = [f.path for f in files]

    def parse_one(f: SourceFile):
        try:
            return f, parse_file(f, paths), None
        except ParseError as exc:
            return f, None, exc

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parsed = list(pool.map(parse_one, files))
    else:
        parsed = [parse_one(f) for f in files]
    all_units = [u for _, units, _ in parsed if units for u in units]
    ctx, ctx_digest = context_for(all_units, scan_config, paths)

    repo = DfgRepository()
    repo.project_fingerprint = project_fingerprint(files)
    repo.context_digest = ctx_digest
    seen: set[FunctionId] = set()
    for f, units, err in parsed:
        repo.files[f.path] = f.digest
        if err is not None:
            report.parse_failures.append((f.path, str(err)))
            repo.parse_failures.append((f.path, str(err)))
            logger.warning("parse failure: %s", err)
            continue
        reusable = (previous is not None and previous.files.get(f.path) == f.digest
                    and previous.context_digest == ctx_digest and previous.functions_in(f.path))
        if reusable:
            for fid in previous.functions_in(f.path):
                meta = previous.metadata(fid)
                repo._append(fid, previous.raw_record(fid), (fid.start_line, meta.end_line if meta else fid.start_line))
                seen.add(fid)
            report.reused.append(f.path)
            continue
        for u in units:
            if u.id in seen:
                raise DuplicateFunction(f"function id {u.id} is not unique")
            seen.add(u.id)
            g = prune_dfg(build_dfg(u, ctx))
            check_slots(g)
            report.diagnostics.extend(f"{u.id}: {d}" for d in g.diagnostics)
            repo.put(g, u.metadata)
    report.functions = len(repo)
    return repo, report

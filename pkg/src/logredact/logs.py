"""Parsing augmented log lines and linking them to log statements."""
from __future__ import annotations

import os
import posixpath
import re
from dataclasses import dataclass, field

from .dfg import NodeKind
from .parser import FunctionId, normalize_path
from .repository import DfgRepository, NotFound

DEFAULT_LOG_PATTERN = r"^(?P<level>[A-Z]+)\|(?P<path>[^|]*):(?P<line>\d+)\|(?P<message>.*)$"
REQUIRED_GROUPS = ("level", "path", "line", "message")
LOGGING_FORMAT = "%(levelname)s|%(pathname)s:%(lineno)d|%(message)s"


class LineMismatch(LookupError):
    """The record's function exists but has no log statement on that line."""


class PatternError(ValueError):
    pass


class LogPattern:
    """A compiled record pattern with named groups level, path, line, message."""

    def __init__(self, regex: str = DEFAULT_LOG_PATTERN):
        try:
            self.compiled = re.compile(regex)
        except re.error as exc:
            raise PatternError(f"invalid log pattern: {exc}") from None
        missing = [g for g in REQUIRED_GROUPS if g not in self.compiled.groupindex]
        if missing:
            raise PatternError(f"log pattern lacks named groups: {', '.join(missing)}")
        self.regex = regex

    def __repr__(self):
        return f"LogPattern({self.regex!r})"

    def __eq__(self, other):
        return isinstance(other, LogPattern) and other.regex == self.regex


@dataclass
class LogRecord:
    raw: str
    level: str
    path: str
    line: int
    message: str
    line_no: int
    prefix: str = ""
    suffix: str = ""
    continuation: list[str] = field(default_factory=list)

    @property
    def location(self) -> tuple[str, int]:
        return (self.path, self.line)

    @property
    def full_message(self) -> str:
        return "\n".join([self.message] + self.continuation)

    @property
    def physical_lines(self) -> int:
        return 1 + len(self.continuation)

    def reconstruct(self) -> str:
        return self.prefix + self.message + self.suffix


@dataclass
class Unlinkable:
    raw: str
    line_no: int
    reason: str = "line does not match the log pattern"

    @property
    def physical_lines(self) -> int:
        return 1


@dataclass(frozen=True)
class LogStatementRef:
    function: FunctionId
    node_id: int
    format_string: str | None
    slot_count: int
    format_style: str = "printf"
    line: int = 0


def parse_log_line(line: str, pattern: LogPattern | None = None, line_no: int = 1) -> LogRecord | Unlinkable:
    pattern = pattern or LogPattern()
    if not line.strip():
        return Unlinkable(line, line_no, "blank line")
    m = pattern.compiled.match(line)
    if not m:
        return Unlinkable(line, line_no)
    try:
        lineno = int(m.group("line"))
    except ValueError:
        return Unlinkable(line, line_no, "line field is not an integer")
    start, end = m.span("message")
    return LogRecord(
        raw=line, level=m.group("level"), path=m.group("path"), line=lineno,
        message=m.group("message"), line_no=line_no, prefix=line[:start], suffix=line[end:],
    )


def group_records(lines, pattern: LogPattern | None = None) -> list[LogRecord | Unlinkable]:
    """Parse lines, attaching unprefixed non-blank lines to the preceding record."""
    pattern = pattern or LogPattern()
    out: list[LogRecord | Unlinkable] = []
    for i, line in enumerate(lines, start=1):
        item = parse_log_line(line, pattern, i)
        if (isinstance(item, Unlinkable) and item.reason != "blank line" and out
                and isinstance(out[-1], LogRecord) and not out[-1].suffix):
            out[-1].continuation.append(line)
            out[-1].raw += "\n" + line
            continue
        out.append(item)
    return out


def normalize_log_path(path: str, root: str | os.PathLike | None = None) -> str:
    p = path.replace("\\", "/")
    if posixpath.isabs(p) or re.match(r"^[A-Za-z]:/", p):
        if root is None:
            raise NotFound(f"absolute path {path!r} with no project root to relativize against")
        root_s = os.path.abspath(os.fspath(root)).replace("\\", "/").rstrip("/") + "/"
        if not p.startswith(root_s):
            raise NotFound(f"path {path!r} is outside the project root")
        p = p[len(root_s):]
    try:
        return normalize_path(p)
    except ValueError:
        raise NotFound(f"path {path!r} is outside the project") from None


def resolve_statements(rec: LogRecord, repo: DfgRepository, root=None) -> list[LogStatementRef]:
    """All log statements at the record's location (usually exactly one)."""
    path = normalize_log_path(rec.path, root)
    fid = repo.resolve_location(path, rec.line)
    g = repo.get(fid)
    nodes = g.log_statements_at(rec.line)
    if not nodes:
        raise LineMismatch(f"{path}:{rec.line} is inside {fid} but no log statement is on that line")
    return [
        LogStatementRef(fid, n.node_id, n.format_string, n.slot_count, n.format_style or "opaque", n.line)
        for n in nodes if n.kind == NodeKind.LOG
    ]


def resolve_statement(rec: LogRecord, repo: DfgRepository, root=None) -> LogStatementRef:
    return resolve_statements(rec, repo, root)[0]

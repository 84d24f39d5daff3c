"""End-to-end redaction: link each record, trace its statement, bind, rewrite."""
from __future__ import annotations

import io
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .annotations import RuleKind, load_annotations
from .config import ProjectConfig
from .logs import LineMismatch, LogPattern, LogRecord, Unlinkable, group_records, resolve_statements
from .redactor import (
    UNLINKABLE_TOMBSTONE, BindFailure, NoTemplate, bind_all, derive_template, is_tombstone, redact, rule_for,
    tombstone,
)
from .repository import INDEX_FILE, DfgRepository, NotFound, build_repository
from .tracer import CONSERVATIVE, TraceLimits, Tracer

logger = logging.getLogger(__name__)

FAILURE_KINDS = ("Unlinkable", "NotFound", "LineMismatch", "NoTemplate", "BindFailure")


@dataclass
class RecordReport:
    line_no: int
    physical_lines: int
    action: str  # kept | redacted | dropped | tombstoned | passed | unchanged
    location: str | None = None
    function: str | None = None
    failure: str | None = None
    reason: str = ""
    ambiguous: bool = False
    slots: list[dict] = field(default_factory=list)
    predicted: list[tuple[int, str, str]] = field(default_factory=list)
    provenance: dict | None = None

    @property
    def flagged(self) -> bool:
        return self.failure is not None or self.ambiguous

    def to_dict(self) -> dict:
        d = {
            "line_no": self.line_no, "physical_lines": self.physical_lines, "action": self.action,
            "location": self.location, "function": self.function,
        }
        if self.failure:
            d["failure"] = self.failure
            d["reason"] = self.reason
        if self.ambiguous:
            d["ambiguous"] = True
        if self.slots:
            d["slots"] = self.slots
        if self.provenance is not None:
            d["provenance"] = self.provenance
        return d


@dataclass
class RunReport:
    records: list[RecordReport] = field(default_factory=list)
    input_lines: int = 0
    output_lines: int = 0
    fail_policy: str = "conservative"
    diagnostics: list[str] = field(default_factory=list)
    parse_failures: list[tuple[str, str]] = field(default_factory=list)

    @property
    def tombstones(self) -> int:
        return sum(r.physical_lines for r in self.records if r.action in ("dropped", "tombstoned"))

    @property
    def flagged(self) -> list[RecordReport]:
        return [r for r in self.records if r.flagged]

    @property
    def ambiguities(self) -> list[RecordReport]:
        return [r for r in self.records if r.ambiguous]

    @property
    def exit_code(self) -> int:
        return 2 if self.flagged or self.parse_failures else 0

    def counts(self) -> dict:
        out: dict[str, int] = {}
        for r in self.records:
            out[r.action] = out.get(r.action, 0) + 1
        return dict(sorted(out.items()))

    def to_dict(self) -> dict:
        return {
            "input_lines": self.input_lines,
            "output_lines": self.output_lines,
            "tombstones": self.tombstones,
            "fail_policy": self.fail_policy,
            "actions": self.counts(),
            "flagged": len(self.flagged),
            "ambiguities": len(self.ambiguities),
            "parse_failures": [list(p) for p in self.parse_failures],
            "diagnostics": self.diagnostics,
            "records": [r.to_dict() for r in self.records],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


class LogRedactor:
    """Redacts log lines against one repository and one annotation set."""

    def __init__(self, repo: DfgRepository, specs, root=None, pattern: LogPattern | None = None,
                 fail_policy: str = "conservative", redact_conservative: bool = True,
                 limits: TraceLimits | None = None, digest: str = "sha256", workers: int = 1):
        self.repo = repo
        self.specs = list(specs)
        self.root = root
        self.pattern = pattern or LogPattern()
        self.fail_policy = fail_policy
        self.redact_conservative = redact_conservative
        self.digest = digest
        self.workers = workers
        self.tracer = Tracer(repo, self.specs, limits)

    def _fail(self, item, kind: str, reason: str, report: RecordReport) -> list[str]:
        report.failure = kind
        report.reason = reason
        if self.fail_policy == "permissive":
            report.action = "passed"
            return item.raw.split("\n")
        report.action = "tombstoned"
        if isinstance(item, Unlinkable):
            return [UNLINKABLE_TOMBSTONE]
        return [tombstone(item.path, item.line)] * item.physical_lines

    def process(self, item, explain: bool = False) -> tuple[list[str], RecordReport]:
        report = RecordReport(item.line_no, item.physical_lines, "kept")
        if isinstance(item, Unlinkable):
            if is_tombstone(item.raw):
                report.action = "unchanged"
                return [item.raw], report
            return self._fail(item, "Unlinkable", item.reason, report), report
        report.location = f"{item.path}:{item.line}"
        if is_tombstone(item.raw):
            report.action = "unchanged"
            return item.raw.split("\n"), report
        try:
            stmts = resolve_statements(item, self.repo, self.root)
        except LineMismatch as exc:
            return self._fail(item, "LineMismatch", str(exc), report), report
        except NotFound as exc:
            return self._fail(item, "NotFound", str(exc), report), report
        report.function = str(stmts[0].function)
        bound, last_error = None, None
        for stmt in stmts:
            try:
                tmpl = derive_template(stmt)
                bound = (stmt, bind_all(tmpl, item.full_message))
                break
            except NoTemplate as exc:
                last_error = ("NoTemplate", str(exc))
            except BindFailure as exc:
                last_error = ("BindFailure", str(exc))
        if bound is None:
            return self._fail(item, last_error[0], last_error[1], report), report
        stmt, result = bound
        report.ambiguous = result.ambiguous
        prov = self.tracer.trace(stmt)
        lines, decisions = redact(item, result.bindings, prov, self.specs, self.redact_conservative, self.digest)
        for d in decisions:
            report.slots.append({
                "slot": d.slot, "span": list(d.span), "rule": d.rule.value,
                "attribute": ".".join(d.attribute) if d.attribute else None,
                "findings": [f"{f.source_id}.{f.attribute}:{f.confidence}" for f in d.findings],
            })
            for f in d.findings:
                if f.confidence == CONSERVATIVE and not self.redact_conservative:
                    continue
                if rule_for(f, self.specs).kind != RuleKind.KEEP:
                    report.predicted.append((d.slot, f.source_id, f.attribute))
        if any(d.rule == RuleKind.DROP_LINE for d in decisions):
            report.action = "dropped"
        elif any(d.rule != RuleKind.KEEP for d in decisions):
            report.action = "redacted"
        if explain:
            report.provenance = prov.to_dict()
        return lines, report

    def redact_lines(self, lines, explain: bool = False) -> tuple[list[str], RunReport]:
        lines = list(lines)
        items = group_records(lines, self.pattern)
        if self.workers > 1 and len(items) > 1:
            with ThreadPoolExecutor(self.workers) as pool:
                results = list(pool.map(lambda it: self.process(it, explain), items))
        else:
            results = [self.process(it, explain) for it in items]
        out: list[str] = []
        report = RunReport(input_lines=len(lines), fail_policy=self.fail_policy)
        for produced, rec in results:
            out.extend(produced)
            report.records.append(rec)
        report.output_lines = len(out)
        report.parse_failures = list(self.repo.parse_failures)
        return out, report


def load_repository(config: ProjectConfig) -> DfgRepository:
    """Open the configured repository (with a staleness check), or build one in memory."""
    if config.repository is not None and (Path(config.repository) / INDEX_FILE).exists():
        return DfgRepository.open(config.repository, config.root, config.scan)
    repo, report = build_repository(config.root, config.scan, workers=config.workers)
    for d in report.diagnostics:
        logger.debug(d)
    return repo


def redactor_from_config(config: ProjectConfig, repo: DfgRepository | None = None) -> LogRedactor:
    repo = repo if repo is not None else load_repository(config)
    specs = load_annotations(config.annotations_path)
    return LogRedactor(repo, specs, config.root, config.pattern, config.fail_policy,
                       config.redact_conservative, config.limits, config.digest, config.workers)


def read_lines(source) -> tuple[list[str], bool]:
    """Lines of a path or text file object, plus whether the text ended in a newline."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, encoding="utf-8", errors="surrogateescape", newline="") as fh:
            text = fh.read()
    if text == "":
        return [], False
    trailing = text.endswith("\n")
    if trailing:
        text = text[:-1]
    return text.split("\n"), trailing


def write_lines(sink, lines: list[str], trailing: bool) -> None:
    text = "\n".join(lines) + ("\n" if trailing and lines else "")
    if sink is None:
        return
    if hasattr(sink, "write"):
        sink.write(text)
        return
    with open(sink, "w", encoding="utf-8", errors="surrogateescape", newline="") as fh:
        fh.write(text)


def run_pipeline(config: ProjectConfig, log_in, log_out=None, repo: DfgRepository | None = None,
                 explain: bool = False) -> RunReport:
    """scan -> build (or open) -> link -> trace -> redact.

    Raises StaleRepository before producing any output when the stored
    repository no longer matches the sources.
    """
    redactor = redactor_from_config(config, repo)
    lines, trailing = read_lines(log_in)
    out, report = redactor.redact_lines(lines, explain)
    write_lines(log_out, out, trailing)
    return report


def redact_text(redactor: LogRedactor, text: str) -> tuple[str, RunReport]:
    lines, trailing = read_lines(io.StringIO(text))
    out, report = redactor.redact_lines(lines)
    return "\n".join(out) + ("\n" if trailing and out else ""), report

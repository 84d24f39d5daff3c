"""Binding rendered messages back to template slots and rewriting sensitive values."""
from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field

from .annotations import STRICTNESS, DataSourceSpec, RedactionRule, RuleKind
from .logs import LogRecord, LogStatementRef
from .templates import NUMBER, MessageTemplate, TemplateError, template_for
from .tracer import CONSERVATIVE, Finding, ProvenanceReport

TOMBSTONE_TEXT = "[REDACTED LINE]"
UNLINKABLE_TOMBSTONE = f"DROPPED|-|{TOMBSTONE_TEXT}"
TOMBSTONE_RE = re.compile(r"^DROPPED\|[^|]*\|\[REDACTED LINE\]$")

# Values the redactor itself writes; they are left alone on a second pass.
REDACTION_TOKEN = re.compile(r"\[REDACTED:[^\]\n]*\]|\[HASH:[0-9a-f]+\]")
NUMERIC_SHAPE = re.compile(
    r"\s*[-+ ]?(?:(?:\d[\d,_]*(?:\.\d*)?|\.\d+)(?:[eE][-+]?\d+)?%?|inf|nan|INF|NAN)\s*"
    r"|\[REDACTED:[^\]\n]*\]|\[HASH:[0-9a-f]+\]|\*+[-+\d.,_eE%]*"
)


class NoTemplate(Exception):
    pass


class BindFailure(ValueError):
    pass


@dataclass(frozen=True)
class SlotBinding:
    slot_index: int
    value_span: tuple[int, int]
    value: str


@dataclass
class BindResult:
    bindings: list[SlotBinding]
    count: int  # consistent bindings found, capped at 2

    @property
    def ambiguous(self) -> bool:
        return self.count > 1


@dataclass
class SlotDecision:
    slot: int
    rule: RuleKind
    attribute: tuple[str, str] | None
    findings: list[Finding] = field(default_factory=list)
    span: tuple[int, int] | None = None
    params: RedactionRule = RedactionRule()


def tombstone(path: str, line) -> str:
    return f"DROPPED|{path}:{line}|{TOMBSTONE_TEXT}"


def is_tombstone(line: str) -> bool:
    return bool(TOMBSTONE_RE.match(line))


def derive_template(stmt: LogStatementRef) -> MessageTemplate:
    style = stmt.format_style
    if style in (None, "opaque") or stmt.format_string is None and style != "plain":
        raise NoTemplate(f"log statement at {stmt.function}:{stmt.line} has no template")
    try:
        tmpl = template_for(style, stmt.format_string)
    except (TemplateError, SyntaxError) as exc:
        raise NoTemplate(str(exc)) from None
    if len(tmpl.slots) != stmt.slot_count:
        raise NoTemplate(f"template has {len(tmpl.slots)} slots but the statement has {stmt.slot_count}")
    return tmpl


def _fits(kind: str, value: str) -> bool:
    if kind == NUMBER:
        return NUMERIC_SHAPE.fullmatch(value) is not None
    return True


def bind_all(tmpl: MessageTemplate, message: str) -> BindResult:
    """Anchored match of ``message`` against ``tmpl``.

    Literals must match exactly. Slot ends are tried shortest first, so the
    chosen binding is the leftmost-shortest one that still lets the rest of
    the message match. ``count`` reports whether other bindings exist.
    """
    lits, slots = tmpl.literals, tmpl.slots
    n = len(slots)
    if not message.startswith(lits[0]):
        raise BindFailure("message does not start with the template's leading text")
    if n == 0:
        if message != lits[0]:
            raise BindFailure("message differs from the constant template")
        return BindResult([], 1)
    size = len(message)
    memo: dict[tuple[int, int], int] = {}

    def ends(i: int, start: int):
        nxt = lits[i + 1]
        if i == n - 1:
            # last slot runs up to the trailing literal
            e = size - len(nxt)
            if e >= start and message.endswith(nxt):
                yield e
            return
        if nxt:
            e = message.find(nxt, start)
            while e != -1:
                yield e
                e = message.find(nxt, e + 1)
        else:
            yield from range(start, size + 1)

    def count(i: int, start: int) -> int:
        if i == n:
            return 1 if start == size else 0
        key = (i, start)
        if key in memo:
            return memo[key]
        total = 0
        for e in ends(i, start):
            if not _fits(slots[i].kind, message[start:e]):
                continue
            total += count(i + 1, e + len(lits[i + 1]))
            if total >= 2:
                break
        memo[key] = min(total, 2)
        return memo[key]

    found = count(0, len(lits[0]))
    if found == 0:
        raise BindFailure("message does not match the statement's template")
    out, start = [], len(lits[0])
    for i in range(n):
        for e in ends(i, start):
            if _fits(slots[i].kind, message[start:e]) and count(i + 1, e + len(lits[i + 1])):
                out.append(SlotBinding(i, (start, e), message[start:e]))
                start = e + len(lits[i + 1])
                break
    return BindResult(out, found)


def bind_message(tmpl: MessageTemplate, message: str) -> list[SlotBinding]:
    return bind_all(tmpl, message).bindings


def rule_for(finding: Finding, specs) -> RedactionRule:
    for s in specs:
        if s.source_id == finding.source_id:
            attr = s.attribute(finding.attribute)
            if attr is not None:
                return attr.rule
    return RedactionRule()


def decide(prov: ProvenanceReport, specs: list[DataSourceSpec], redact_conservative: bool = True) -> list[SlotDecision]:
    """Strictest applicable rule per slot."""
    out = []
    for i, findings in enumerate(prov.slots):
        best = SlotDecision(i, RuleKind.KEEP, None, list(findings))
        best_rule = RedactionRule()
        for f in sorted(findings):
            if f.confidence == CONSERVATIVE and not redact_conservative:
                continue
            rule = rule_for(f, specs)
            if STRICTNESS[rule.kind] > STRICTNESS[best_rule.kind]:
                best_rule = rule
                best.attribute = (f.source_id, f.attribute)
        best.rule = best_rule.kind
        best.params = best_rule
        out.append(best)
    return out


def hash_token(value: str, length: int, digest: str = "sha256") -> str:
    h = hashlib.new(digest, value.encode("utf-8")).hexdigest()
    return f"[HASH:{h[:length]}]"


def partial(value: str, keep_last: int) -> str:
    if keep_last == 0 or len(value) <= keep_last:
        return "*" * len(value)
    return "*" * (len(value) - keep_last) + value[-keep_last:]


def apply_rule(value: str, rule: RedactionRule, attribute: tuple[str, str], digest: str = "sha256") -> str:
    """Rewrite one slot value. Each physical line of a multi-line value is rewritten
    on its own so the record keeps its line count."""
    if rule.kind == RuleKind.KEEP:
        return value
    pieces = value.split("\n")
    out = []
    for p in pieces:
        if REDACTION_TOKEN.fullmatch(p):
            out.append(p)
        elif rule.kind == RuleKind.MASK:
            out.append(f"[REDACTED:{attribute[0]}.{attribute[1]}]")
        elif rule.kind == RuleKind.HASH:
            out.append(hash_token(p, rule.length, digest))
        elif rule.kind == RuleKind.PARTIAL:
            out.append(partial(p, rule.keep_last))
        else:
            out.append(p)
    return "\n".join(out)


def redact(rec: LogRecord, bindings: list[SlotBinding], prov: ProvenanceReport, specs,
           redact_conservative: bool = True, digest: str = "sha256") -> tuple[list[str], list[SlotDecision]]:
    """Output lines for one record (one per physical input line) and the per-slot decisions."""
    if len(bindings) != len(prov.slots):
        raise ValueError("bindings do not match the provenance slot count")
    decisions = decide(prov, specs, redact_conservative)
    for d, b in zip(decisions, bindings):
        d.span = b.value_span
    if any(d.rule == RuleKind.DROP_LINE for d in decisions):
        return [tombstone(rec.path, rec.line)] * rec.physical_lines, decisions
    message = rec.full_message
    parts, pos = [], 0
    for d, b in zip(decisions, bindings):
        s, e = b.value_span
        parts.append(message[pos:s])
        parts.append(apply_rule(b.value, d.params, d.attribute, digest) if d.attribute else b.value)
        pos = e
    parts.append(message[pos:])
    text = rec.prefix + "".join(parts)
    lines = text.split("\n")
    lines[-1] += rec.suffix
    return lines, decisions

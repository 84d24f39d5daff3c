"""Domain-expert annotations of structured data sources."""
from __future__ import annotations

import fnmatch
import posixpath
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import yaml

SCHEMA_VERSION = 1


class Level(str, Enum):
    NONE = "NONE"
    LOW = "LOW"
    HIGH = "HIGH"


class RuleKind(str, Enum):
    KEEP = "KEEP"
    PARTIAL = "PARTIAL"
    HASH = "HASH"
    MASK = "MASK"
    DROP_LINE = "DROP_LINE"


# strictest first
STRICTNESS = {RuleKind.KEEP: 0, RuleKind.PARTIAL: 1, RuleKind.HASH: 2, RuleKind.MASK: 3, RuleKind.DROP_LINE: 4}

LEGAL_RULES = {
    Level.NONE: frozenset({RuleKind.KEEP}),
    Level.LOW: frozenset({RuleKind.KEEP, RuleKind.PARTIAL, RuleKind.HASH, RuleKind.MASK}),
    Level.HIGH: frozenset({RuleKind.MASK, RuleKind.HASH, RuleKind.DROP_LINE}),
}

HASH_LENGTH_RANGE = (8, 64)
DEFAULT_HASH_LENGTH = 16


class ValidationError(ValueError):
    """One or more annotation problems; ``errors`` lists all of them."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("invalid annotations:\n  " + "\n  ".join(self.errors))


class AmbiguousSource(LookupError):
    def __init__(self, key: str, candidates: list[str]):
        self.key = key
        self.candidates = candidates
        super().__init__(f"source key {key!r} matches several specs: {', '.join(candidates)}")


@dataclass(frozen=True)
class RedactionRule:
    kind: RuleKind = RuleKind.KEEP
    keep_last: int = 0
    length: int = DEFAULT_HASH_LENGTH

    @property
    def strictness(self) -> int:
        return STRICTNESS[self.kind]


@dataclass(frozen=True)
class SensitiveAttribute:
    name: str
    level: Level = Level.NONE
    rule: RedactionRule = RedactionRule()


@dataclass(frozen=True)
class DataSourceSpec:
    source_id: str
    match_pattern: str
    attributes: tuple[SensitiveAttribute, ...] = field(default_factory=tuple)

    def attribute(self, name: str) -> SensitiveAttribute | None:
        for a in self.attributes:
            if a.name == name:
                return a
        return None

    @property
    def attribute_names(self) -> list[str]:
        return [a.name for a in self.attributes]


def check_rule(level: Level, rule: RedactionRule) -> str | None:
    if rule.kind not in LEGAL_RULES[level]:
        return f"level {level.value} does not allow rule {rule.kind.value}"
    if rule.kind == RuleKind.PARTIAL and rule.keep_last < 0:
        return "PARTIAL keep_last must be >= 0"
    if rule.kind == RuleKind.HASH and not HASH_LENGTH_RANGE[0] <= rule.length <= HASH_LENGTH_RANGE[1]:
        return f"HASH length must be in [{HASH_LENGTH_RANGE[0]}, {HASH_LENGTH_RANGE[1]}]"
    return None


def _parse_attribute(raw, where: str, errors: list[str]) -> SensitiveAttribute | None:
    if not isinstance(raw, dict):
        errors.append(f"{where}: attribute must be a mapping")
        return None
    unknown = set(raw) - {"name", "level", "rule", "keep_last", "length"}
    if unknown:
        errors.append(f"{where}: unknown keys {sorted(unknown)}")
    name = raw.get("name")
    if not isinstance(name, str) or not name:
        errors.append(f"{where}: attribute name is required")
        return None
    where = f"{where} ({name})"
    try:
        level = Level(str(raw.get("level", "NONE")).upper())
    except ValueError:
        errors.append(f"{where}: unknown level {raw.get('level')!r}")
        return None
    try:
        kind = RuleKind(str(raw.get("rule", "KEEP")).upper())
    except ValueError:
        errors.append(f"{where}: unknown rule {raw.get('rule')!r}")
        return None
    keep_last = raw.get("keep_last", 0)
    length = raw.get("length", DEFAULT_HASH_LENGTH)
    if not isinstance(keep_last, int) or isinstance(keep_last, bool):
        errors.append(f"{where}: keep_last must be an integer")
        return None
    if not isinstance(length, int) or isinstance(length, bool):
        errors.append(f"{where}: length must be an integer")
        return None
    rule = RedactionRule(kind, keep_last, length)
    problem = check_rule(level, rule)
    if problem:
        errors.append(f"{where}: {problem}")
        return None
    return SensitiveAttribute(name, level, rule)


def parse_annotations(data) -> list[DataSourceSpec]:
    """Validate an already-loaded annotation document, collecting every error."""
    errors: list[str] = []
    if not isinstance(data, dict):
        raise ValidationError(["annotation file must be a mapping"])
    unknown = set(data) - {"schema_version", "sources"}
    if unknown:
        errors.append(f"unknown top-level keys {sorted(unknown)}")
    if data.get("schema_version") != SCHEMA_VERSION:
        errors.append(f"schema_version must be {SCHEMA_VERSION}, got {data.get('schema_version')!r}")
    sources = data.get("sources")
    if not isinstance(sources, list):
        errors.append("sources must be a list")
        raise ValidationError(errors)
    specs, seen = [], {}
    for i, raw in enumerate(sources):
        where = f"sources[{i}]"
        if not isinstance(raw, dict):
            errors.append(f"{where}: source must be a mapping")
            continue
        unknown = set(raw) - {"id", "match", "attributes"}
        if unknown:
            errors.append(f"{where}: unknown keys {sorted(unknown)}")
        sid = raw.get("id")
        pattern = raw.get("match")
        if not isinstance(sid, str) or not sid:
            errors.append(f"{where}: id is required")
        elif sid in seen:
            errors.append(f"{where}: duplicate source id {sid!r} (first at sources[{seen[sid]}])")
        else:
            seen[sid] = i
        if not isinstance(pattern, str) or not pattern:
            errors.append(f"{where}: match pattern must be a non-empty string")
        attrs, names = [], set()
        raw_attrs = raw.get("attributes", [])
        if not isinstance(raw_attrs, list):
            errors.append(f"{where}: attributes must be a list")
            raw_attrs = []
        for j, ra in enumerate(raw_attrs):
            a = _parse_attribute(ra, f"{where}.attributes[{j}]", errors)
            if a is None:
                continue
            if a.name in names:
                errors.append(f"{where}.attributes[{j}]: duplicate attribute {a.name!r}")
            names.add(a.name)
            attrs.append(a)
        if isinstance(sid, str) and isinstance(pattern, str) and pattern:
            specs.append(DataSourceSpec(sid, pattern, tuple(attrs)))
    if errors:
        raise ValidationError(errors)
    return specs


def load_annotations(path: str | Path) -> list[DataSourceSpec]:
    with open(path, encoding="utf-8") as fh:
        try:
            data = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ValidationError([f"{path}: not valid YAML: {exc}"]) from None
    return parse_annotations(data)


def _is_glob(pattern: str) -> bool:
    return any(c in pattern for c in "*?[")


def match_source(source_key: str, specs) -> DataSourceSpec | None:
    """Find the spec for a literal source key.

    An exact literal match wins; otherwise exactly one glob may match
    (patterns without a slash are also tried against the key's basename).
    """
    exact = sorted((s for s in specs if s.match_pattern == source_key), key=lambda s: s.source_id)
    if len(exact) == 1:
        return exact[0]
    if len(exact) > 1:
        raise AmbiguousSource(source_key, [s.source_id for s in exact])
    base = posixpath.basename(source_key)
    hits = []
    for s in specs:
        pat = s.match_pattern
        if not _is_glob(pat):
            if "/" not in pat and pat == base:
                hits.append(s)
            continue
        if fnmatch.fnmatchcase(source_key, pat) or ("/" not in pat and fnmatch.fnmatchcase(base, pat)):
            hits.append(s)
    hits.sort(key=lambda s: s.source_id)
    if len(hits) > 1:
        raise AmbiguousSource(source_key, [s.source_id for s in hits])
    return hits[0] if hits else None

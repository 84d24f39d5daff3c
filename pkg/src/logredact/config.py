"""Project configuration file (YAML)."""
from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .logs import DEFAULT_LOG_PATTERN, LogPattern, PatternError
from .parser import DEFAULT_LOGGER_NAMES, DEFAULT_SOURCE_READERS, ScanConfig
from .tracer import TraceLimits

SCHEMA_VERSION = 1
FAIL_POLICIES = ("conservative", "permissive")
DEFAULT_CONFIG_NAME = "logredact.yaml"

_TOP_KEYS = {
    "schema_version", "root", "scan", "annotations", "repository", "log_pattern", "fail_policy",
    "redact_conservative", "limits", "digest", "workers",
}
_SCAN_KEYS = {"extensions", "exclude", "logger_names", "source_readers"}
_LIMIT_KEYS = {"max_depth", "max_nodes"}
_DIGEST_KEYS = {"algorithm"}


class ConfigError(ValueError):
    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.errors))


@dataclass
class ProjectConfig:
    root: Path
    annotations_path: Path
    scan: ScanConfig = field(default_factory=ScanConfig)
    repository: Path | None = None
    log_pattern: str = DEFAULT_LOG_PATTERN
    fail_policy: str = "conservative"
    redact_conservative: bool = True
    limits: TraceLimits = field(default_factory=TraceLimits)
    digest: str = "sha256"
    workers: int = 1
    schema_version: int = SCHEMA_VERSION

    @property
    def pattern(self) -> LogPattern:
        return LogPattern(self.log_pattern)

    @classmethod
    def from_dict(cls, data, base_dir: str | os.PathLike = ".") -> ProjectConfig:
        base = Path(base_dir)
        errors: list[str] = []
        if not isinstance(data, dict):
            raise ConfigError(["configuration must be a mapping"])
        unknown = set(data) - _TOP_KEYS
        if unknown:
            errors.append(f"unknown keys {sorted(unknown)}")
        if data.get("schema_version") != SCHEMA_VERSION:
            errors.append(f"schema_version must be {SCHEMA_VERSION}, got {data.get('schema_version')!r}")

        def path_of(key, required=True, must_exist=True):
            raw = data.get(key)
            if raw is None:
                if required:
                    errors.append(f"{key} is required")
                return None
            if not isinstance(raw, str):
                errors.append(f"{key} must be a path string")
                return None
            p = (base / raw).resolve()
            if must_exist and not p.exists():
                errors.append(f"{key}: {raw} does not exist")
            return p

        root = path_of("root")
        annotations = path_of("annotations")
        repository = path_of("repository", required=False, must_exist=False)

        scan_raw = data.get("scan") or {}
        scan = ScanConfig()
        if not isinstance(scan_raw, dict):
            errors.append("scan must be a mapping")
        else:
            bad = set(scan_raw) - _SCAN_KEYS
            if bad:
                errors.append(f"scan: unknown keys {sorted(bad)}")
            lists = {}
            for k in _SCAN_KEYS:
                v = scan_raw.get(k)
                if v is None:
                    continue
                if not isinstance(v, list) or not all(isinstance(x, str) for x in v):
                    errors.append(f"scan.{k} must be a list of strings")
                    continue
                lists[k] = tuple(v)
            scan = ScanConfig(
                extensions=lists.get("extensions", (".py",)),
                exclude=lists.get("exclude", ()),
                logger_names=lists.get("logger_names", DEFAULT_LOGGER_NAMES),
                source_readers=lists.get("source_readers", DEFAULT_SOURCE_READERS),
            )

        pattern = data.get("log_pattern", DEFAULT_LOG_PATTERN)
        try:
            LogPattern(pattern)
        except (PatternError, TypeError) as exc:
            errors.append(f"log_pattern: {exc}")

        policy = data.get("fail_policy", "conservative")
        if policy not in FAIL_POLICIES:
            errors.append(f"fail_policy must be one of {list(FAIL_POLICIES)}, got {policy!r}")
        rc = data.get("redact_conservative", True)
        if not isinstance(rc, bool):
            errors.append("redact_conservative must be true or false")

        limits = TraceLimits()
        lim_raw = data.get("limits") or {}
        if not isinstance(lim_raw, dict) or set(lim_raw) - _LIMIT_KEYS:
            errors.append(f"limits must be a mapping with keys {sorted(_LIMIT_KEYS)}")
        else:
            try:
                limits = TraceLimits(int(lim_raw.get("max_depth", limits.max_depth)),
                                     int(lim_raw.get("max_nodes", limits.max_nodes)))
            except (TypeError, ValueError) as exc:
                errors.append(f"limits: {exc}")

        digest = "sha256"
        dig_raw = data.get("digest") or {}
        if not isinstance(dig_raw, dict) or set(dig_raw) - _DIGEST_KEYS:
            errors.append("digest must be a mapping with key 'algorithm'")
        else:
            digest = dig_raw.get("algorithm", "sha256")
            if digest not in hashlib.algorithms_guaranteed or digest.startswith("shake"):
                errors.append(f"digest.algorithm {digest!r} is not a supported fixed-length digest")

        workers = data.get("workers", 1)
        if not isinstance(workers, int) or isinstance(workers, bool) or workers < 1:
            errors.append("workers must be a positive integer")

        if errors:
            raise ConfigError(errors)
        return cls(root=root, annotations_path=annotations, scan=scan, repository=repository,
                   log_pattern=pattern, fail_policy=policy, redact_conservative=rc, limits=limits,
                   digest=digest, workers=workers)


def load_config(path: str | os.PathLike) -> ProjectConfig:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError([f"cannot read {path}: {exc.strerror}"]) from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError([f"{path}: not valid YAML: {exc}"]) from None
    return ProjectConfig.from_dict(data, p.parent)

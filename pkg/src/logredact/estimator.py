"""Estimator-style front end: fit on a source tree, transform logs."""
from __future__ import annotations

import hashlib
from pathlib import Path

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_choice, check_log_lines, check_positive_int, check_project_root
from .annotations import DataSourceSpec, load_annotations, parse_annotations
from .config import FAIL_POLICIES, ProjectConfig
from .logs import DEFAULT_LOG_PATTERN, LogPattern
from .parser import DEFAULT_LOGGER_NAMES, DEFAULT_SOURCE_READERS, ScanConfig
from .pipeline import LogRedactor
from .repository import INDEX_FILE, DfgRepository, build_repository
from .tracer import TraceLimits


class SourceAwareRedactor(BaseEstimator):
    """Redact log records using the source code that produced them.

    ``fit(root)`` scans the project and builds (or opens) the graph repository;
    ``transform(log)`` returns the redacted lines. The run report of the last
    transform is kept in ``report_``.

    Parameters
    ----------
    annotations : path, dict, or list of DataSourceSpec
        Sensitive data source annotations.
    repository : path, optional
        Saved repository directory. If it exists it is opened (and checked for
        staleness against the fitted root); otherwise graphs are built in memory.
    """

    def __init__(self, annotations=None, log_pattern=DEFAULT_LOG_PATTERN, fail_policy="conservative",
                 redact_conservative=True, max_depth=32, max_nodes=20000, digest="sha256", workers=1,
                 extensions=(".py",), exclude=(), logger_names=DEFAULT_LOGGER_NAMES,
                 source_readers=DEFAULT_SOURCE_READERS, repository=None):
        self.annotations = annotations
        self.log_pattern = log_pattern
        self.fail_policy = fail_policy
        self.redact_conservative = redact_conservative
        self.max_depth = max_depth
        self.max_nodes = max_nodes
        self.digest = digest
        self.workers = workers
        self.extensions = extensions
        self.exclude = exclude
        self.logger_names = logger_names
        self.source_readers = source_readers
        self.repository = repository

    @classmethod
    def from_config(cls, config: ProjectConfig) -> SourceAwareRedactor:
        return cls(
            annotations=str(config.annotations_path), log_pattern=config.log_pattern,
            fail_policy=config.fail_policy, redact_conservative=config.redact_conservative,
            max_depth=config.limits.max_depth, max_nodes=config.limits.max_nodes, digest=config.digest,
            workers=config.workers, extensions=config.scan.extensions, exclude=config.scan.exclude,
            logger_names=config.scan.logger_names, source_readers=config.scan.source_readers,
            repository=str(config.repository) if config.repository else None,
        )

    def _specs(self) -> list[DataSourceSpec]:
        a = self.annotations
        if a is None:
            return []
        if isinstance(a, (str, Path)):
            return load_annotations(a)
        if isinstance(a, dict):
            return parse_annotations(a)
        specs = list(a)
        if not all(isinstance(s, DataSourceSpec) for s in specs):
            raise TypeError("annotations must be a path, a mapping, or a list of DataSourceSpec")
        return specs

    def _validate_params(self):
        check_choice("fail_policy", self.fail_policy, FAIL_POLICIES)
        check_positive_int("max_depth", self.max_depth)
        check_positive_int("max_nodes", self.max_nodes)
        check_positive_int("workers", self.workers)
        if self.digest not in hashlib.algorithms_guaranteed or self.digest.startswith("shake"):
            raise ValueError(f"unsupported digest {self.digest!r}")
        if not isinstance(self.redact_conservative, bool):
            raise ValueError("redact_conservative must be a bool")
        LogPattern(self.log_pattern)

    def scan_config(self) -> ScanConfig:
        return ScanConfig(tuple(self.extensions), tuple(self.exclude), tuple(self.logger_names),
                          tuple(self.source_readers))

    def fit(self, X, y=None):
        """Build the graph repository for the project rooted at ``X``."""
        self._validate_params()
        root = check_project_root(X)
        scan = self.scan_config()
        self.specs_ = self._specs()
        self.build_report_ = None
        if self.repository is not None and (Path(self.repository) / INDEX_FILE).exists():
            self.repo_ = DfgRepository.open(self.repository, root, scan)
        else:
            self.repo_, self.build_report_ = build_repository(root, scan, workers=self.workers)
        self.root_ = root
        self.n_functions_ = len(self.repo_)
        self.redactor_ = LogRedactor(
            self.repo_, self.specs_, root, LogPattern(self.log_pattern), self.fail_policy,
            self.redact_conservative, TraceLimits(self.max_depth, self.max_nodes), self.digest, self.workers,
        )
        return self

    def transform(self, X) -> list[str]:
        """Redact log text (or a sequence of lines); returns the output lines."""
        check_is_fitted(self, "redactor_")
        lines, _ = check_log_lines(X)
        out, self.report_ = self.redactor_.redact_lines(lines)
        return out

    def redact_text(self, text: str) -> str:
        check_is_fitted(self, "redactor_")
        lines, trailing = check_log_lines(text)
        out, self.report_ = self.redactor_.redact_lines(lines)
        return "\n".join(out) + ("\n" if trailing and out else "")

    def explain(self, X) -> list[dict]:
        """Per-record decisions with provenance paths."""
        check_is_fitted(self, "redactor_")
        lines, _ = check_log_lines(X)
        _, self.report_ = self.redactor_.redact_lines(lines, explain=True)
        return [r.to_dict() for r in self.report_.records]

"""Source-aware redaction of sensitive values in diagnostic logs."""
from .annotations import DataSourceSpec, RedactionRule, SensitiveAttribute, load_annotations, match_source
from .config import ProjectConfig, load_config
from .dfg import FunctionDfg, build_dfg, prune_dfg
from .estimator import SourceAwareRedactor
from .evaluation import EvalResult, GoldLabel, evaluate
from .logs import LogRecord, LogStatementRef, parse_log_line, resolve_statement
from .parser import FunctionId, ScanConfig, parse_file, scan_project
from .pipeline import LogRedactor, RunReport, run_pipeline
from .redactor import bind_message, derive_template, redact
from .repository import DfgRepository, build_repository
from .tracer import ProvenanceReport, TraceLimits, find_call_sites, trace

__version__ = "0.1.0"

__all__ = [
    "DataSourceSpec", "RedactionRule", "SensitiveAttribute", "load_annotations", "match_source",
    "ProjectConfig", "load_config", "FunctionDfg", "build_dfg", "prune_dfg", "SourceAwareRedactor",
    "EvalResult", "GoldLabel", "evaluate", "LogRecord", "LogStatementRef", "parse_log_line",
    "resolve_statement", "FunctionId", "ScanConfig", "parse_file", "scan_project", "LogRedactor",
    "RunReport", "run_pipeline", "bind_message", "derive_template", "redact", "DfgRepository",
    "build_repository", "ProvenanceReport", "TraceLimits", "find_call_sites", "trace",
]

"""Bundled example applications with logs and gold labels.

Each app directory holds ``project/`` (the source tree), ``data/`` (the CSV
inputs), ``annotations.yaml``, ``logredact.yaml``, ``app.log`` (the log the
project writes when run from the app directory) and ``gold.jsonl`` (which
values in that log derive from which annotated attribute, as observed by the
dynamic oracle). ``python -m logredact.corpus`` regenerates data, logs and
labels.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

CORPUS_DIR = Path(__file__).resolve().parent
APPS = ("churn", "segmentation", "fraud")


@dataclass(frozen=True)
class CorpusApp:
    name: str
    directory: Path

    @property
    def project(self) -> Path:
        return self.directory / "project"

    @property
    def config_path(self) -> Path:
        return self.directory / "logredact.yaml"

    @property
    def annotations_path(self) -> Path:
        return self.directory / "annotations.yaml"

    @property
    def log_path(self) -> Path:
        return self.directory / "app.log"

    @property
    def gold_path(self) -> Path:
        return self.directory / "gold.jsonl"

    entry: str = "main.py"


def corpus_app(name: str) -> CorpusApp:
    if name not in APPS:
        raise KeyError(f"unknown corpus app {name!r}; choose from {', '.join(APPS)}")
    return CorpusApp(name, CORPUS_DIR / name)


def corpus_apps() -> list[CorpusApp]:
    return [corpus_app(n) for n in APPS]

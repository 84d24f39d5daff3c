import textwrap
from pathlib import Path

import pytest

from logredact.annotations import parse_annotations
from logredact.corpus import corpus_apps
from logredact.repository import build_repository

CUSTOMER_ANNOTATIONS = {
    "schema_version": 1,
    "sources": [{
        "id": "customers",
        "match": "customers.csv",
        "attributes": [
            {"name": "name", "level": "HIGH", "rule": "MASK"},
            {"name": "email", "level": "HIGH", "rule": "HASH", "length": 12},
            {"name": "tenure", "level": "LOW", "rule": "KEEP"},
        ],
    }],
}


def write_tree(root: Path, files: dict) -> Path:
    """Write ``{relative path: text}`` under root, dedenting each text."""
    for rel, text in files.items():
        p = root / rel
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(textwrap.dedent(text).lstrip("\n"), encoding="utf-8")
    return root


@pytest.fixture
def make_project(tmp_path):
    def make(files, name="proj"):
        return write_tree(tmp_path / name, files)
    return make


@pytest.fixture
def customer_specs():
    return parse_annotations(CUSTOMER_ANNOTATIONS)


@pytest.fixture(scope="session")
def corpus():
    return corpus_apps()


@pytest.fixture(scope="session")
def corpus_repos(corpus):
    return {app.name: build_repository(app.project)[0] for app in corpus}


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)

import io
import json

import pytest
import yaml

from logredact.config import load_config
from logredact.pipeline import read_lines, redact_text, redactor_from_config, run_pipeline, write_lines
from logredact.redactor import is_tombstone
from logredact.repository import StaleRepository, build_repository

from drift import DRIFTED, log_lines, write_drift_project


@pytest.fixture
def drift(tmp_path):
    write_drift_project(tmp_path)
    return tmp_path


def _configure(base, **overrides):
    cfg_path = base / "logredact.yaml"
    data = yaml.safe_load(cfg_path.read_text())
    data.update(overrides)
    cfg_path.write_text(yaml.safe_dump(data))


def _redactor(base, **overrides):
    _configure(base, **overrides)
    return redactor_from_config(load_config(base / "logredact.yaml"))


def test_churn_masks_names_without_ambiguity(corpus, corpus_repos):
    app = corpus[0]
    cfg = load_config(app.config_path)
    r = redactor_from_config(cfg, corpus_repos[app.name])
    lines, _ = read_lines(app.log_path)
    out, report = r.redact_lines(lines)
    assert len(out) == len(lines)
    assert report.ambiguities == [] and report.flagged == []
    names = {ln.split("|", 2)[2].split()[1] for ln in lines if "for a callback" in ln}
    text = "\n".join(out)
    assert names and not any(f"queued {n} " in text for n in names)
    assert "[REDACTED:customers.name]" in text


def test_empty_log(drift):
    out, report = _redactor(drift).redact_lines([])
    assert out == []
    d = report.to_dict()
    assert d["input_lines"] == d["output_lines"] == d["tombstones"] == d["flagged"] == 0
    assert report.exit_code == 0


def test_conservative_policy_on_drift(drift):
    out, report = _redactor(drift).redact_lines(log_lines())
    assert len(out) == len(log_lines())
    failed = [r for r in report.records if r.failure]
    assert [r.failure for r in failed] == [k for k, _ in DRIFTED]
    assert all(r.action == "tombstoned" for r in failed)
    assert all(is_tombstone(out[r.line_no - 1]) for r in failed)
    assert "Alice" not in "\n".join(out)
    assert report.exit_code == 2


def test_permissive_policy_on_drift(drift):
    lines = log_lines()
    out, report = _redactor(drift, fail_policy="permissive").redact_lines(lines)
    failed = [r for r in report.records if r.failure]
    assert len(failed) == len(DRIFTED)
    for r in failed:
        assert r.action == "passed"
        assert out[r.line_no - 1] == lines[r.line_no - 1]


def test_stale_repository_fails_before_output(drift):
    repo_dir = drift / "repo"
    repo, _ = build_repository(drift / "project")
    repo.save(repo_dir)
    app = drift / "project" / "app.py"
    app.write_text(app.read_text() + "\n# edited\n")
    _configure(drift, repository="repo")
    sink = io.StringIO()
    with pytest.raises(StaleRepository):
        run_pipeline(load_config(drift / "logredact.yaml"), drift / "app.log", sink)
    assert sink.getvalue() == ""


def test_saved_repository_gives_same_output(drift):
    build_repository(drift / "project")[0].save(drift / "repo")
    in_memory = run_pipeline(load_config(drift / "logredact.yaml"), drift / "app.log", drift / "a.log")
    _configure(drift, repository="repo")
    saved = run_pipeline(load_config(drift / "logredact.yaml"), drift / "app.log", drift / "b.log")
    assert (drift / "a.log").read_bytes() == (drift / "b.log").read_bytes()
    assert in_memory.to_dict() == saved.to_dict()


def test_deterministic_and_worker_independent(corpus, corpus_repos):
    app = corpus[2]
    cfg = load_config(app.config_path)
    lines, _ = read_lines(app.log_path)
    a, ra = redactor_from_config(cfg, corpus_repos[app.name]).redact_lines(lines)
    b, rb = redactor_from_config(cfg, corpus_repos[app.name]).redact_lines(lines)
    cfg.workers = 4
    c, rc = redactor_from_config(cfg, corpus_repos[app.name]).redact_lines(lines)
    assert a == b == c
    assert ra.to_json() == rb.to_json() == rc.to_json()


def test_explain_carries_provenance(drift):
    _, report = _redactor(drift).redact_lines(["INFO|app.py:9|customer Bo tenure 2"], explain=True)
    rec = report.records[0]
    assert rec.predicted == [(0, "customers", "name")]
    assert rec.provenance is not None
    json.dumps(rec.to_dict())


def test_trailing_newline_and_crlf_preserved():
    lines, trailing = read_lines(io.StringIO("a\r\nb\n"))
    assert lines == ["a\r", "b"] and trailing
    sink = io.StringIO()
    write_lines(sink, lines, trailing)
    assert sink.getvalue() == "a\r\nb\n"


def test_redact_text(drift):
    text, report = redact_text(_redactor(drift), "INFO|app.py:11|report done\n")
    assert text == "INFO|app.py:11|report done\n"
    assert report.records[0].action == "kept"

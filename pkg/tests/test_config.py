import pytest

from logredact.config import ConfigError, ProjectConfig, load_config


@pytest.fixture
def base(tmp_path):
    (tmp_path / "src").mkdir()
    (tmp_path / "ann.yaml").write_text("schema_version: 1\nsources: []\n")
    return tmp_path


def minimal(**extra):
    d = {"schema_version": 1, "root": "src", "annotations": "ann.yaml"}
    d.update(extra)
    return d


def test_minimal_config_defaults(base):
    cfg = ProjectConfig.from_dict(minimal(), base)
    assert cfg.root == (base / "src").resolve()
    assert cfg.fail_policy == "conservative" and cfg.redact_conservative
    assert cfg.repository is None and cfg.digest == "sha256" and cfg.workers == 1


def test_full_config(base):
    cfg = ProjectConfig.from_dict(minimal(
        repository="repo", fail_policy="permissive", redact_conservative=False,
        limits={"max_depth": 4, "max_nodes": 100}, digest={"algorithm": "sha512"}, workers=3,
        scan={"exclude": ["tests/*"], "logger_names": ["log"]}), base)
    assert cfg.repository == (base / "repo").resolve()
    assert cfg.limits.max_depth == 4 and cfg.digest == "sha512"
    assert cfg.scan.exclude == ("tests/*",) and cfg.scan.logger_names == ("log",)


@pytest.mark.parametrize("extra, message", [
    ({"colour": "blue"}, "unknown keys"),
    ({"schema_version": 2}, "schema_version"),
    ({"root": "missing"}, "does not exist"),
    ({"fail_policy": "lenient"}, "fail_policy"),
    ({"limits": {"depth": 3}}, "limits"),
    ({"limits": {"max_depth": 0}}, "limits"),
    ({"digest": {"algorithm": "shake_128"}}, "digest"),
    ({"workers": 0}, "workers"),
    ({"log_pattern": "(?P<level>x)"}, "log_pattern"),
    ({"scan": {"languages": ["go"]}}, "scan"),
])
def test_invalid_values_rejected(base, extra, message):
    with pytest.raises(ConfigError) as exc:
        ProjectConfig.from_dict(minimal(**extra), base)
    assert message in str(exc.value)


def test_all_errors_collected(base):
    with pytest.raises(ConfigError) as exc:
        ProjectConfig.from_dict({"schema_version": 1, "fail_policy": "x"}, base)
    assert len(exc.value.errors) == 3


def test_load_config_relative_to_file(base):
    (base / "logredact.yaml").write_text("schema_version: 1\nroot: src\nannotations: ann.yaml\n")
    assert load_config(base / "logredact.yaml").annotations_path == (base / "ann.yaml").resolve()
    (base / "broken.yaml").write_text("root: [\n")
    with pytest.raises(ConfigError):
        load_config(base / "broken.yaml")

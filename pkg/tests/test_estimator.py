import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from logredact.estimator import SourceAwareRedactor

from conftest import CUSTOMER_ANNOTATIONS
from drift import SOURCE, write_drift_project

LOG = "INFO|app.py:9|customer Alice tenure 4\nINFO|app.py:11|report done\n"


@pytest.fixture
def root(tmp_path):
    return write_drift_project(tmp_path)


def test_fit_transform(root):
    est = SourceAwareRedactor(annotations=CUSTOMER_ANNOTATIONS).fit(root)
    assert est.n_functions_ == 2
    out = est.transform(LOG)
    assert out == ["INFO|app.py:9|customer [REDACTED:customers.name] tenure 4", "INFO|app.py:11|report done"]
    assert est.transform(LOG.splitlines()) == out
    assert est.redact_text(LOG) == "\n".join(out) + "\n"
    assert est.report_.exit_code == 0


def test_annotations_from_path(root):
    est = SourceAwareRedactor(annotations=str(root.parent / "annotations.yaml")).fit(root)
    assert [s.source_id for s in est.specs_] == ["customers"]


def test_not_fitted():
    with pytest.raises(NotFittedError):
        SourceAwareRedactor().transform(LOG)


def test_clone_and_params():
    est = SourceAwareRedactor(annotations=CUSTOMER_ANNOTATIONS, fail_policy="permissive", max_depth=5)
    params = est.get_params()
    assert params["fail_policy"] == "permissive" and params["max_depth"] == 5
    c = clone(est)
    assert c.get_params()["max_depth"] == 5
    c.set_params(max_depth=7)
    assert est.max_depth == 5


@pytest.mark.parametrize("params", [
    {"fail_policy": "lenient"}, {"max_depth": 0}, {"workers": -1}, {"digest": "shake_256"},
    {"redact_conservative": "yes"}, {"log_pattern": "(?P<level>.*)"},
])
def test_invalid_params_raise_at_fit(root, params):
    with pytest.raises(ValueError):
        SourceAwareRedactor(**params).fit(root)


def test_fit_rejects_bad_root(tmp_path):
    with pytest.raises(ValueError):
        SourceAwareRedactor().fit(tmp_path / "missing")
    with pytest.raises(TypeError):
        SourceAwareRedactor().fit(42)


def test_transform_rejects_embedded_newlines(root):
    est = SourceAwareRedactor(annotations=CUSTOMER_ANNOTATIONS).fit(root)
    with pytest.raises(ValueError):
        est.transform(["a\nb"])
    with pytest.raises(TypeError):
        est.transform([1, 2])


def test_explain(root):
    est = SourceAwareRedactor(annotations=CUSTOMER_ANNOTATIONS).fit(root)
    recs = est.explain(LOG)
    assert recs[0]["slots"][0]["attribute"] == "customers.name"
    assert "provenance" in recs[0]


def test_saved_repository_is_checked_for_staleness(root, tmp_path):
    from logredact.repository import StaleRepository, build_repository
    build_repository(root)[0].save(tmp_path / "repo")
    est = SourceAwareRedactor(annotations=CUSTOMER_ANNOTATIONS, repository=str(tmp_path / "repo"))
    est.fit(root)
    (root / "app.py").write_text(SOURCE["app.py"] + "\n")
    with pytest.raises(StaleRepository):
        est.fit(root)

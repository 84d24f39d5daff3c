import pytest

from logredact.annotations import parse_annotations
from logredact.logs import parse_log_line, resolve_statement
from logredact.oracle import run_oracle
from logredact.repository import build_repository
from logredact.tracer import CONSERVATIVE, EXACT, WHOLE_SOURCE, TraceLimits, find_call_sites, trace

from conftest import CUSTOMER_ANNOTATIONS

IO = """
    import csv


    def read_table(path):
        with open(path, newline="") as fh:
            return list(csv.DictReader(fh))
"""


def _trace(root, specs, path, line, limits=None):
    repo, _ = build_repository(root)
    ref = resolve_statement(parse_log_line(f"INFO|{path}:{line}|x"), repo)
    return trace(ref, repo, specs, limits)


def _found(prov, slot):
    return {(f.source_id, f.attribute, f.confidence) for f in prov.slots[slot]}


def test_single_function_chain(make_project, customer_specs):
    root = make_project({"m.py": """
        def f():
            rows = read_table("customers.csv")
            name = rows["name"]
            log.info("customer %s", name)
    """})
    prov = _trace(root, customer_specs, "m.py", 4)
    assert _found(prov, 0) == {("customers", "name", EXACT)}
    path = prov.paths[(0, "customers", "name")]
    repo, _ = build_repository(root)
    g = repo.get(path[0][0])
    assert g.nodes[path[0][1]].kind.value == "SourceRead"
    assert g.nodes[path[-1][1]].kind.value == "LogStatement"


def test_constant_slot_is_empty(make_project, customer_specs):
    root = make_project({"m.py": """
        def f():
            rows = read_table("customers.csv")
            log.info("%s and %s", rows["name"], "literal")
    """})
    prov = _trace(root, customer_specs, "m.py", 3)
    assert _found(prov, 0) == {("customers", "name", EXACT)}
    assert prov.slots[1] == []


def test_whole_source_without_key(make_project, customer_specs):
    root = make_project({"m.py": """
        def f():
            rows = read_table("customers.csv")
            log.info("dump %s", rows)
    """})
    prov = _trace(root, customer_specs, "m.py", 3)
    assert _found(prov, 0) == {("customers", a, WHOLE_SOURCE) for a in ("name", "email", "tenure")}


TWO_FUNCTION = {
    "io_utils.py": IO,
    "helpers.py": """
        import logging

        log = logging.getLogger(__name__)


        def churn(row):
            log.info("customer %s", row["name"])
            return row["tenure"]
    """,
    "main.py": """
        from io_utils import read_table
        from helpers import churn


        def load_customers():
            return read_table("customers.csv")


        def main():
            for row in load_customers():
                churn(row)


        main()
    """,
}


def test_two_function_case_agrees_with_oracle(make_project, customer_specs, tmp_path):
    root = make_project(TWO_FUNCTION)
    (root / "customers.csv").write_text("name,email,tenure\nAlice,a@x.com,3\n")
    prov = _trace(root, customer_specs, "helpers.py", 7)
    assert _found(prov, 0) == {("customers", "name", EXACT)}
    functions = {str(fid).split("@")[0] for fid, _ in prov.paths[(0, "customers", "name")]}
    assert {"main.py::load_customers", "main.py::main", "helpers.py::churn"} <= functions
    run = run_oracle(root, "main.py", customer_specs)
    assert run.lines == ["INFO|helpers.py:7|customer Alice"]
    assert run.flows_by_line() == {1: {(0, "customers", "name")}}


def test_call_sites_from_two_files(make_project):
    root = make_project({
        "lib.py": "def util(x):\n    return x\n\n\ndef unused(y):\n    return y\n",
        "a.py": "from lib import util\n\n\ndef fa(v):\n    return util(v)\n",
        "b.py": "import lib\n\n\ndef fb(v):\n    return lib.util(v)\n",
    })
    repo, _ = build_repository(root)
    util = next(f for f in repo.function_ids() if f.qualified_name == "util")
    unused = next(f for f in repo.function_ids() if f.qualified_name == "unused")
    assert sorted(fid.path for fid, _ in find_call_sites(util, repo)) == ["a.py", "b.py"]
    assert find_call_sites(unused, repo) == []


def test_shadowed_name_excluded(make_project):
    root = make_project({
        "lib.py": "def util(x):\n    return x\n",
        "a.py": "from lib import util\n\n\ndef fa(v):\n    return util(v)\n",
        "b.py": ("from lib import util\n\n\ndef fb(v):\n    def util(z):\n        return 0\n"
                 "    return util(v)\n"),
    })
    repo, _ = build_repository(root)
    lib_util = next(f for f in repo.function_ids() if f.path == "lib.py" and f.qualified_name == "util")
    callers = find_call_sites(lib_util, repo)
    assert [fid.path for fid, _ in callers] == ["a.py"]
    inner = next(f for f in repo.function_ids() if f.qualified_name == "fb.util")
    assert [fid.qualified_name for fid, _ in find_call_sites(inner, repo)] == ["fb"]


def test_keyword_arguments_map_by_name(make_project, customer_specs):
    root = make_project({"m.py": """
        def show(a, b):
            log.info("a=%s", a)


        def main():
            rows = read_table("customers.csv")
            show(b=rows["name"], a=rows["email"])
    """})
    prov = _trace(root, customer_specs, "m.py", 2)
    assert _found(prov, 0) == {("customers", "email", EXACT)}


def test_unresolved_call_is_conservative(make_project, customer_specs):
    root = make_project({"m.py": """
        import textwrap


        def f():
            rows = read_table("customers.csv")
            log.info("%s", textwrap.shorten(rows["name"], 5))
    """})
    prov = _trace(root, customer_specs, "m.py", 6)
    assert _found(prov, 0) == {("customers", "name", CONSERVATIVE)}


def test_recursion_terminates(make_project, customer_specs):
    root = make_project({"m.py": """
        def walk(x, n):
            if n:
                return walk(x, n - 1)
            log.info("got %s", x)
            return x


        def main():
            rows = read_table("customers.csv")
            walk(rows["name"], 3)
    """})
    prov = _trace(root, customer_specs, "m.py", 4)
    assert _found(prov, 0) == {("customers", "name", EXACT)}
    assert not prov.truncated


def test_truncation_is_conservative(make_project, customer_specs):
    root = make_project({"m.py": """
        def a(x):
            log.info("v %s", x)


        def b(x):
            a(x)


        def c(x):
            b(x)


        def main():
            rows = read_table("customers.csv")
            c(rows["name"])
    """})
    prov = _trace(root, customer_specs, "m.py", 2, TraceLimits(max_depth=1, max_nodes=100))
    assert prov.truncated
    assert ("customers", "name") in {(f.source_id, f.attribute) for f in prov.slots[0]}
    assert all(f.confidence == CONSERVATIVE for f in prov.slots[0])


@pytest.mark.parametrize("bad", [(0, 10), (3, -1)])
def test_limits_must_be_positive(bad):
    with pytest.raises(ValueError):
        TraceLimits(*bad)


def test_adding_a_spec_keeps_other_findings(make_project, customer_specs):
    root = make_project({"m.py": """
        def f():
            rows = read_table("customers.csv")
            other = read_table("orders.csv")
            log.info("%s %s", rows["name"], other["card"])
    """})
    before = _trace(root, customer_specs, "m.py", 4)
    doc = dict(CUSTOMER_ANNOTATIONS)
    doc["sources"] = doc["sources"] + [{"id": "orders", "match": "orders.csv",
                                        "attributes": [{"name": "card", "level": "HIGH", "rule": "MASK"}]}]
    after = _trace(root, parse_annotations(doc), "m.py", 4)
    assert _found(before, 0) <= _found(after, 0)
    assert before.slots[1] == [] and _found(after, 1) == {("orders", "card", EXACT)}


def test_slots_are_independent(make_project, customer_specs):
    root = make_project({"m.py": """
        def f():
            rows = read_table("customers.csv")
            a = rows["name"]
            b = rows["email"]
            log.info("%s|%s", a, b)
    """})
    prov = _trace(root, customer_specs, "m.py", 5)
    assert _found(prov, 0) == {("customers", "name", EXACT)}
    assert _found(prov, 1) == {("customers", "email", EXACT)}


def test_module_global_source(make_project, customer_specs):
    root = make_project({"m.py": """
        ROWS = read_table("customers.csv")


        def first_name():
            log.info("first %s", ROWS[0]["name"])
    """})
    prov = _trace(root, customer_specs, "m.py", 5)
    assert _found(prov, 0) == {("customers", "name", EXACT)}


def test_ambiguous_source_is_conservative(make_project):
    specs = parse_annotations({"schema_version": 1, "sources": [
        {"id": "fraud", "match": "data/fraud_*.csv", "attributes": [{"name": "card", "level": "HIGH", "rule": "MASK"}]},
        {"id": "all", "match": "data/*.csv", "attributes": [{"name": "card", "level": "LOW", "rule": "MASK"}]},
    ]})
    root = make_project({"m.py": """
        def f():
            rows = read_table("data/fraud_2024.csv")
            log.info("%s", rows["card"])
    """})
    prov = _trace(root, specs, "m.py", 3)
    assert _found(prov, 0) == {("fraud", "card", CONSERVATIVE), ("all", "card", CONSERVATIVE)}
    assert prov.diagnostics

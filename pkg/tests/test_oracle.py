import pytest

from logredact.oracle import Flow, OracleError, run_native, run_oracle
from logredact.progen import generate_program

from conftest import CUSTOMER_ANNOTATIONS
from oracles import soundness_misses

IO = """
    import csv


    def read_table(path):
        with open(path, newline="") as fh:
            return list(csv.DictReader(fh))
"""

CUSTOMERS = "name,email,tenure\nAlice,a@x.org,3\nBob,b@y.org,7\n"


def _project(make_project, main):
    root = make_project({"io_utils.py": IO, "main.py": main})
    (root / "customers.csv").write_text(CUSTOMERS)
    return root


def test_chain_flow(make_project, customer_specs):
    root = _project(make_project, """
        import logging
        from io_utils import read_table

        logger = logging.getLogger(__name__)


        def label(row):
            return "user " + row["name"]


        for row in read_table("customers.csv"):
            logger.info("%s has tenure %s", label(row), row["tenure"])
    """)
    run = run_oracle(root, "main.py", customer_specs)
    assert run.lines == ["INFO|main.py:12|user Alice has tenure 3", "INFO|main.py:12|user Bob has tenure 7"]
    assert set(run.flows) == {
        Flow(1, 0, "customers", "name"), Flow(1, 1, "customers", "tenure"),
        Flow(2, 0, "customers", "name"), Flow(2, 1, "customers", "tenure"),
    }
    assert run_native(root, "main.py") == run.lines


def test_constants_only_program_has_no_flows(make_project, customer_specs):
    root = _project(make_project, """
        import logging

        logger = logging.getLogger(__name__)
        total = 0
        for i in range(3):
            total += i
        logger.info("total %d", total)
    """)
    run = run_oracle(root, "main.py", customer_specs)
    assert run.lines == ["INFO|main.py:7|total 3"]
    assert run.flows == []


def test_control_dependence_is_not_a_flow(make_project, customer_specs):
    root = _project(make_project, """
        import logging
        from io_utils import read_table

        logger = logging.getLogger(__name__)
        for row in read_table("customers.csv"):
            if row["name"] == "Alice":
                logger.info("found one")
    """)
    run = run_oracle(root, "main.py", customer_specs)
    assert run.lines == ["INFO|main.py:7|found one"]
    assert run.flows == []


def test_unsupported_construct_raises(make_project, customer_specs):
    root = _project(make_project, """
        def gen():
            yield 1


        for x in gen():
            pass
    """)
    with pytest.raises(OracleError):
        run_oracle(root, "main.py", customer_specs)


def test_native_failure_raises(make_project):
    root = make_project({"main.py": "raise SystemExit(3)\n"})
    with pytest.raises(OracleError):
        run_native(root, "main.py")


@pytest.mark.parametrize("seed", [0, 1, 2, 3, 4])
def test_oracle_matches_native_on_generated_programs(tmp_path, seed):
    from logredact.annotations import parse_annotations
    prog = generate_program(seed)
    d = prog.write(tmp_path)
    run = run_oracle(d / "project", prog.entry, parse_annotations(prog.annotations), data_root=d)
    assert run.lines
    assert run_native(d / "project", prog.entry, data_root=d) == run.lines


@pytest.mark.parametrize("seed", range(10))
def test_generated_programs_are_sound(tmp_path, seed):
    prog = generate_program(seed)
    d = prog.write(tmp_path)
    misses, failures, _ = soundness_misses(d / "project", prog.entry, prog.annotations, d)
    assert failures == []
    assert misses == []


def test_generator_is_deterministic():
    assert generate_program(7).files == generate_program(7).files
    assert generate_program(7).files != generate_program(8).files


def test_sound_on_small_project(make_project):
    root = _project(make_project, """
        import logging
        from io_utils import read_table

        logger = logging.getLogger(__name__)
        rows = read_table("customers.csv")
        emails = [r["email"] for r in rows]
        logger.info("mailing %s", ", ".join(emails))
    """)
    misses, failures, run = soundness_misses(root, "main.py", CUSTOMER_ANNOTATIONS, root)
    assert run.flows == [Flow(1, 0, "customers", "email")]
    assert misses == [] and failures == []

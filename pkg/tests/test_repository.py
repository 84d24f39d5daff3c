import json
import random
import struct
import zlib

import pytest

from logredact.dfg import NodeKind
from logredact.parser import FunctionId
from logredact.progen import random_dfg
from logredact.repository import (
    INDEX_FILE, RECORDS_FILE, CorruptRecord, DfgRepository, DuplicateFunction, NotFound, StaleRepository,
    build_repository,
)

NESTED = {
    "app/nest.py": """
        import logging
        log = logging.getLogger(__name__)


        def f(x):
            y = x

            def g(z):
                log.info("inner %s", z)
                return z

            log.info("outer %s", y)
            return g(y)


        log.info("module level")
    """,
    "app/other.py": """
        def f(x):
            return x
    """,
}


def test_put_get_round_trip(corpus_repos):
    repo = corpus_repos["churn"]
    fresh = DfgRepository()
    for fid in repo.function_ids():
        fresh.put(repo.get(fid), repo.metadata(fid))
    for fid in repo.function_ids():
        assert fresh.get(fid) == repo.get(fid)
        assert fresh.metadata(fid) == repo.metadata(fid)


def test_duplicate_put_rejected():
    g = random_dfg(random.Random(0), 5)
    repo = DfgRepository()
    repo.put(g)
    with pytest.raises(DuplicateFunction):
        repo.put(g)


def test_same_name_in_two_files(make_project):
    repo, _ = build_repository(make_project(NESTED))
    fs = [fid for fid in repo.function_ids() if fid.qualified_name == "f"]
    assert {f.path for f in fs} == {"app/nest.py", "app/other.py"}


def test_unknown_id_not_found():
    with pytest.raises(NotFound):
        DfgRepository().get(FunctionId("x.py", "nope", 1))


def test_corpus_index_counts_and_lookup_totality(corpus_repos):
    assert sum(len(r) for r in corpus_repos.values()) == 60
    for repo in corpus_repos.values():
        for fid in repo.function_ids():
            for node in repo.get(fid).nodes_of(NodeKind.LOG):
                assert repo.resolve_location(fid.path, node.line) == fid


def test_innermost_function_wins(make_project):
    repo, _ = build_repository(make_project(NESTED))
    assert repo.resolve_location("app/nest.py", 9).qualified_name == "f.g"
    assert repo.resolve_location("app/nest.py", 12).qualified_name == "f"
    assert str(repo.resolve_location("app/nest.py", 16)) == "app/nest.py::__main__@1"
    with pytest.raises(NotFound):
        repo.resolve_location("app/missing.py", 3)


def test_save_load_round_trip(corpus_repos, tmp_path):
    repo = corpus_repos["fraud"]
    repo.save(tmp_path / "repo")
    loaded = DfgRepository.load(tmp_path / "repo")
    assert loaded.function_ids() == repo.function_ids()
    for fid in repo.function_ids():
        assert loaded.get(fid) == repo.get(fid)
        assert loaded.raw_record(fid) == repo.raw_record(fid)


def test_on_disk_framing(make_project, tmp_path):
    repo, _ = build_repository(make_project(NESTED))
    repo.save(tmp_path / "r")
    index = json.loads((tmp_path / "r" / INDEX_FILE).read_text())
    records = (tmp_path / "r" / RECORDS_FILE).read_bytes()
    for entry in index["functions"]:
        length, crc = struct.unpack_from("<II", records, entry["offset"])
        payload = records[entry["offset"] + 8: entry["offset"] + 8 + length]
        assert zlib.crc32(payload) == crc and entry["length"] == length + 8
        assert json.loads(payload)["dfg"]["id"] == entry["id"]


def test_corrupt_record_detected(make_project, tmp_path):
    repo, _ = build_repository(make_project(NESTED))
    repo.save(tmp_path / "r")
    raw = bytearray((tmp_path / "r" / RECORDS_FILE).read_bytes())
    raw[12] ^= 0xFF
    (tmp_path / "r" / RECORDS_FILE).write_bytes(bytes(raw))
    loaded = DfgRepository.load(tmp_path / "r")
    with pytest.raises(CorruptRecord):
        for fid in loaded.function_ids():
            loaded.get(fid)


def test_truncated_records_file_detected(make_project, tmp_path):
    repo, _ = build_repository(make_project(NESTED))
    repo.save(tmp_path / "r")
    raw = (tmp_path / "r" / RECORDS_FILE).read_bytes()
    (tmp_path / "r" / RECORDS_FILE).write_bytes(raw[:20])
    loaded = DfgRepository.load(tmp_path / "r")
    last = max(loaded.function_ids(), key=lambda f: loaded.by_id[f].offset)
    with pytest.raises(CorruptRecord):
        loaded.get(last)


def test_stale_repository_fails_at_open(make_project, tmp_path):
    root = make_project(NESTED)
    repo, _ = build_repository(root)
    repo.save(tmp_path / "r")
    DfgRepository.open(tmp_path / "r", root)
    (root / "app" / "other.py").write_text("def f(x):\n    return 2 * x\n")
    with pytest.raises(StaleRepository):
        DfgRepository.open(tmp_path / "r", root)


def test_incremental_build_reuses_unchanged_files(make_project):
    root = make_project(NESTED)
    first, _ = build_repository(root)
    (root / "app" / "other.py").write_text("def f(x):\n    y = x\n    return y\n")
    second, report = build_repository(root, previous=first)
    assert report.reused == ["app/nest.py"]
    full, _ = build_repository(root)
    assert second.function_ids() == full.function_ids()
    for fid in full.function_ids():
        assert second.get(fid) == full.get(fid)


def test_parse_failure_listed_not_fatal(make_project):
    files = dict(NESTED)
    files["app/broken.py"] = "def f(:\n"
    repo, report = build_repository(make_project(files))
    assert [p for p, _ in report.parse_failures] == ["app/broken.py"]
    assert "app/nest.py" in repo.paths()


@pytest.mark.parametrize("seed", range(10))
def test_random_graph_round_trip(seed, tmp_path):
    rng = random.Random(seed)
    repo = DfgRepository()
    graphs = []
    for i in range(5):
        g = random_dfg(rng, rng.randint(1, 30), FunctionId(f"g{seed}.py", f"f{i}", i + 1))
        repo.put(g)
        graphs.append(g)
    repo.save(tmp_path / "r")
    loaded = DfgRepository.load(tmp_path / "r")
    for g in graphs:
        assert loaded.get(g.id) == g

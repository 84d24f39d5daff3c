import random
import textwrap

import pytest

from logredact.dfg import BuildError, DfgEdge, DfgNode, FunctionDfg, NodeKind, build_dfg, check_slots, prune_dfg
from logredact.parser import FunctionId, SourceFile, parse_file
from logredact.progen import random_dfg

from oracles import nodes_reaching_sinks, source_sink_pairs


def _graph(src, name="f"):
    units = parse_file(SourceFile("m.py", textwrap.dedent(src)), frozenset(["m.py"]))
    unit = next(u for u in units if u.id.qualified_name == name)
    return build_dfg(unit)


def _shape(g):
    """Edges as (kind:name[:version], kind:name[:version]) pairs, ignoring node numbering."""
    def label(n):
        node = g.nodes[n]
        return f"{node.kind.value}:{node.name}" + (f":{node.version}" if node.version else "")
    return {(label(e.src), label(e.dst), e.slot) for e in g.edges}


def test_parameter_chain():
    g = _graph("""
        def f(p):
            x = p
            return x
    """)
    assert _shape(g) == {("Parameter:p", "VariableVersion:x:1", None), ("VariableVersion:x:1", "Return:return", None)}
    assert [n.name for n in g.entry] == ["p"]


def test_source_read_chain():
    g = prune_dfg(_graph("""
        def f(path):
            rows = read_table("customers.csv")
            name = rows["name"]
            log.info("customer %s", name)
    """))
    assert _shape(g) == {
        ("SourceRead:read_table", "VariableVersion:rows:1", None),
        ("VariableVersion:rows:1", "VariableVersion:name:1", None),
        ("VariableVersion:name:1", "LogStatement:log.info", 0),
    }
    src = g.nodes_of(NodeKind.SOURCE)[0]
    assert src.source_key == "customers.csv"
    select = next(e for e in g.edges if g.nodes[e.dst].name == "name")
    assert select.key == "name"
    log = g.nodes_of(NodeKind.LOG)[0]
    assert (log.format_string, log.slot_count) == ("customer %s", 1)


def test_reassignment_creates_versions():
    g = _graph("""
        def f(y):
            x = 1
            x = x + y
            return x
    """)
    shape = _shape(g)
    assert ("VariableVersion:x:1", "VariableVersion:x:2", None) in shape
    assert ("Parameter:y", "VariableVersion:x:2", None) in shape
    assert ("Constant:const", "VariableVersion:x:1", None) in shape


def test_dead_call_is_pruned():
    g = prune_dfg(_graph("""
        def f():
            tmp = noise()
            log.info("done")
    """))
    assert {n.name for n in g.nodes.values()} == {"log.info"}


def test_pruning_keeps_full_chain():
    g = _graph("""
        def f(p):
            x = p
            return x
    """)
    assert prune_dfg(g) == g


def test_call_with_arguments_survives_pruning():
    g = prune_dfg(_graph("""
        def f(q, row):
            q.push(row["name"])
    """))
    assert "q.push" in {n.name for n in g.nodes.values()}


def test_loop_back_edge():
    g = _graph("""
        def f(rows):
            acc = ""
            for r in rows:
                acc = acc + r
            return acc
    """)
    accs = {n.node_id: n.version for n in g.nodes.values() if n.name == "acc"}
    in_loop = max(v for v in accs.values() if v > 1) - 1
    back = [e for e in g.edges if accs.get(e.src) == in_loop and accs.get(e.dst) == in_loop]
    assert back, "loop-carried value must flow back to the in-loop use"


def test_branch_merge():
    g = _graph("""
        def f(a, b, c):
            if c:
                x = a
            else:
                x = b
            return x
    """)
    ret = g.nodes_of(NodeKind.RETURN)[0]
    from oracles import forward_reachable
    for p in g.entry:
        if p.name in ("a", "b"):
            assert ret.node_id in forward_reachable(g, p.node_id)


def test_unsupported_construct_is_opaque():
    g = _graph("""
        def f(a, b):
            x = lambda: a
            return x
    """)
    opaque = [n for n in g.nodes.values() if n.opaque]
    assert len(opaque) == 1 and g.diagnostics
    feeders = {g.nodes[e.src].name for e in g.inbound(opaque[0].node_id)}
    assert {"a", "b"} <= feeders


def test_check_slots_rejects_missing_slot():
    fid = FunctionId("m.py", "f", 1)
    log = DfgNode(0, NodeKind.LOG, "log.info", 2, format_string="%s %s", format_style="printf", slot_count=2)
    var = DfgNode(1, NodeKind.VARIABLE, "x", 1, version=1)
    g = FunctionDfg(fid, {0: log, 1: var}, [DfgEdge(1, 0, 0)])
    with pytest.raises(BuildError):
        check_slots(g)


@pytest.mark.parametrize("seed", range(40))
def test_prune_matches_bfs_on_small_random_graphs(seed):
    rng = random.Random(seed)
    g = random_dfg(rng, rng.randint(1, 20))
    p = prune_dfg(g)
    assert set(p.nodes) == nodes_reaching_sinks(g)
    assert source_sink_pairs(p) == source_sink_pairs(g)


def test_prune_is_idempotent():
    rng = random.Random(5)
    for _ in range(30):
        g = prune_dfg(random_dfg(rng, 25))
        assert prune_dfg(g) == g

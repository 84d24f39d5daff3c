"""Brute-force reference implementations used by the tests."""
from collections import deque

from logredact.dfg import NodeKind, SOURCE_KINDS


def forward_reachable(g, start):
    succ = {}
    for e in g.edges:
        succ.setdefault(e.src, []).append(e.dst)
    seen = {start}
    queue = deque([start])
    while queue:
        n = queue.popleft()
        for m in succ.get(n, ()):
            if m not in seen:
                seen.add(m)
                queue.append(m)
    return seen


def sink_ids(g):
    """Log statements, returns, and call sites with at least one argument edge."""
    out = set()
    for n in g.nodes.values():
        if n.kind in (NodeKind.LOG, NodeKind.RETURN):
            out.add(n.node_id)
        elif n.kind == NodeKind.CALL and any(e.dst == n.node_id and e.slot is not None for e in g.edges):
            out.add(n.node_id)
    return out


def source_sink_pairs(g):
    sinks = sink_ids(g)
    pairs = set()
    for n in g.nodes.values():
        if n.kind in SOURCE_KINDS:
            for m in forward_reachable(g, n.node_id) & sinks:
                pairs.add((n.node_id, m))
    return pairs


def nodes_reaching_sinks(g):
    sinks = sink_ids(g)
    return {n for n in g.nodes if forward_reachable(g, n) & sinks}


def all_bindings(tmpl, message, fits):
    """Every assignment of slot values consistent with the template, by exhaustive search."""
    lits = tmpl.literals
    out = []

    def go(i, pos, acc):
        if i == len(tmpl.slots):
            if pos == len(message):
                out.append(list(acc))
            return
        for end in range(pos, len(message) + 1):
            value = message[pos:end]
            if not fits(tmpl.slots[i].kind, value):
                continue
            nxt = lits[i + 1]
            if message.startswith(nxt, end):
                go(i + 1, end + len(nxt), acc + [(pos, end)])

    if message.startswith(lits[0]):
        go(0, len(lits[0]), [])
    return out


def soundness_misses(project, entry, annotations, data_root):
    """Dynamic flows that the static pipeline does not report, plus records it failed to handle.

    ``annotations`` is anything SourceAwareRedactor accepts. Each miss is
    ``(line_no, slot, source, attribute)``; each failure ``(line_no, kind)``.
    """
    from logredact.estimator import SourceAwareRedactor
    from logredact.oracle import run_oracle

    est = SourceAwareRedactor(annotations=annotations).fit(project)
    run = run_oracle(project, entry, est.specs_, data_root=data_root)
    records = {r["line_no"]: r for r in est.explain(run.lines)}
    failures = [(n, r["failure"]) for n, r in records.items() if "failure" in r]
    misses = []
    for line_no, flows in sorted(run.flows_by_line().items()):
        prov = records[line_no].get("provenance")
        for slot, sid, attr in sorted(flows):
            found = {(f["source"], f["attribute"]) for f in prov["slots"][slot]} if prov else set()
            if (sid, attr) not in found:
                misses.append((line_no, slot, sid, attr))
    return misses, failures, run

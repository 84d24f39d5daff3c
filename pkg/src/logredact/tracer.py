"""Backward, interprocedural provenance tracing from log slots to data sources.

The full program graph is never materialized: per-function graphs are pulled
from the repository on demand and stitched together through call sites
(arguments <-> parameters, returns -> call results) and module globals.
Linking is context-insensitive.
"""
from __future__ import annotations

import threading
import weakref
from collections import deque
from dataclasses import dataclass, field
from typing import NamedTuple

from .annotations import AmbiguousSource, DataSourceSpec, match_source
from .dfg import NodeKind, RECEIVER
from .logs import LogStatementRef
from .parser import EXTERNAL, MAIN, FunctionId
from .repository import DfgRepository, NotFound

EXACT = "exact"
WHOLE_SOURCE = "whole_source"
CONSERVATIVE = "conservative"
_RANK = {EXACT: 0, WHOLE_SOURCE: 1, CONSERVATIVE: 2}

# Builtin method names; a project method sharing one of these names cannot be
# told apart from the builtin by name alone.
COMMON_METHOD_NAMES = frozenset(
    n for t in (str, list, dict, set, int, float, bytes, tuple) for n in dir(t) if not n.startswith("_")
)


class Finding(NamedTuple):
    source_id: str
    attribute: str
    confidence: str


@dataclass(frozen=True)
class TraceLimits:
    max_depth: int = 32
    max_nodes: int = 20000

    def __post_init__(self):
        if self.max_depth <= 0 or self.max_nodes <= 0:
            raise ValueError("trace limits must be positive")


@dataclass
class ProvenanceReport:
    statement: LogStatementRef
    slots: list[list[Finding]]
    paths: dict[tuple[int, str, str], list[tuple[FunctionId, int]]] = field(default_factory=dict)
    truncated: bool = False
    diagnostics: list[str] = field(default_factory=list)

    def attributes(self, slot: int) -> set[tuple[str, str]]:
        return {(f.source_id, f.attribute) for f in self.slots[slot]}

    def to_dict(self) -> dict:
        return {
            "function": str(self.statement.function),
            "node": self.statement.node_id,
            "format": self.statement.format_string,
            "truncated": self.truncated,
            "slots": [
                [{"source": f.source_id, "attribute": f.attribute, "confidence": f.confidence,
                  "path": [f"{fid}#{nid}" for fid, nid in self.paths.get((i, f.source_id, f.attribute), [])]}
                 for f in slot]
                for i, slot in enumerate(self.slots)
            ],
            "diagnostics": self.diagnostics,
        }


class Resolution(NamedTuple):
    targets: tuple[FunctionId, ...]
    exact: bool
    bound: bool = False
    constructor: bool = False


UNRESOLVED = Resolution((), False)


class CallResolver:
    """Name resolution for call sites, using each caller's import metadata."""

    def __init__(self, repo: DfgRepository):
        self.repo = repo
        self.funcs: dict[str, dict[str, FunctionId]] = {}
        self.classes: dict[str, set[str]] = {}
        self.methods: dict[str, list[FunctionId]] = {}
        for fid in repo.function_ids():
            self.funcs.setdefault(fid.path, {})[fid.qualified_name] = fid
            meta = repo.metadata(fid)
            if meta is not None and meta.class_name:
                self.classes.setdefault(fid.path, set()).add(fid.qualified_name.rsplit(".", 1)[0])
                self.methods.setdefault(fid.qualified_name.rsplit(".", 1)[1], []).append(fid)
        self._cache: dict[tuple[FunctionId, int], Resolution] = {}
        self._callers: dict[FunctionId, list[tuple[FunctionId, int]]] | None = None
        self._lock = threading.Lock()

    def main_of(self, path: str) -> FunctionId | None:
        return self.funcs.get(path, {}).get(MAIN)

    def _in_module(self, path: str, name: str) -> Resolution | None:
        funcs = self.funcs.get(path, {})
        if name in funcs and name != MAIN:
            return Resolution((funcs[name],), True)
        if name in self.classes.get(path, set()):
            init = funcs.get(f"{name}.__init__")
            return Resolution((init,) if init else (), True, constructor=True)
        return None

    def resolve(self, caller: FunctionId, node) -> Resolution:
        key = (caller, node.node_id)
        hit = self._cache.get(key)
        if hit is None:
            hit = self._resolve(caller, node)
            self._cache[key] = hit
        return hit

    def _resolve(self, caller: FunctionId, node) -> Resolution:
        meta = self.repo.metadata(caller)
        if meta is None:
            return UNRESOLVED
        path = caller.path
        funcs = self.funcs.get(path, {})
        parts = node.name.split(".")
        imports = {i.name: i for i in meta.imports}
        if len(parts) == 1:
            name = parts[0]
            if caller.qualified_name != MAIN:
                scope = caller.qualified_name.split(".")
                for k in range(len(scope), 0, -1):
                    prefix = ".".join(scope[:k])
                    if prefix not in funcs:  # class scope; not visible to nested code
                        continue
                    cand = f"{prefix}.{name}"
                    if cand in funcs:
                        return Resolution((funcs[cand],), True)
                if name in meta.local_names:
                    return UNRESOLVED
            res = self._in_module(path, name)
            if res is not None:
                return res
            imp = imports.get(name)
            if imp is not None and imp.path != EXTERNAL and imp.symbol:
                res = self._in_module(imp.path, imp.symbol)
                if res is not None:
                    return res
            return UNRESOLVED

        base, method = ".".join(parts[:-1]), parts[-1]
        if node.has_receiver:
            if (meta.class_name and meta.params and base == meta.params[0].name
                    and caller.qualified_name.count(".") >= 1):
                cls = caller.qualified_name.rsplit(".", 1)[0]
                if f"{cls}.{method}" in funcs:
                    return Resolution((funcs[f"{cls}.{method}"],), True, bound=True)
            if base in self.classes.get(path, set()) and f"{base}.{method}" in funcs:
                return Resolution((funcs[f"{base}.{method}"],), True)
            imp = imports.get(base)
            if imp is not None and imp.path != EXTERNAL and imp.symbol:
                target = self.funcs.get(imp.path, {}).get(f"{imp.symbol}.{method}")
                if target is not None:
                    return Resolution((target,), True)
            cands = self.methods.get(method)
            if cands:
                return Resolution(tuple(sorted(cands)), method not in COMMON_METHOD_NAMES, bound=True)
            return UNRESOLVED
        # module-qualified call: helpers.f(...)
        imp = imports.get(base)
        if imp is not None and imp.path != EXTERNAL and imp.symbol is None:
            res = self._in_module(imp.path, method)
            if res is not None:
                return res
        return UNRESOLVED

    def callers(self, target: FunctionId) -> list[tuple[FunctionId, int]]:
        with self._lock:
            if self._callers is None:
                index: dict[FunctionId, list[tuple[FunctionId, int]]] = {}
                for fid in self.repo.function_ids():
                    g = self.repo.get(fid)
                    for n in g.nodes_of(NodeKind.CALL):
                        if n.opaque or n.passthrough:
                            continue
                        for t in self.resolve(fid, n).targets:
                            index.setdefault(t, []).append((fid, n.node_id))
                self._callers = {k: sorted(v) for k, v in index.items()}
        return self._callers.get(target, [])


def param_slots(node, res: Resolution, params) -> dict[int, set[int]]:
    """Map each parameter index of the callee to the call-site slots feeding it."""
    out: dict[int, set[int]] = {i: set() for i in range(len(params))}
    positional = [i for i, p in enumerate(params) if p.kind == "positional"]
    varargs = [i for i, p in enumerate(params) if p.kind == "varargs"]
    varkw = [i for i, p in enumerate(params) if p.kind == "varkw"]
    by_name = {p.name: i for i, p in enumerate(params) if p.kind in ("positional", "keyword_only")}
    queue = list(positional)
    if res.constructor and queue:
        queue = queue[1:]
    for slot, kw in enumerate(node.arg_keywords):
        if kw == RECEIVER:
            if res.bound and queue:
                out[queue.pop(0)].add(slot)
            continue
        if kw is None:
            if queue:
                out[queue.pop(0)].add(slot)
            else:
                for i in varargs:
                    out[i].add(slot)
        elif kw == "*":
            for i in queue + varargs:
                out[i].add(slot)
        elif kw == "**":
            for i in out:
                out[i].add(slot)
        elif kw in by_name:
            out[by_name[kw]].add(slot)
            if by_name[kw] in queue:
                queue.remove(by_name[kw])
        else:
            for i in varkw:
                out[i].add(slot)
    return out


_RESOLVERS: "weakref.WeakKeyDictionary[DfgRepository, CallResolver]" = weakref.WeakKeyDictionary()
_RESOLVERS_LOCK = threading.Lock()


def resolver_for(repo: DfgRepository) -> CallResolver:
    with _RESOLVERS_LOCK:
        r = _RESOLVERS.get(repo)
        if r is None:
            r = CallResolver(repo)
            _RESOLVERS[repo] = r
        return r


def find_call_sites(callee, repo: DfgRepository) -> list[tuple[FunctionId, int]]:
    """Every call site that may invoke ``callee`` (a FunctionId or a qualified name)."""
    resolver = resolver_for(repo)
    if isinstance(callee, FunctionId):
        targets = [callee]
    else:
        text = str(callee)
        targets = [FunctionId.parse(text)] if "::" in text else [
            fid for fid in repo.function_ids() if fid.qualified_name == text]
    out = []
    for t in targets:
        out.extend(resolver.callers(t))
    return sorted(set(out))


class _State(NamedTuple):
    fid: FunctionId
    node: int
    fld: str | None
    cons: bool


class Tracer:
    """Traces log statements against one repository and one set of annotations."""

    def __init__(self, repo: DfgRepository, specs: list[DataSourceSpec], limits: TraceLimits | None = None):
        self.repo = repo
        self.specs = list(specs)
        self.limits = limits or TraceLimits()
        self.resolver = resolver_for(repo)
        self._memo: dict[tuple[FunctionId, int], ProvenanceReport] = {}
        self._lock = threading.Lock()

    def trace(self, stmt: LogStatementRef) -> ProvenanceReport:
        key = (stmt.function, stmt.node_id)
        with self._lock:
            hit = self._memo.get(key)
        if hit is not None:
            return hit
        report = self._trace(stmt)
        with self._lock:
            return self._memo.setdefault(key, report)

    # -- helpers

    def _graph(self, fid):
        return self.repo.get(fid)

    def _all_conservative(self) -> list[Finding]:
        return [Finding(s.source_id, a, CONSERVATIVE) for s in self.specs for a in s.attribute_names]

    def _source_findings(self, node, fld, cons, diags) -> list[Finding]:
        key = node.source_key
        if key is None:
            diags.append(f"line {node.line}: source read with a non-literal key; assuming any source")
            return self._all_conservative()
        try:
            spec = match_source(key, self.specs)
        except AmbiguousSource as exc:
            diags.append(str(exc))
            cands = [s for s in self.specs if s.source_id in exc.candidates]
            return [Finding(s.source_id, a, CONSERVATIVE) for s in cands for a in s.attribute_names]
        if spec is None:
            return []
        if fld is not None:
            return [Finding(spec.source_id, fld, CONSERVATIVE if cons else EXACT)]
        conf = CONSERVATIVE if cons else WHOLE_SOURCE
        return [Finding(spec.source_id, a, conf) for a in spec.attribute_names]

    def _export_sources(self, fid: FunctionId, name: str) -> list[tuple[FunctionId, int]]:
        """Nodes that define a free variable read inside ``fid``: closures and module globals."""
        out = []
        r = self.resolver
        funcs = r.funcs.get(fid.path, {})
        if fid.qualified_name != MAIN:
            scope = fid.qualified_name.split(".")
            for k in range(len(scope) - 1, 0, -1):
                enclosing = funcs.get(".".join(scope[:k]))
                if enclosing is not None:
                    out += self._named_returns(enclosing, f"closure:{name}")
        meta = self.repo.metadata(fid)
        imports = {i.name: i for i in meta.imports} if meta else {}
        if "." in name:
            base, attr = name.rsplit(".", 1)
            imp = imports.get(base)
            if imp is not None and imp.path != EXTERNAL and imp.symbol is None:
                main = r.main_of(imp.path)
                if main is not None:
                    out += self._named_returns(main, f"global:{attr}")
            return out
        main = r.main_of(fid.path)
        if main is not None and main != fid:
            out += self._named_returns(main, f"global:{name}")
        for other in funcs.values():
            if other == fid:
                continue
            om = self.repo.metadata(other)
            if om is not None and name in om.global_names:
                out += self._named_returns(other, f"global:{name}")
        imp = imports.get(name)
        if imp is not None and imp.path != EXTERNAL and imp.symbol:
            main = r.main_of(imp.path)
            if main is not None:
                out += self._named_returns(main, f"global:{imp.symbol}")
        return out

    def _named_returns(self, fid, name) -> list[tuple[FunctionId, int]]:
        try:
            g = self._graph(fid)
        except NotFound:
            return []
        return [(fid, n.node_id) for n in g.nodes_of(NodeKind.RETURN) if n.name == name]

    # -- main loop

    def _trace(self, stmt: LogStatementRef) -> ProvenanceReport:
        g0 = self._graph(stmt.function)
        slots: list[dict[tuple[str, str], Finding]] = [dict() for _ in range(stmt.slot_count)]
        paths: dict[tuple[int, str, str], list[tuple[FunctionId, int]]] = {}
        diags: list[str] = []
        truncated = False
        budget = self.limits.max_nodes
        for slot in range(stmt.slot_count):
            found = slots[slot]
            parents: dict[_State, _State | None] = {}
            depth: dict[_State, int] = {}
            queue: deque[_State] = deque()
            unfinished = False

            def push(state, prev, d):
                if state not in parents:
                    parents[state] = prev
                    depth[state] = d
                    queue.append(state)

            for e in g0.inbound(stmt.node_id):
                if e.slot == slot:
                    push(_State(stmt.function, e.src, e.carry(None), False), None, 0)

            while queue:
                st = queue.popleft()
                budget -= 1
                if budget < 0:
                    unfinished = True
                    diags.append(f"slot {slot}: node budget of {self.limits.max_nodes} exhausted")
                    break
                d = depth[st]
                try:
                    g = self._graph(st.fid)
                except NotFound:
                    diags.append(f"{st.fid}: graph missing from repository; treated as opaque")
                    unfinished = True
                    continue
                node = g.nodes[st.node]
                kind = node.kind

                def follow_inbound(fld_fn, cons, slots_filter=None):
                    for e in g.inbound(st.node):
                        if slots_filter is not None and e.slot not in slots_filter:
                            continue
                        push(_State(st.fid, e.src, fld_fn(e), cons), st, d)

                if kind == NodeKind.SOURCE:
                    for f in self._source_findings(node, st.fld, st.cons, diags):
                        k = (f.source_id, f.attribute)
                        if k not in found or _RANK[f.confidence] < _RANK[found[k].confidence]:
                            found[k] = f
                            paths[(slot, *k)] = self._path(st, parents, stmt)
                    continue
                if kind in (NodeKind.CONSTANT, NodeKind.LOG):
                    continue
                if kind in (NodeKind.VARIABLE, NodeKind.RETURN):
                    follow_inbound(lambda e: e.carry(st.fld), st.cons)
                    if kind == NodeKind.VARIABLE and node.version == 0:
                        targets = self._export_sources(st.fid, node.name)
                        if targets and d + 1 > self.limits.max_depth:
                            unfinished = True
                            diags.append(f"slot {slot}: call depth limit reached at {st.fid}")
                            continue
                        for tfid, tnode in targets:
                            push(_State(tfid, tnode, st.fld, st.cons), st, d + 1)
                    continue
                if kind == NodeKind.PARAMETER:
                    follow_inbound(lambda e: e.carry(st.fld), st.cons)
                    callers = self.resolver.callers(st.fid)
                    if callers and d + 1 > self.limits.max_depth:
                        unfinished = True
                        diags.append(f"slot {slot}: call depth limit reached at {st.fid}")
                        continue
                    tmeta = self.repo.metadata(st.fid)
                    for cfid, cnode in callers:
                        cg = self._graph(cfid)
                        cn = cg.nodes[cnode]
                        res = self.resolver.resolve(cfid, cn)
                        feeding = param_slots(cn, res, tmeta.params).get(node.param_index, set())
                        for e in cg.inbound(cnode):
                            if e.slot in feeding:
                                push(_State(cfid, e.src, e.carry(st.fld), st.cons), st, d + 1)
                    continue
                # call sites
                if node.passthrough:
                    follow_inbound(lambda e: e.carry(st.fld), st.cons)
                    continue
                if node.opaque:
                    follow_inbound(lambda e: None if e.key is None else e.key, True)
                    continue
                res = self.resolver.resolve(st.fid, node)
                if res.targets:
                    if d + 1 > self.limits.max_depth:
                        unfinished = True
                        diags.append(f"slot {slot}: call depth limit reached at {st.fid}")
                        continue
                    wanted = ("self",) if res.constructor else ("return", "self")
                    for t in res.targets:
                        try:
                            tg = self._graph(t)
                        except NotFound:
                            diags.append(f"{t}: graph missing from repository; treated as opaque")
                            follow_inbound(lambda e: e.key, True)
                            continue
                        for r in tg.nodes_of(NodeKind.RETURN):
                            if r.name in wanted:
                                push(_State(t, r.node_id, st.fld, st.cons), st, d + 1)
                if not res.exact:
                    follow_inbound(lambda e: e.key, True)
            if unfinished:
                truncated = True
                for f in self._all_conservative():
                    k = (f.source_id, f.attribute)
                    found.setdefault(k, f)
        report_slots = [sorted(s.values()) for s in slots]
        return ProvenanceReport(stmt, report_slots, paths, truncated, diags)

    @staticmethod
    def _path(st, parents, stmt) -> list[tuple[FunctionId, int]]:
        out = []
        cur = st
        while cur is not None:
            out.append((cur.fid, cur.node))
            cur = parents[cur]
        out.append((stmt.function, stmt.node_id))
        return out


def trace(stmt: LogStatementRef, repo: DfgRepository, specs, limits: TraceLimits | None = None) -> ProvenanceReport:
    return Tracer(repo, specs, limits).trace(stmt)

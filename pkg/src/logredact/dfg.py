"""Per-function data-flow graphs.

Nodes are parameters, versioned variables, constants, call sites, log
statements, returns, and source reads. Edges point from the producer of a
value to its consumer. Each edge may carry a ``key`` (a literal-key
subscript such as ``row["name"]`` selected that field) or a ``mix`` flag
(the consumer combines its inputs, so any field structure is lost).
"""
from __future__ import annotations

import ast
import logging
from collections import defaultdict, deque
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple

from .parser import MAIN, FunctionId, FunctionUnit, DEFAULT_LOGGER_NAMES, DEFAULT_SOURCE_READERS, EXTERNAL
from .templates import LOG_METHODS, message_parts

logger = logging.getLogger(__name__)


class NodeKind(str, Enum):
    PARAMETER = "Parameter"
    VARIABLE = "VariableVersion"
    CONSTANT = "Constant"
    CALL = "CallSite"
    LOG = "LogStatement"
    RETURN = "Return"
    SOURCE = "SourceRead"


SOURCE_KINDS = (NodeKind.PARAMETER, NodeKind.CONSTANT, NodeKind.SOURCE)
SINK_KINDS = (NodeKind.LOG, NodeKind.RETURN)

RECEIVER = "<receiver>"

# Builtins whose result keeps the element structure of their arguments.
PASSTHROUGH_CALLS = frozenset({"enumerate", "zip", "list", "tuple", "reversed", "iter"})

# Methods that mutate their receiver in place.
MUTATING_METHODS = frozenset({
    "append", "extend", "insert", "pop", "remove", "clear", "sort", "reverse",
    "update", "setdefault", "popitem", "add", "discard", "__setitem__",
})


class BuildError(Exception):
    pass


@dataclass
class DfgNode:
    node_id: int
    kind: NodeKind
    name: str
    line: int
    version: int = 0
    end_line: int | None = None
    call_args: list[str] = field(default_factory=list)
    arg_keywords: list[str | None] = field(default_factory=list)
    opaque: bool = False
    passthrough: bool = False
    format_string: str | None = None
    format_style: str | None = None
    slot_count: int = 0
    level: str | None = None
    source_key: str | None = None
    param_index: int | None = None

    @property
    def arity(self) -> int:
        return self.slot_count if self.kind == NodeKind.LOG else len(self.call_args)

    @property
    def has_receiver(self) -> bool:
        return bool(self.arg_keywords) and self.arg_keywords[0] == RECEIVER

    def to_dict(self) -> dict:
        d = {"id": self.node_id, "kind": self.kind.value, "name": self.name, "line": self.line}
        for k in ("version", "end_line", "call_args", "arg_keywords", "opaque", "passthrough",
                  "format_string", "format_style", "slot_count", "level", "source_key", "param_index"):
            v = getattr(self, k)
            if k == "param_index" and v is not None or v not in (None, 0, False, []):
                d[k] = v
        return d

    @classmethod
    def from_dict(cls, d: dict) -> DfgNode:
        d = dict(d)
        return cls(node_id=d.pop("id"), kind=NodeKind(d.pop("kind")), **d)


class DfgEdge(NamedTuple):
    src: int
    dst: int
    slot: int | None = None
    key: str | None = None
    mix: bool = False

    def carry(self, fld: str | None) -> str | None:
        """Field selection seen on the source side when walking this edge backwards."""
        if self.key is not None:
            return self.key
        return None if self.mix else fld


@dataclass
class FunctionDfg:
    id: FunctionId
    nodes: dict[int, DfgNode] = field(default_factory=dict)
    edges: list[DfgEdge] = field(default_factory=list)
    diagnostics: list[str] = field(default_factory=list)

    def __post_init__(self):
        self._inbound = None

    def __eq__(self, other):
        if not isinstance(other, FunctionDfg):
            return NotImplemented
        return (self.id, self.nodes, sorted(self.edges, key=_edge_key), self.diagnostics) == (
            other.id, other.nodes, sorted(other.edges, key=_edge_key), other.diagnostics)

    @property
    def entry(self) -> list[DfgNode]:
        return sorted((n for n in self.nodes.values() if n.kind == NodeKind.PARAMETER), key=lambda n: n.param_index)

    @property
    def sinks(self) -> list[DfgNode]:
        return [n for n in self.nodes.values() if is_sink(self, n)]

    def inbound(self, node_id: int) -> list[DfgEdge]:
        if self._inbound is None:
            idx = defaultdict(list)
            for e in self.edges:
                idx[e.dst].append(e)
            self._inbound = idx
        return self._inbound.get(node_id, [])

    def nodes_of(self, kind: NodeKind) -> list[DfgNode]:
        return [n for n in self.nodes.values() if n.kind == kind]

    def log_statements_at(self, line: int) -> list[DfgNode]:
        hits = [n for n in self.nodes.values()
                if n.kind == NodeKind.LOG and n.line <= line <= (n.end_line or n.line)]
        return sorted(hits, key=lambda n: (n.line, n.node_id))

    def to_dict(self) -> dict:
        return {
            "id": str(self.id),
            "nodes": [self.nodes[k].to_dict() for k in sorted(self.nodes)],
            "edges": [list(e) for e in sorted(self.edges, key=_edge_key)],
            "diagnostics": list(self.diagnostics),
        }

    @classmethod
    def from_dict(cls, d: dict) -> FunctionDfg:
        nodes = {n["id"]: DfgNode.from_dict(n) for n in d["nodes"]}
        edges = [DfgEdge(*e) for e in d["edges"]]
        return cls(FunctionId.parse(d["id"]), nodes, edges, list(d.get("diagnostics", [])))


def is_sink(g: FunctionDfg, n: DfgNode) -> bool:
    """Log statements, returns, and call sites that take arguments.

    Arguments leave the function through a call site, so a call with at least
    one argument edge is where this function's data flows into another one.
    """
    if n.kind in SINK_KINDS:
        return True
    return n.kind == NodeKind.CALL and any(e.slot is not None for e in g.inbound(n.node_id))


def _edge_key(e: DfgEdge):
    return (e.src, e.dst, -1 if e.slot is None else e.slot, e.key or "", e.mix)


@dataclass(frozen=True)
class BuildContext:
    logger_names: tuple[str, ...] = DEFAULT_LOGGER_NAMES
    source_readers: tuple[str, ...] = DEFAULT_SOURCE_READERS
    project_methods: frozenset[str] = frozenset()


class Producer(NamedTuple):
    node: int
    key: str | None = None
    mix: bool = False


def _mixed(ps):
    return [Producer(p.node, p.key, True) for p in ps]


def _select(ps, key):
    return [p if (p.key is not None or p.mix) else Producer(p.node, key, False) for p in ps]


def dotted_name(expr) -> str | None:
    parts = []
    while isinstance(expr, ast.Attribute):
        parts.append(expr.attr)
        expr = expr.value
    if isinstance(expr, ast.Name):
        parts.append(expr.id)
        return ".".join(reversed(parts))
    return None


def root_name(expr) -> str | None:
    while isinstance(expr, (ast.Attribute, ast.Subscript, ast.Starred)):
        expr = expr.value
    return expr.id if isinstance(expr, ast.Name) else None


def is_log_call(callee: str | None, logger_names) -> bool:
    if not callee or "." not in callee:
        return False
    base, method = callee.rsplit(".", 1)
    return method in LOG_METHODS and base in logger_names


def source_key_of(call: ast.Call) -> str | None:
    args = list(call.args)
    if args and isinstance(args[0], ast.Constant) and isinstance(args[0].value, str):
        return args[0].value
    for kw in call.keywords:
        if kw.arg in ("path", "name", "source", "table", "filepath_or_buffer") and isinstance(kw.value, ast.Constant):
            if isinstance(kw.value.value, str):
                return kw.value.value
    return None


class _Builder:
    def __init__(self, unit: FunctionUnit, ctx: BuildContext):
        self.unit = unit
        self.meta = unit.metadata
        self.ctx = ctx
        self.nodes: dict[int, DfgNode] = {}
        self.edges: list[DfgEdge] = []
        self.edge_set: set[DfgEdge] = set()
        self.env: dict[str, int] = {}
        self.versions: dict[str, int] = defaultdict(int)
        self.free: dict[str, int] = {}
        self.all_versions: dict[str, list[int]] = defaultdict(list)
        self.edge_logs: list[list[DfgEdge]] = []
        self.loops: list[dict] = []
        self.diagnostics: list[str] = []
        self.module_names = {i.name for i in self.meta.imports if i.symbol is None}

    # -- graph primitives

    def node(self, kind, name, line, **kw) -> int:
        nid = len(self.nodes)
        self.nodes[nid] = DfgNode(nid, kind, name, line, **kw)
        return nid

    def edge(self, src, dst, slot=None, key=None, mix=False):
        e = DfgEdge(src, dst, slot, key, mix)
        if e in self.edge_set:
            return
        self.edge_set.add(e)
        self.edges.append(e)
        for log in self.edge_logs:
            log.append(e)

    def feed(self, producers, dst, slot=None):
        for p in producers:
            self.edge(p.node, dst, slot, p.key, p.mix)

    def const(self, line) -> int:
        return self.node(NodeKind.CONSTANT, "const", line)

    def lookup(self, name: str, line: int) -> int:
        if name in self.env:
            return self.env[name]
        if name not in self.free:
            self.free[name] = self.node(NodeKind.VARIABLE, name, line, version=0)
        return self.free[name]

    def new_version(self, name: str, producers, line: int) -> int:
        self.versions[name] += 1
        nid = self.node(NodeKind.VARIABLE, name, line, version=self.versions[name])
        self.feed(producers, nid)
        self.env[name] = nid
        self.all_versions[name].append(nid)
        return nid

    def in_scope(self, line) -> list[Producer]:
        return [Producer(n, None, True) for n in sorted(set(self.env.values()) | set(self.free.values()))]

    def opaque(self, what: str, line: int) -> int:
        self.diagnostics.append(f"line {line}: unsupported construct {what}; treated as opaque")
        nid = self.node(NodeKind.CALL, f"<opaque:{what}>", line, opaque=True)
        self.feed(self.in_scope(line), nid)
        return nid

    # -- build

    def build(self) -> FunctionDfg:
        body = self.unit.body
        if isinstance(body, ast.Module):
            stmts = body.body
        else:
            args = body.args
            defaults = dict(zip([a.arg for a in (args.posonlyargs + args.args)][::-1], args.defaults[::-1]))
            defaults.update({a.arg: d for a, d in zip(args.kwonlyargs, args.kw_defaults) if d is not None})
            for i, p in enumerate(self.meta.params):
                nid = self.node(NodeKind.PARAMETER, p.name, body.lineno, param_index=i)
                if p.name in defaults:
                    self.feed(self.expr(defaults[p.name]), nid)
                self.env[p.name] = nid
                self.all_versions[p.name].append(nid)
            stmts = body.body
        self.stmts(stmts)
        self.exports()
        for nid, n in list(self.nodes.items()):
            if n.kind in (NodeKind.VARIABLE, NodeKind.CALL, NodeKind.RETURN) and not self._has_inbound(nid):
                self.edge(self.const(n.line), nid)
        g = FunctionDfg(self.meta.id, self.nodes, self.edges, self.diagnostics)
        return g

    def _has_inbound(self, nid):
        if not hasattr(self, "_dsts") or self._dsts_n != len(self.edges):
            self._dsts = {e.dst for e in self.edges}
            self._dsts_n = len(self.edges)
        return nid in self._dsts

    def exports(self):
        end = self.meta.end_line or 1
        is_main = self.meta.id.qualified_name == MAIN
        if is_main:
            names = sorted(self.all_versions)
            for name in names:
                rid = self.node(NodeKind.RETURN, f"global:{name}", end)
                self.feed([Producer(v) for v in self.all_versions[name]], rid)
            return
        for name in self.meta.global_names:
            if self.all_versions.get(name):
                rid = self.node(NodeKind.RETURN, f"global:{name}", end)
                self.feed([Producer(v) for v in self.all_versions[name]], rid)
        for name in sorted(self._closure_reads()):
            if self.all_versions.get(name):
                rid = self.node(NodeKind.RETURN, f"closure:{name}", end)
                self.feed([Producer(v) for v in self.all_versions[name]], rid)
        if self.meta.class_name and self.meta.params:
            first = self.meta.params[0].name
            if len(self.all_versions.get(first, [])) > 1:
                rid = self.node(NodeKind.RETURN, "self", end)
                self.feed([Producer(v) for v in self.all_versions[first]], rid)

    def _closure_reads(self) -> set[str]:
        names = set()
        for st in ast.walk(self.unit.body):
            if st is self.unit.body:
                continue
            if isinstance(st, (ast.FunctionDef, ast.AsyncFunctionDef, ast.Lambda)):
                for n in ast.walk(st):
                    if isinstance(n, ast.Name) and isinstance(n.ctx, ast.Load):
                        names.add(n.id)
        return names

    # -- statements

    def stmts(self, body):
        for st in body:
            self.stmt(st)

    def stmt(self, st):
        line = getattr(st, "lineno", 0)
        if isinstance(st, ast.Assign):
            v = st.value
            if (len(st.targets) == 1 and isinstance(st.targets[0], (ast.Tuple, ast.List))
                    and isinstance(v, (ast.Tuple, ast.List)) and len(v.elts) == len(st.targets[0].elts)
                    and not any(isinstance(x, ast.Starred) for x in st.targets[0].elts + v.elts)):
                parts = [self.expr(x) for x in v.elts]
                for t, p in zip(st.targets[0].elts, parts):
                    self.assign(t, p, line)
                return
            ps = self.expr(v)
            for t in st.targets:
                self.assign(t, ps, line)
        elif isinstance(st, ast.AnnAssign):
            if st.value is not None:
                self.assign(st.target, self.expr(st.value), line)
        elif isinstance(st, ast.AugAssign):
            ps = _mixed(self.expr(st.value))
            if isinstance(st.target, ast.Name):
                old = self.lookup(st.target.id, line)
                self.new_version(st.target.id, [Producer(old, None, True)] + ps, line)
            else:
                self.assign(st.target, ps, line)
        elif isinstance(st, ast.Expr):
            self.expr(st.value)
        elif isinstance(st, ast.Return):
            ps = self.expr(st.value) if st.value is not None else []
            rid = self.node(NodeKind.RETURN, "return", line)
            self.feed(ps, rid)
        elif isinstance(st, ast.If):
            self.expr(st.test)
            self.branches([st.body, st.orelse])
        elif isinstance(st, (ast.For, ast.AsyncFor)):
            self.loop(st, line)
        elif isinstance(st, ast.While):
            self.loop(st, line)
        elif isinstance(st, (ast.With, ast.AsyncWith)):
            for item in st.items:
                ps = self.expr(item.context_expr)
                if item.optional_vars is not None:
                    self.assign(item.optional_vars, _mixed(ps), line)
            self.stmts(st.body)
        elif isinstance(st, ast.Try):
            self.try_stmt(st)
        elif isinstance(st, ast.Break):
            if self.loops:
                self.loops[-1]["breaks"].append(dict(self.env))
        elif isinstance(st, ast.Continue):
            if self.loops:
                self.loops[-1]["continues"].append(dict(self.env))
        elif isinstance(st, (ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef)):
            for dec in st.decorator_list:
                self.expr(dec)
            self.new_version(st.name, [], line)
        elif isinstance(st, (ast.Import, ast.ImportFrom, ast.Pass, ast.Global, ast.Nonlocal)):
            pass
        elif isinstance(st, (ast.Assert, ast.Raise, ast.Delete)):
            for child in ast.iter_child_nodes(st):
                if isinstance(child, ast.expr) and not isinstance(getattr(child, "ctx", None), ast.Del):
                    self.expr(child)
        else:
            nid = self.opaque(type(st).__name__, line)
            for n in ast.walk(st):
                if isinstance(n, ast.Name) and isinstance(n.ctx, ast.Store):
                    self.new_version(n.id, [Producer(nid)], line)

    def assign(self, target, ps, line):
        if isinstance(target, ast.Name):
            self.new_version(target.id, ps, line)
        elif isinstance(target, (ast.Tuple, ast.List)):
            # unpacking keeps element structure, like an integer subscript
            for t in target.elts:
                self.assign(t, ps, line)
        elif isinstance(target, ast.Starred):
            self.assign(target.value, ps, line)
        elif isinstance(target, (ast.Attribute, ast.Subscript)):
            extra = []
            if isinstance(target, ast.Subscript):
                extra = _mixed(self.expr(target.slice))
            base = root_name(target)
            if base is None:
                self.expr(target.value)
                return
            old = self.lookup(base, line)
            self.new_version(base, [Producer(old)] + _mixed(ps) + extra, line)
        else:
            self.opaque(f"assignment target {type(target).__name__}", line)

    def merge(self, envs, line):
        names = sorted(set().union(*[e.keys() for e in envs])) if envs else []
        out = {}
        for name in names:
            vals = []
            for e in envs:
                if name in e and e[name] not in vals:
                    vals.append(e[name])
            if len(vals) == 1 and all(name in e for e in envs):
                out[name] = vals[0]
            else:
                self.versions[name] += 1
                nid = self.node(NodeKind.VARIABLE, name, line, version=self.versions[name])
                for v in vals:
                    self.edge(v, nid)
                self.all_versions[name].append(nid)
                out[name] = nid
        self.env = out

    def branches(self, bodies):
        start = dict(self.env)
        ends = []
        line = 0
        for body in bodies:
            self.env = dict(start)
            self.stmts(body)
            ends.append(self.env)
            if body:
                line = max(line, getattr(body[-1], "end_lineno", 0) or 0)
        self.merge(ends, line)

    def loop(self, st, line):
        is_for = isinstance(st, (ast.For, ast.AsyncFor))
        iter_ps = self.expr(st.iter) if is_for else None
        start = dict(self.env)
        log: list[DfgEdge] = []
        self.edge_logs.append(log)
        frame = {"breaks": [], "continues": []}
        self.loops.append(frame)
        if is_for:
            self.assign(st.target, iter_ps, line)
        else:
            self.expr(st.test)
        self.stmts(st.body)
        self.loops.pop()
        self.edge_logs.pop()
        end = dict(self.env)
        heads = [end] + frame["continues"]
        names = set().union(*[h.keys() for h in heads])
        for name in sorted(names):
            pre = start.get(name, self.free.get(name))
            if pre is None:
                continue
            uses = [e for e in log if e.src == pre]
            for h in heads:
                last = h.get(name)
                if last is None or last == pre:
                    continue
                for e in uses:
                    self.edge(last, e.dst, e.slot, e.key, e.mix)
        self.merge([start, end] + frame["continues"] + frame["breaks"], getattr(st, "end_lineno", line) or line)
        if st.orelse:
            self.branches([st.orelse, []])

    def try_stmt(self, st):
        start = dict(self.env)
        before = {k: len(v) for k, v in self.all_versions.items()}
        self.stmts(st.body)
        body_env = dict(self.env)
        entry = dict(start)
        line = getattr(st, "lineno", 0)
        for name, vs in self.all_versions.items():
            new = vs[before.get(name, 0):]
            if not new:
                continue
            cands = ([start[name]] if name in start else []) + new
            self.versions[name] += 1
            nid = self.node(NodeKind.VARIABLE, name, line, version=self.versions[name])
            for c in cands:
                self.edge(c, nid)
            entry[name] = nid
        ends = []
        for h in st.handlers:
            self.env = dict(entry)
            if h.type is not None:
                self.expr(h.type)
            if h.name:
                self.new_version(h.name, [], h.lineno)
            self.stmts(h.body)
            ends.append(self.env)
        self.env = body_env
        self.stmts(st.orelse)
        ends.append(self.env)
        self.merge(ends, line)
        self.stmts(st.finalbody)

    # -- expressions

    def expr(self, e) -> list[Producer]:
        if e is None:
            return []
        line = getattr(e, "lineno", 0)
        if isinstance(e, ast.Constant):
            return []
        if isinstance(e, ast.Name):
            return [Producer(self.lookup(e.id, line))]
        if isinstance(e, ast.Attribute):
            dn = dotted_name(e)
            if dn and dn.split(".", 1)[0] in self.module_names:
                return [Producer(self.lookup(dn, line))]
            return self.expr(e.value)
        if isinstance(e, ast.Subscript):
            base = self.expr(e.value)
            idx = e.slice
            if isinstance(idx, ast.Constant) and isinstance(idx.value, str):
                return _select(base, idx.value)
            if isinstance(idx, ast.Constant) and isinstance(idx.value, int):
                return base
            if isinstance(idx, ast.Slice):
                return base + _mixed(self.expr(idx))
            return _mixed(base) + _mixed(self.expr(idx))
        if isinstance(e, ast.Call):
            return self.call(e)
        if isinstance(e, ast.BinOp):
            return _mixed(self.expr(e.left) + self.expr(e.right))
        if isinstance(e, ast.BoolOp):
            return _mixed([p for v in e.values for p in self.expr(v)])
        if isinstance(e, ast.Compare):
            return _mixed(self.expr(e.left) + [p for c in e.comparators for p in self.expr(c)])
        if isinstance(e, ast.UnaryOp):
            return _mixed(self.expr(e.operand))
        if isinstance(e, ast.IfExp):
            self.expr(e.test)
            return self.expr(e.body) + self.expr(e.orelse)
        if isinstance(e, ast.JoinedStr):
            return _mixed([p for v in e.values for p in self.expr(v)])
        if isinstance(e, ast.FormattedValue):
            return _mixed(self.expr(e.value) + (self.expr(e.format_spec) if e.format_spec else []))
        if isinstance(e, (ast.List, ast.Tuple, ast.Set)):
            return [p for v in e.elts for p in self.expr(v)]
        if isinstance(e, ast.Starred):
            return self.expr(e.value)
        if isinstance(e, ast.Dict):
            return _mixed([p for v in list(e.keys) + list(e.values) if v is not None for p in self.expr(v)])
        if isinstance(e, (ast.ListComp, ast.SetComp, ast.GeneratorExp)):
            return self.comprehension(e.generators, [e.elt], mix=False)
        if isinstance(e, ast.DictComp):
            return self.comprehension(e.generators, [e.key, e.value], mix=True)
        if isinstance(e, ast.NamedExpr):
            ps = self.expr(e.value)
            return [Producer(self.new_version(e.target.id, ps, line))]
        if isinstance(e, ast.Slice):
            return _mixed([p for v in (e.lower, e.upper, e.step) if v is not None for p in self.expr(v)])
        if isinstance(e, ast.Await):
            return self.expr(e.value)
        if isinstance(e, (ast.Yield, ast.YieldFrom)):
            ps = self.expr(e.value) if e.value is not None else []
            rid = self.node(NodeKind.RETURN, "return", line)
            self.feed(ps, rid)
            return []
        return [Producer(self.opaque(type(e).__name__, line))]

    def comprehension(self, generators, elts, mix):
        saved = dict(self.env)
        for gen in generators:
            ps = self.expr(gen.iter)
            self.assign(gen.target, ps, getattr(gen.iter, "lineno", 0))
            for cond in gen.ifs:
                self.expr(cond)
        out = [p for e in elts for p in self.expr(e)]
        self.env = saved
        return _mixed(out) if mix else out

    def call(self, e: ast.Call) -> list[Producer]:
        line = e.lineno
        func = e.func
        callee = dotted_name(func)
        if is_log_call(callee, self.ctx.logger_names):
            self.log_statement(e, callee)
            return []
        if callee in self.ctx.source_readers:
            for a in list(e.args) + [k.value for k in e.keywords]:
                self.expr(a)
            nid = self.node(NodeKind.SOURCE, callee, line, source_key=source_key_of(e), end_line=e.end_lineno)
            return [Producer(nid)]
        if (isinstance(func, ast.Attribute) and func.attr == "get" and not e.keywords and 1 <= len(e.args) <= 2
                and isinstance(e.args[0], ast.Constant) and isinstance(e.args[0].value, str)
                and (dotted_name(func.value) or "").split(".", 1)[0] not in self.module_names):
            base = self.expr(func.value)
            default = _mixed(self.expr(e.args[1])) if len(e.args) > 1 else []
            return _select(base, e.args[0].value) + default

        call_args, keywords, inputs = [], [], []
        has_receiver = False
        if isinstance(func, ast.Attribute) and not (callee and callee.rsplit(".", 1)[0] in self.module_names):
            has_receiver = True
            call_args.append(ast.unparse(func.value))
            keywords.append(RECEIVER)
            inputs.append(self.expr(func.value))
        opaque_callee = callee is None and not isinstance(func, ast.Attribute)
        for a in e.args:
            if isinstance(a, ast.Starred):
                call_args.append(ast.unparse(a.value))
                keywords.append("*")
                inputs.append(self.expr(a.value))
            else:
                call_args.append(ast.unparse(a))
                keywords.append(None)
                inputs.append(self.expr(a))
        for k in e.keywords:
            call_args.append(ast.unparse(k.value))
            keywords.append(k.arg if k.arg is not None else "**")
            inputs.append(self.expr(k.value))
        name = callee if callee is not None else (
            f"{ast.unparse(func.value)}.{func.attr}" if isinstance(func, ast.Attribute) else ast.unparse(func))
        passthrough = callee in PASSTHROUGH_CALLS
        nid = self.node(NodeKind.CALL, name, line, end_line=e.end_lineno, call_args=call_args,
                        arg_keywords=keywords, passthrough=passthrough, opaque=opaque_callee)
        for slot, ps in enumerate(inputs):
            self.feed(ps, nid, slot)
        if opaque_callee:
            self.diagnostics.append(f"line {line}: call through computed callee {name}; treated as opaque")
            self.feed(_mixed(self.expr(func)), nid)
        if has_receiver and (func.attr in MUTATING_METHODS or func.attr in self.ctx.project_methods):
            base = root_name(func.value)
            if base is not None:
                old = self.lookup(base, line)
                self.new_version(base, [Producer(old), Producer(nid, None, True)], line)
        return [Producer(nid)]

    def log_statement(self, e: ast.Call, callee: str):
        parts = message_parts(e)
        method = callee.rsplit(".", 1)[1]
        if method == "log":
            level = ast.unparse(e.args[0]) if e.args else "LOG"
        else:
            level = {"warn": "WARNING", "fatal": "CRITICAL", "exception": "ERROR"}.get(method, method.upper())
        nid = self.node(
            NodeKind.LOG, callee, e.lineno, end_line=e.end_lineno,
            call_args=[ast.unparse(x) for x in parts.slot_exprs],
            format_string=parts.format_string, format_style=parts.style,
            slot_count=len(parts.slot_exprs), level=level,
        )
        if parts.style == "opaque":
            self.diagnostics.append(f"line {e.lineno}: log message is not a supported format; no template")
            for a in e.args:
                self.feed(_mixed(self.expr(a)), nid)
            return
        for i, se in enumerate(parts.slot_exprs):
            ps = self.expr(se)
            if not ps:
                ps = [Producer(self.const(e.lineno))]
            self.feed(ps, nid, i)


def build_dfg(unit: FunctionUnit, context: BuildContext | None = None) -> FunctionDfg:
    """Build the (unpruned) data-flow graph of one function unit."""
    return _Builder(unit, context or BuildContext()).build()


def prune_dfg(g: FunctionDfg) -> FunctionDfg:
    """Drop every node that cannot reach a sink (see :func:`is_sink`)."""
    preds = defaultdict(list)
    for e in g.edges:
        preds[e.dst].append(e.src)
    keep = set()
    queue = deque(n.node_id for n in g.nodes.values() if is_sink(g, n))
    keep.update(queue)
    while queue:
        n = queue.popleft()
        for p in preds[n]:
            if p not in keep:
                keep.add(p)
                queue.append(p)
    nodes = {k: v for k, v in g.nodes.items() if k in keep}
    edges = [e for e in g.edges if e.src in keep and e.dst in keep]
    return FunctionDfg(g.id, nodes, edges, list(g.diagnostics))


def check_slots(g: FunctionDfg) -> None:
    """Every templated log statement must have inbound edges for exactly its slots."""
    for n in g.nodes_of(NodeKind.LOG):
        if n.format_style == "opaque":
            continue
        slots = {e.slot for e in g.inbound(n.node_id)}
        if slots != set(range(n.slot_count)):
            raise BuildError(f"{g.id}: log statement at line {n.line} has slots {sorted(s for s in slots if s is not None)}"
                             f" but expects {n.slot_count}")


__all__ = [
    "NodeKind", "DfgNode", "DfgEdge", "FunctionDfg", "BuildContext", "BuildError",
    "build_dfg", "prune_dfg", "check_slots", "is_sink", "dotted_name", "is_log_call", "EXTERNAL",
]

"""Dynamic taint oracle: an interpreter for the analyzed subset that carries labels.

Values are wrapped as ``TV(value, labels)`` where a label is
``(source_id, attribute)``. Containers hold wrapped elements, so selecting
``row["name"]`` yields exactly the label of that cell. Any native operation
(arithmetic, builtins, external library calls) sees unwrapped values and its
result carries the union of every label that went in. Log calls are
recognized syntactically, rendered as the configured logger would render
them, and the labels reaching each format slot are recorded.

The interpreter is test infrastructure. It raises :class:`OracleError` on
constructs outside the subset instead of guessing.
"""
from __future__ import annotations

import ast
import builtins
import csv
import importlib
import logging
from dataclasses import dataclass, field
from pathlib import Path

from .annotations import AmbiguousSource, match_source
from .dfg import dotted_name, is_log_call
from .parser import DEFAULT_LOGGER_NAMES, DEFAULT_SOURCE_READERS, own_nodes
from .templates import message_parts

EMPTY = frozenset()
PASSTHROUGH = {enumerate, zip, list, tuple, reversed, iter}
STRUCTURAL_METHODS = {
    list: {"append", "extend", "insert", "pop", "reverse", "clear", "copy", "remove"},
    dict: {"update", "setdefault", "pop", "get", "clear", "copy", "items", "values", "keys"},
    set: {"add", "update", "clear", "discard", "copy"},
}
LEVEL_NAMES = {"debug": "DEBUG", "info": "INFO", "warning": "WARNING", "warn": "WARNING", "error": "ERROR",
               "exception": "ERROR", "critical": "CRITICAL", "fatal": "CRITICAL"}


class OracleError(Exception):
    """The program left the subset the oracle interprets."""


class TV:
    __slots__ = ("value", "labels")

    def __init__(self, value, labels=EMPTY):
        self.value = value
        self.labels = labels

    def __repr__(self):
        return f"TV({self.value!r}, {set(self.labels) or '{}'})"


def wrap(v, labels=EMPTY) -> TV:
    if isinstance(v, TV):
        return TV(v.value, v.labels | labels) if labels else v
    return TV(v, labels)


def deep_labels(v, _seen=None) -> frozenset:
    seen = _seen if _seen is not None else set()
    out = set()
    stack = [v]
    while stack:
        x = stack.pop()
        if isinstance(x, TV):
            out |= x.labels
            x = x.value
        if isinstance(x, (list, tuple, set, frozenset, dict, Instance)):
            if id(x) in seen:
                continue
            seen.add(id(x))
            if isinstance(x, dict):
                stack.extend(x.keys())
                stack.extend(x.values())
            elif isinstance(x, Instance):
                stack.extend(x.attrs.values())
            else:
                stack.extend(x)
    return frozenset(out)


@dataclass(frozen=True)
class Flow:
    line_no: int
    slot: int
    source_id: str
    attribute: str


@dataclass
class OracleRun:
    lines: list[str] = field(default_factory=list)
    flows: list[Flow] = field(default_factory=list)
    locations: list[tuple[str, int]] = field(default_factory=list)

    def flows_by_line(self) -> dict[int, set[tuple[int, str, str]]]:
        out: dict[int, set] = {}
        for f in self.flows:
            out.setdefault(f.line_no, set()).add((f.slot, f.source_id, f.attribute))
        return out


class _Return(BaseException):
    def __init__(self, value):
        self.value = value


class _Break(BaseException):
    pass


class _Continue(BaseException):
    pass


class Frame:
    def __init__(self, module, parent=None, func=None):
        self.vars: dict[str, TV] = {}
        self.module = module
        self.parent = parent
        self.func = func


class Module:
    def __init__(self, name, path, relpath):
        self.name = name
        self.path = path
        self.relpath = relpath
        self.frame = Frame(self)


class Function:
    def __init__(self, node, frame: Frame, defaults, kw_defaults, qualname, interp):
        self.node = node
        self.frame = frame
        self.defaults = defaults
        self.kw_defaults = kw_defaults
        self.qualname = qualname
        self.interp = interp
        if isinstance(node, ast.Lambda):
            self.locals, self.globals = set(), set()
            for n in ast.walk(node.args):
                if isinstance(n, ast.arg):
                    self.locals.add(n.arg)
        else:
            self.globals = {name for n in own_nodes(node) if isinstance(n, ast.Global) for name in n.names}
            if any(isinstance(n, ast.Nonlocal) for n in own_nodes(node)):
                raise OracleError(f"nonlocal in {qualname} is outside the subset")
            if any(isinstance(n, (ast.Yield, ast.YieldFrom)) for n in own_nodes(node)):
                raise OracleError(f"generator function {qualname} is outside the subset")

    def __call__(self, *args, **kwargs):
        # called back by native code (sort keys and the like); labels are lost here
        res = self.interp.call_function(self, [TV(a) for a in args], {k: TV(v) for k, v in kwargs.items()})
        return unwrap(res)


class BoundMethod:
    def __init__(self, instance, func):
        self.instance = instance
        self.func = func


class Class:
    def __init__(self, name, bases, attrs):
        self.name = name
        self.bases = bases
        self.attrs = attrs

    def lookup(self, name):
        if name in self.attrs:
            return self.attrs[name]
        for b in self.bases:
            hit = b.lookup(name)
            if hit is not None:
                return hit
        return None


class Instance:
    def __init__(self, cls):
        self.cls = cls
        self.attrs: dict[str, TV] = {}


def unwrap(v):
    """Native value with every wrapper removed."""
    if isinstance(v, TV):
        v = v.value
    if isinstance(v, list):
        return [unwrap(x) for x in v]
    if isinstance(v, tuple):
        return tuple(unwrap(x) for x in v)
    if isinstance(v, dict):
        return {unwrap(k): unwrap(x) for k, x in v.items()}
    if isinstance(v, (set, frozenset)):
        return type(v)(unwrap(x) for x in v)
    return v


_BINOPS = {
    ast.Add: lambda a, b: a + b, ast.Sub: lambda a, b: a - b, ast.Mult: lambda a, b: a * b,
    ast.Div: lambda a, b: a / b, ast.FloorDiv: lambda a, b: a // b, ast.Mod: lambda a, b: a % b,
    ast.Pow: lambda a, b: a ** b, ast.BitAnd: lambda a, b: a & b, ast.BitOr: lambda a, b: a | b,
    ast.BitXor: lambda a, b: a ^ b, ast.LShift: lambda a, b: a << b, ast.RShift: lambda a, b: a >> b,
}
_CMPOPS = {
    ast.Eq: lambda a, b: a == b, ast.NotEq: lambda a, b: a != b, ast.Lt: lambda a, b: a < b,
    ast.LtE: lambda a, b: a <= b, ast.Gt: lambda a, b: a > b, ast.GtE: lambda a, b: a >= b,
    ast.In: lambda a, b: a in b, ast.NotIn: lambda a, b: a not in b, ast.Is: lambda a, b: a is b,
    ast.IsNot: lambda a, b: a is not b,
}
_UNOPS = {ast.Not: lambda a: not a, ast.USub: lambda a: -a, ast.UAdd: lambda a: +a, ast.Invert: lambda a: ~a}


class Interpreter:
    """Runs one project entry file under taint tracking."""

    def __init__(self, root, specs, data_root=None, logger_names=DEFAULT_LOGGER_NAMES,
                 source_readers=DEFAULT_SOURCE_READERS, threshold: int = logging.INFO, max_steps: int = 2_000_000):
        self.root = Path(root).resolve()
        self.data_root = Path(data_root).resolve() if data_root else self.root
        self.specs = list(specs)
        self.logger_names = tuple(logger_names)
        self.source_readers = tuple(source_readers)
        self.threshold = threshold
        self.modules: dict[Path, Module] = {}
        self.run = OracleRun()
        self.steps = 0
        self.max_steps = max_steps

    # -- entry points

    def run_file(self, entry) -> OracleRun:
        path = (self.root / entry).resolve()
        self.load_module(path, "__main__")
        return self.run

    def load_module(self, path: Path, name: str) -> Module:
        if path in self.modules:
            return self.modules[path]
        rel = path.relative_to(self.root).as_posix()
        mod = Module(name, path, rel)
        self.modules[path] = mod
        mod.frame.vars["__name__"] = TV(name)
        tree = ast.parse(path.read_text(encoding="utf-8"), filename=str(path))
        self.exec_block(tree.body, mod.frame)
        return mod

    def _project_module(self, dotted: str, importer: Module, level: int = 0) -> Path | None:
        rel = Path(*dotted.split(".")) if dotted else Path()
        bases = []
        if level:
            base = importer.path.parent
            for _ in range(level - 1):
                base = base.parent
            bases.append(base)
        else:
            bases += [importer.path.parent, self.root]
        for b in bases:
            for cand in (b / rel.with_suffix(".py") if dotted else None, b / rel / "__init__.py"):
                if cand is not None and cand.is_file() and self.root in cand.resolve().parents:
                    return cand.resolve()
        return None

    def import_module(self, dotted: str, frame: Frame, level: int = 0):
        path = self._project_module(dotted, frame.module, level)
        if path is not None:
            return self.load_module(path, dotted or path.stem)
        if level:
            raise OracleError(f"relative import of {dotted!r} not found in the project")
        return importlib.import_module(dotted)

    # -- names

    def lookup(self, name: str, frame: Frame) -> TV:
        f = frame
        if f.func is not None and name in f.func.globals:
            f = frame.module.frame
        while f is not None:
            if name in f.vars:
                return f.vars[name]
            f = f.parent
        mf = frame.module.frame
        if name in mf.vars:
            return mf.vars[name]
        if hasattr(builtins, name):
            return TV(getattr(builtins, name))
        raise NameError(name)

    def store(self, name: str, value: TV, frame: Frame):
        if frame.func is not None and name in frame.func.globals:
            frame.module.frame.vars[name] = value
        else:
            frame.vars[name] = value

    # -- statements

    def tick(self):
        self.steps += 1
        if self.steps > self.max_steps:
            raise OracleError("step budget exhausted")

    def exec_block(self, body, frame):
        for st in body:
            self.exec_stmt(st, frame)

    def exec_stmt(self, st, frame):
        self.tick()
        if isinstance(st, ast.Expr):
            self.eval(st.value, frame)
        elif isinstance(st, ast.Assign):
            v = self.eval(st.value, frame)
            for t in st.targets:
                self.assign(t, v, frame)
        elif isinstance(st, ast.AnnAssign):
            if st.value is not None:
                self.assign(st.target, self.eval(st.value, frame), frame)
        elif isinstance(st, ast.AugAssign):
            cur = self.eval(_as_load(st.target), frame)
            rhs = self.eval(st.value, frame)
            res = TV(_BINOPS[type(st.op)](unwrap(cur), unwrap(rhs)), deep_labels(cur) | deep_labels(rhs))
            self.assign(st.target, res, frame)
        elif isinstance(st, ast.If):
            test = self.eval(st.test, frame)
            self.exec_block(st.body if _truth(test) else st.orelse, frame)
        elif isinstance(st, ast.For):
            it = self.eval(st.iter, frame)
            broke = False
            for item in self.iterate(it):
                self.assign(st.target, item, frame)
                try:
                    self.exec_block(st.body, frame)
                except _Continue:
                    continue
                except _Break:
                    broke = True
                    break
            if not broke:
                self.exec_block(st.orelse, frame)
        elif isinstance(st, ast.While):
            broke = False
            while _truth(self.eval(st.test, frame)):
                self.tick()
                try:
                    self.exec_block(st.body, frame)
                except _Continue:
                    continue
                except _Break:
                    broke = True
                    break
            if not broke:
                self.exec_block(st.orelse, frame)
        elif isinstance(st, ast.Return):
            raise _Return(self.eval(st.value, frame) if st.value is not None else TV(None))
        elif isinstance(st, ast.Break):
            raise _Break()
        elif isinstance(st, ast.Continue):
            raise _Continue()
        elif isinstance(st, ast.Pass):
            pass
        elif isinstance(st, (ast.FunctionDef, ast.AsyncFunctionDef)):
            if st.decorator_list:
                raise OracleError(f"decorated function {st.name} is outside the subset")
            self.store(st.name, TV(self.make_function(st, frame)), frame)
        elif isinstance(st, ast.ClassDef):
            self.store(st.name, TV(self.make_class(st, frame)), frame)
        elif isinstance(st, ast.Import):
            for alias in st.names:
                if alias.asname:
                    self.store(alias.asname, TV(self.import_module(alias.name, frame)), frame)
                else:
                    top = alias.name.split(".")[0]
                    mod = self.import_module(alias.name, frame)
                    self.store(top, TV(self.import_module(top, frame) if "." in alias.name else mod), frame)
        elif isinstance(st, ast.ImportFrom):
            mod = self.import_module(st.module or "", frame, st.level)
            for alias in st.names:
                if alias.name == "*":
                    raise OracleError("star import is outside the subset")
                if isinstance(mod, Module):
                    if alias.name in mod.frame.vars:
                        val = mod.frame.vars[alias.name]
                    else:
                        sub = self._project_module(f"{st.module}.{alias.name}" if st.module else alias.name,
                                                   frame.module, st.level)
                        if sub is None:
                            raise ImportError(f"cannot import {alias.name} from {st.module}")
                        val = TV(self.load_module(sub, alias.name))
                else:
                    val = TV(getattr(mod, alias.name))
                self.store(alias.asname or alias.name, val, frame)
        elif isinstance(st, ast.Global):
            pass
        elif isinstance(st, ast.Try):
            self.exec_try(st, frame)
        elif isinstance(st, ast.Raise):
            if st.exc is None:
                raise OracleError("bare raise is outside the subset")
            exc = unwrap(self.eval(st.exc, frame))
            raise exc
        elif isinstance(st, ast.Assert):
            if not _truth(self.eval(st.test, frame)):
                raise AssertionError(unwrap(self.eval(st.msg, frame)) if st.msg else None)
        else:
            raise OracleError(f"statement {type(st).__name__} at line {st.lineno} is outside the subset")

    def exec_try(self, st, frame):
        try:
            self.exec_block(st.body, frame)
        except Exception as exc:  # noqa: BLE001 - mirrors the program's own handlers
            if isinstance(exc, OracleError):
                raise
            for h in st.handlers:
                types = unwrap(self.eval(h.type, frame)) if h.type is not None else Exception
                if isinstance(exc, types):
                    if h.name:
                        self.store(h.name, TV(exc), frame)
                    self.exec_block(h.body, frame)
                    break
            else:
                raise
        else:
            self.exec_block(st.orelse, frame)
        finally:
            self.exec_block(st.finalbody, frame)

    def assign(self, target, value: TV, frame):
        if isinstance(target, ast.Name):
            self.store(target.id, value, frame)
        elif isinstance(target, (ast.Tuple, ast.List)):
            items = list(self.iterate(value))
            star = [i for i, t in enumerate(target.elts) if isinstance(t, ast.Starred)]
            if star:
                i = star[0]
                after = len(target.elts) - i - 1
                head, mid, tail = items[:i], items[i:len(items) - after], items[len(items) - after:]
                for t, v in zip(target.elts[:i], head):
                    self.assign(t, v, frame)
                self.assign(target.elts[i].value, TV(list(mid), value.labels), frame)
                for t, v in zip(target.elts[i + 1:], tail):
                    self.assign(t, v, frame)
                return
            if len(items) != len(target.elts):
                raise ValueError(f"cannot unpack {len(items)} values into {len(target.elts)}")
            for t, v in zip(target.elts, items):
                self.assign(t, v, frame)
        elif isinstance(target, ast.Subscript):
            obj = self.eval(target.value, frame)
            key = self.eval(target.slice, frame)
            container = obj.value
            if isinstance(container, dict):
                container[unwrap(key)] = value if not key.labels else wrap(value, key.labels)
            elif isinstance(container, list):
                container[unwrap(key)] = value
            else:
                container[unwrap(key)] = unwrap(value)
        elif isinstance(target, ast.Attribute):
            obj = self.eval(target.value, frame)
            if isinstance(obj.value, Instance):
                obj.value.attrs[target.attr] = value
            elif isinstance(obj.value, Module):
                obj.value.frame.vars[target.attr] = value
            elif isinstance(obj.value, Class):
                obj.value.attrs[target.attr] = value
            else:
                setattr(obj.value, target.attr, unwrap(value))
        else:
            raise OracleError(f"assignment target {type(target).__name__} is outside the subset")

    # -- definitions

    def make_function(self, node, frame, qualname=None) -> Function:
        a = node.args
        defaults = [self.eval(d, frame) for d in a.defaults]
        kw_defaults = {arg.arg: self.eval(d, frame) for arg, d in zip(a.kwonlyargs, a.kw_defaults) if d is not None}
        name = getattr(node, "name", "<lambda>")
        return Function(node, frame, defaults, kw_defaults, qualname or name, self)

    def make_class(self, node: ast.ClassDef, frame) -> Class:
        bases = []
        for b in node.bases:
            bv = self.eval(b, frame).value
            if bv is object:
                continue
            if not isinstance(bv, Class):
                raise OracleError(f"class {node.name} derives from a non-project class")
            bases.append(bv)
        attrs: dict = {}
        for st in node.body:
            if isinstance(st, ast.FunctionDef):
                if st.decorator_list:
                    raise OracleError(f"decorated method {node.name}.{st.name} is outside the subset")
                attrs[st.name] = self.make_function(st, frame, f"{node.name}.{st.name}")
            elif isinstance(st, ast.Assign) and all(isinstance(t, ast.Name) for t in st.targets):
                v = self.eval(st.value, frame)
                for t in st.targets:
                    attrs[t.id] = v
            elif isinstance(st, (ast.Pass, ast.Expr)):
                continue
            else:
                raise OracleError(f"class body statement {type(st).__name__} is outside the subset")
        return Class(node.name, bases, attrs)

    # -- calls

    def bind_args(self, fn: Function, args: list[TV], kwargs: dict[str, TV], frame: Frame):
        a = fn.node.args
        positional = [p.arg for p in a.posonlyargs + a.args]
        n_def = len(fn.defaults)
        for i, name in enumerate(positional):
            if i < len(args):
                frame.vars[name] = args[i]
            elif name in kwargs:
                frame.vars[name] = kwargs.pop(name)
            elif i >= len(positional) - n_def:
                frame.vars[name] = fn.defaults[i - (len(positional) - n_def)]
            else:
                raise TypeError(f"{fn.qualname}() missing argument {name!r}")
        extra = args[len(positional):]
        if a.vararg is not None:
            frame.vars[a.vararg.arg] = TV(tuple(extra))
        elif extra:
            raise TypeError(f"{fn.qualname}() got too many positional arguments")
        for arg in a.kwonlyargs:
            if arg.arg in kwargs:
                frame.vars[arg.arg] = kwargs.pop(arg.arg)
            elif arg.arg in fn.kw_defaults:
                frame.vars[arg.arg] = fn.kw_defaults[arg.arg]
            else:
                raise TypeError(f"{fn.qualname}() missing keyword argument {arg.arg!r}")
        if a.kwarg is not None:
            frame.vars[a.kwarg.arg] = TV(dict(kwargs))
        elif kwargs:
            raise TypeError(f"{fn.qualname}() got unexpected keyword arguments {sorted(kwargs)}")

    def call_function(self, fn: Function, args, kwargs) -> TV:
        frame = Frame(fn.frame.module, parent=fn.frame, func=fn)
        self.bind_args(fn, list(args), dict(kwargs), frame)
        if isinstance(fn.node, ast.Lambda):
            return self.eval(fn.node.body, frame)
        try:
            self.exec_block(fn.node.body, frame)
        except _Return as r:
            return r.value
        return TV(None)

    def call_value(self, f: TV, args, kwargs, receiver: TV | None = None, method: str | None = None) -> TV:
        fv = f.value
        if isinstance(fv, Function):
            return self.call_function(fv, args, kwargs)
        if isinstance(fv, BoundMethod):
            return self.call_function(fv.func, [fv.instance] + list(args), kwargs)
        if isinstance(fv, Class):
            inst = TV(Instance(fv))
            init = fv.lookup("__init__")
            if init is not None:
                self.call_function(init, [inst] + list(args), kwargs)
            elif args or kwargs:
                raise TypeError(f"{fv.name}() takes no arguments")
            return inst
        if fv in PASSTHROUGH and not kwargs:
            labels = frozenset().union(*[a.labels for a in args]) if args else EMPTY
            if fv is zip:
                res = list(zip(*[list(self.iterate(a)) for a in args]))
            elif fv is enumerate:
                res = [(TV(i, args[0].labels), x) for i, x in enumerate(self.iterate(args[0]))]
            else:
                res = fv(*[list(self.iterate(a)) for a in args])
                return TV(res, EMPTY)
            return TV(res, labels)
        if receiver is not None and method is not None:
            container = receiver.value
            for typ, names in STRUCTURAL_METHODS.items():
                if type(container) is typ and method in names:
                    return self.structural(receiver, method, args, kwargs)
        labels = set(f.labels)
        for a in list(args) + list(kwargs.values()):
            labels |= deep_labels(a)
        res = fv(*[unwrap(a) for a in args], **{k: unwrap(v) for k, v in kwargs.items()})
        return TV(res, frozenset(labels))

    def structural(self, receiver: TV, method: str, args, kwargs) -> TV:
        c = receiver.value
        outer = receiver.labels
        if method in ("append", "add"):
            arg = args[0]
            if isinstance(c, set):
                c.add(unwrap(arg))
                if arg.labels or deep_labels(arg):
                    receiver.labels = receiver.labels | deep_labels(arg)
            else:
                c.append(arg)
            return TV(None)
        if method == "insert":
            c.insert(unwrap(args[0]), args[1])
            return TV(None)
        if method == "extend":
            c.extend(list(self.iterate(args[0])))
            return TV(None)
        if method == "update":
            if isinstance(c, dict):
                other = args[0] if args else TV({})
                for k, v in dict(other.value).items():
                    c[k] = wrap(v, other.labels)
                for k, v in kwargs.items():
                    c[k] = v
            else:
                for x in self.iterate(args[0]):
                    c.add(unwrap(x))
                receiver.labels = receiver.labels | deep_labels(args[0])
            return TV(None)
        if method == "get":
            key = unwrap(args[0])
            if key in c:
                return wrap(c[key], outer)
            return args[1] if len(args) > 1 else TV(None)
        if method == "setdefault":
            key = unwrap(args[0])
            if key not in c:
                c[key] = args[1] if len(args) > 1 else TV(None)
            return wrap(c[key], outer)
        if method == "pop":
            if isinstance(c, dict):
                key = unwrap(args[0])
                if key in c:
                    return wrap(c.pop(key), outer)
                if len(args) > 1:
                    return args[1]
                raise KeyError(key)
            return wrap(c.pop(*[unwrap(a) for a in args]), outer)
        if method in ("items",):
            return TV([(TV(k, outer), wrap(v, outer)) for k, v in c.items()])
        if method in ("values",):
            return TV([wrap(v, outer) for v in c.values()])
        if method in ("keys",):
            return TV([TV(k, outer) for k in c.keys()])
        if method == "copy":
            return TV(type(c)(c), outer)
        if method == "remove":
            target = unwrap(args[0])
            for i, x in enumerate(c):
                if unwrap(x) == target:
                    del c[i]
                    return TV(None)
            raise ValueError("list.remove(x): x not in list")
        if method == "discard":
            c.discard(unwrap(args[0]))
            return TV(None)
        getattr(c, method)(*[unwrap(a) for a in args])
        return TV(None)

    def emit_log(self, call: ast.Call, callee: str, frame: Frame):
        method = callee.rsplit(".", 1)[1]
        if method == "log":
            level_v = unwrap(self.eval(call.args[0], frame))
            levelno = level_v if isinstance(level_v, int) else logging.getLevelName(level_v)
            level = logging.getLevelName(levelno)
        else:
            level = LEVEL_NAMES[method]
            levelno = logging.getLevelName(level)
        if levelno < self.threshold:
            return
        parts = message_parts(call)
        slot_values = [self.eval(e, frame) for e in parts.slot_exprs]
        if parts.style == "printf" and parts.message_expr is not None and isinstance(parts.message_expr, ast.Constant):
            args = tuple(unwrap(v) for v in slot_values)
            message = parts.format_string % args
        elif parts.message_expr is not None:
            message = str(unwrap(self.eval(parts.message_expr, frame)))
        else:
            message = ""
        if parts.style == "opaque":
            raise OracleError(f"log call at line {call.lineno} does not use a supported message format")
        line_no = len(self.run.lines) + 1
        text = f"{level}|{frame.module.relpath}:{call.lineno}|{message}"
        physical = text.split("\n")
        self.run.lines.extend(physical)
        self.run.locations.append((frame.module.relpath, call.lineno))
        for slot, v in enumerate(slot_values):
            for sid, attr in sorted(deep_labels(v)):
                self.run.flows.append(Flow(line_no, slot, sid, attr))

    def read_source(self, call: ast.Call, frame: Frame) -> TV:
        args = [self.eval(a, frame) for a in call.args]
        for k in call.keywords:
            self.eval(k.value, frame)
        if not args:
            raise OracleError("source read without a path argument")
        key = unwrap(args[0])
        try:
            spec = match_source(key, self.specs)
        except AmbiguousSource:
            spec = None
            cands = [s for s in self.specs if s.source_id in match_candidates(key, self.specs)]
        else:
            cands = [spec] if spec else []
        annotated = {}
        for s in cands:
            for a in s.attribute_names:
                annotated.setdefault(a, set()).add((s.source_id, a))
        rows = []
        with open(self.data_root / key, newline="", encoding="utf-8") as fh:
            for raw in csv.DictReader(fh):
                rows.append(TV({col: TV(val, frozenset(annotated.get(col, ()))) for col, val in raw.items()}))
        return TV(rows)

    def iterate(self, v: TV):
        outer = v.labels
        val = v.value
        if isinstance(val, dict):
            for k in list(val):
                yield TV(k, outer)
            return
        for x in val:
            yield wrap(x, outer)

    # -- expressions

    def eval(self, e, frame) -> TV:
        self.tick()
        if isinstance(e, ast.Constant):
            return TV(e.value)
        if isinstance(e, ast.Name):
            return self.lookup(e.id, frame)
        if isinstance(e, ast.Attribute):
            obj = self.eval(e.value, frame)
            return self.get_attr(obj, e.attr)
        if isinstance(e, ast.Subscript):
            obj = self.eval(e.value, frame)
            key = self.eval(e.slice, frame)
            res = obj.value[unwrap(key)]
            if isinstance(e.slice, ast.Slice) and isinstance(res, list):
                return TV(res, obj.labels | key.labels)
            return wrap(res, obj.labels | key.labels)
        if isinstance(e, ast.Slice):
            parts = [self.eval(x, frame) if x is not None else TV(None) for x in (e.lower, e.upper, e.step)]
            return TV(slice(*[p.value for p in parts]), frozenset().union(*[p.labels for p in parts]))
        if isinstance(e, ast.Call):
            return self.eval_call(e, frame)
        if isinstance(e, ast.BinOp):
            left, right = self.eval(e.left, frame), self.eval(e.right, frame)
            res = _BINOPS[type(e.op)](unwrap(left), unwrap(right))
            return TV(res, deep_labels(left) | deep_labels(right))
        if isinstance(e, ast.BoolOp):
            labels = set()
            is_and = isinstance(e.op, ast.And)
            for v in e.values:
                cur = self.eval(v, frame)
                labels |= deep_labels(cur)
                if _truth(cur) != is_and:
                    break
            return TV(unwrap(cur), frozenset(labels))
        if isinstance(e, ast.Compare):
            left = self.eval(e.left, frame)
            labels = set(deep_labels(left))
            result = True
            for op, comp in zip(e.ops, e.comparators):
                right = self.eval(comp, frame)
                labels |= deep_labels(right)
                if not _CMPOPS[type(op)](unwrap(left), unwrap(right)):
                    result = False
                    break
                left = right
            return TV(result, frozenset(labels))
        if isinstance(e, ast.UnaryOp):
            v = self.eval(e.operand, frame)
            return TV(_UNOPS[type(e.op)](unwrap(v)), deep_labels(v))
        if isinstance(e, ast.IfExp):
            return self.eval(e.body if _truth(self.eval(e.test, frame)) else e.orelse, frame)
        if isinstance(e, ast.JoinedStr):
            out, labels = [], set()
            for v in e.values:
                if isinstance(v, ast.Constant):
                    out.append(v.value)
                else:
                    tv = self.eval(v, frame)
                    out.append(tv.value)
                    labels |= tv.labels
            return TV("".join(out), frozenset(labels))
        if isinstance(e, ast.FormattedValue):
            v = self.eval(e.value, frame)
            raw = unwrap(v)
            if e.conversion == ord("r"):
                raw = repr(raw)
            elif e.conversion == ord("s"):
                raw = str(raw)
            elif e.conversion == ord("a"):
                raw = ascii(raw)
            spec = self.eval(e.format_spec, frame) if e.format_spec is not None else TV("")
            return TV(format(raw, spec.value), deep_labels(v) | spec.labels)
        if isinstance(e, ast.List):
            return TV(self.elements(e.elts, frame))
        if isinstance(e, ast.Tuple):
            return TV(tuple(self.elements(e.elts, frame)))
        if isinstance(e, ast.Set):
            items = self.elements(e.elts, frame)
            return TV({unwrap(x) for x in items}, frozenset().union(*[deep_labels(x) for x in items]))
        if isinstance(e, ast.Dict):
            d, labels = {}, set()
            for k, v in zip(e.keys, e.values):
                if k is None:
                    other = self.eval(v, frame)
                    for kk, vv in other.value.items():
                        d[kk] = wrap(vv, other.labels)
                    continue
                kv = self.eval(k, frame)
                labels |= deep_labels(kv)
                d[unwrap(kv)] = self.eval(v, frame)
            return TV(d, frozenset(labels))
        if isinstance(e, (ast.ListComp, ast.SetComp, ast.GeneratorExp, ast.DictComp)):
            return self.comprehension(e, frame)
        if isinstance(e, ast.Lambda):
            return TV(self.make_function(e, frame))
        if isinstance(e, ast.NamedExpr):
            v = self.eval(e.value, frame)
            self.store(e.target.id, v, frame)
            return v
        if isinstance(e, ast.Starred):
            raise OracleError("starred expression outside a call or literal")
        raise OracleError(f"expression {type(e).__name__} at line {getattr(e, 'lineno', '?')} is outside the subset")

    def elements(self, elts, frame) -> list[TV]:
        out = []
        for x in elts:
            if isinstance(x, ast.Starred):
                out.extend(self.iterate(self.eval(x.value, frame)))
            else:
                out.append(self.eval(x, frame))
        return out

    def comprehension(self, e, frame) -> TV:
        results = []

        def loop(gens, inner):
            if not gens:
                if isinstance(e, ast.DictComp):
                    results.append((self.eval(e.key, inner), self.eval(e.value, inner)))
                else:
                    results.append(self.eval(e.elt, inner))
                return
            g = gens[0]
            src = self.eval(g.iter, inner)
            for item in self.iterate(src):
                self.assign(g.target, item, inner)
                if all(_truth(self.eval(c, inner)) for c in g.ifs):
                    loop(gens[1:], inner)

        inner = Frame(frame.module, parent=frame, func=None)
        # the first iterable is evaluated in the enclosing scope
        first = self.eval(e.generators[0].iter, frame)
        for item in self.iterate(first):
            self.assign(e.generators[0].target, item, inner)
            if all(_truth(self.eval(c, inner)) for c in e.generators[0].ifs):
                loop(e.generators[1:], inner)
        if isinstance(e, ast.DictComp):
            return TV({unwrap(k): v for k, v in results}, frozenset().union(*[deep_labels(k) for k, _ in results]))
        if isinstance(e, ast.SetComp):
            return TV({unwrap(x) for x in results}, frozenset().union(*[deep_labels(x) for x in results]))
        return TV(results)

    def get_attr(self, obj: TV, name: str) -> TV:
        v = obj.value
        if isinstance(v, Instance):
            if name in v.attrs:
                return wrap(v.attrs[name], obj.labels)
            hit = v.cls.lookup(name)
            if isinstance(hit, Function):
                return TV(BoundMethod(obj, hit), obj.labels)
            if hit is not None:
                return wrap(hit, obj.labels)
            raise AttributeError(f"{v.cls.name!r} object has no attribute {name!r}")
        if isinstance(v, Module):
            if name not in v.frame.vars:
                raise AttributeError(f"module {v.name!r} has no attribute {name!r}")
            return v.frame.vars[name]
        if isinstance(v, Class):
            hit = v.lookup(name)
            if hit is None:
                raise AttributeError(name)
            return wrap(hit)
        return TV(getattr(v, name), obj.labels)

    def eval_call(self, e: ast.Call, frame) -> TV:
        callee = dotted_name(e.func)
        if is_log_call(callee, self.logger_names):
            self.emit_log(e, callee, frame)
            return TV(None)
        if callee in self.source_readers:
            return self.read_source(e, frame)
        receiver, method = None, None
        if isinstance(e.func, ast.Attribute):
            receiver = self.eval(e.func.value, frame)
            method = e.func.attr
            f = self.get_attr(receiver, method)
        else:
            f = self.eval(e.func, frame)
        args: list[TV] = []
        for a in e.args:
            if isinstance(a, ast.Starred):
                args.extend(self.iterate(self.eval(a.value, frame)))
            else:
                args.append(self.eval(a, frame))
        kwargs: dict[str, TV] = {}
        for k in e.keywords:
            v = self.eval(k.value, frame)
            if k.arg is None:
                for kk, vv in v.value.items():
                    kwargs[unwrap(kk)] = wrap(vv, v.labels)
            else:
                kwargs[k.arg] = v
        return self.call_value(f, args, kwargs, receiver, method)


def match_candidates(key, specs) -> list[str]:
    try:
        match_source(key, specs)
    except AmbiguousSource as exc:
        return list(exc.candidates)
    return []


def _truth(v: TV) -> bool:
    return bool(unwrap(v))


def _as_load(target):
    node = ast.parse(ast.unparse(target), mode="eval").body
    return ast.copy_location(node, target)


def run_oracle(root, entry, specs, data_root=None, logger_names=DEFAULT_LOGGER_NAMES,
               source_readers=DEFAULT_SOURCE_READERS) -> OracleRun:
    """Interpret ``entry`` (relative to ``root``) and return its log lines and observed flows."""
    interp = Interpreter(root, specs, data_root, logger_names, source_readers)
    return interp.run_file(entry)


_NATIVE_DRIVER = '''
import logging, os, runpy, sys
root, entry = sys.argv[1], sys.argv[2]


class RelFormatter(logging.Formatter):
    def format(self, record):
        rel = os.path.relpath(record.pathname, root).replace(os.sep, "/")
        return f"{record.levelname}|{rel}:{record.lineno}|{record.getMessage()}"


handler = logging.StreamHandler(sys.stdout)
handler.setFormatter(RelFormatter())
logging.basicConfig(level=logging.INFO, handlers=[handler])
sys.path.insert(0, root)
sys.argv = [os.path.join(root, entry)]
runpy.run_path(sys.argv[0], run_name="__main__")
'''


def run_native(root, entry, data_root=None, timeout: float = 60.0) -> list[str]:
    """Run ``entry`` with the real interpreter and return its log lines.

    The log format matches the oracle's (``LEVEL|relpath:lineno|message``),
    so the two can be compared line for line.
    """
    import subprocess
    import sys

    root = Path(root).resolve()
    cwd = Path(data_root).resolve() if data_root else root
    proc = subprocess.run([sys.executable, "-c", _NATIVE_DRIVER, str(root), entry], cwd=cwd,
                          capture_output=True, text=True, timeout=timeout, encoding="utf-8")
    if proc.returncode != 0:
        raise OracleError(f"native run failed: {proc.stderr.strip()[-2000:]}")
    return proc.stdout.splitlines()

"""Project scanning and per-function parsing.

A project is scanned into :class:`SourceFile` objects, and each file is split
into :class:`FunctionUnit` objects: one per ``def`` (methods and nested
functions included) plus a synthetic ``__main__`` unit holding module-level
statements.
"""
from __future__ import annotations

import ast
import fnmatch
import hashlib
import logging
import os
import posixpath
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

logger = logging.getLogger(__name__)

EXTERNAL = "<external>"
MAIN = "__main__"

DEFAULT_LOGGER_NAMES = ("logger", "log", "logging", "LOGGER", "LOG", "_logger", "_log", "self.logger", "self.log")
DEFAULT_SOURCE_READERS = ("read_table", "read_csv", "pd.read_csv", "pandas.read_csv")


class ParseError(Exception):
    """A source file could not be parsed; carries the file path and error location."""

    def __init__(self, path: str, line: int | None, column: int | None, message: str):
        self.path = path
        self.line = line
        self.column = column
        self.message = message
        super().__init__(f"{path}:{line}:{column}: {message}")


class ScanError(Exception):
    """The project root is missing or unreadable."""


@dataclass(frozen=True)
class ScanConfig:
    extensions: tuple[str, ...] = (".py",)
    exclude: tuple[str, ...] = ()
    logger_names: tuple[str, ...] = DEFAULT_LOGGER_NAMES
    source_readers: tuple[str, ...] = DEFAULT_SOURCE_READERS
    language: str = "python"


@dataclass(frozen=True)
class SourceFile:
    path: str
    content: str
    language: str = "python"

    @property
    def digest(self) -> str:
        return hashlib.sha256(self.content.encode("utf-8")).hexdigest()


@dataclass(frozen=True, order=True)
class FunctionId:
    path: str
    qualified_name: str
    start_line: int

    def __str__(self) -> str:
        return f"{self.path}::{self.qualified_name}@{self.start_line}"

    @classmethod
    def parse(cls, text: str) -> FunctionId:
        path, rest = text.split("::", 1)
        name, line = rest.rsplit("@", 1)
        return cls(path, name, int(line))


class Param(NamedTuple):
    name: str
    type: str | None = None
    kind: str = "positional"  # positional | keyword_only | varargs | varkw


class ImportEntry(NamedTuple):
    """A name bound by an import statement.

    ``path`` is the project-relative file of the imported module, or
    :data:`EXTERNAL`. ``symbol`` is set for ``from m import symbol``.
    """

    name: str
    path: str
    module: str = ""
    symbol: str | None = None


@dataclass
class FunctionMetadata:
    id: FunctionId
    params: list[Param] = field(default_factory=list)
    returns: list[str] = field(default_factory=list)
    imports: list[ImportEntry] = field(default_factory=list)
    class_name: str | None = None
    end_line: int = 0
    local_defs: list[str] = field(default_factory=list)
    local_names: list[str] = field(default_factory=list)
    global_names: list[str] = field(default_factory=list)

    @property
    def is_method(self) -> bool:
        return self.class_name is not None

    def to_dict(self) -> dict:
        return {
            "id": str(self.id),
            "params": [list(p) for p in self.params],
            "returns": list(self.returns),
            "imports": [list(i) for i in self.imports],
            "class_name": self.class_name,
            "end_line": self.end_line,
            "local_defs": list(self.local_defs),
            "local_names": list(self.local_names),
            "global_names": list(self.global_names),
        }

    @classmethod
    def from_dict(cls, d: dict) -> FunctionMetadata:
        return cls(
            id=FunctionId.parse(d["id"]),
            params=[Param(*p) for p in d["params"]],
            returns=list(d["returns"]),
            imports=[ImportEntry(*i) for i in d["imports"]],
            class_name=d["class_name"],
            end_line=d["end_line"],
            local_defs=list(d["local_defs"]),
            local_names=list(d["local_names"]),
            global_names=list(d["global_names"]),
        )


@dataclass
class FunctionUnit:
    metadata: FunctionMetadata
    body: ast.AST

    @property
    def id(self) -> FunctionId:
        return self.metadata.id


def normalize_path(path: str) -> str:
    """Forward slashes, no ``.``/``..`` segments, no leading ``./``."""
    p = posixpath.normpath(path.replace("\\", "/"))
    if p == "." or p.startswith("../") or p == "..":
        raise ValueError(f"path escapes the project root: {path!r}")
    return p


def _excluded(rel: str, patterns: tuple[str, ...]) -> bool:
    parts = rel.split("/")
    prefixes = ["/".join(parts[: i + 1]) for i in range(len(parts))]
    for pat in patterns:
        pat = pat.rstrip("/")
        for prefix in prefixes:
            if fnmatch.fnmatchcase(prefix, pat) or fnmatch.fnmatchcase(prefix.rsplit("/", 1)[-1], pat):
                return True
    return False


def scan_project(root: str | os.PathLike, config: ScanConfig | None = None,
                 diagnostics: list[str] | None = None) -> list[SourceFile]:
    """Return the project's source files in lexicographic path order.

    Files that cannot be read or decoded are reported in ``diagnostics``
    (and logged) rather than silently skipped.
    """
    config = config or ScanConfig()
    root_path = Path(root)
    if not root_path.is_dir():
        raise ScanError(f"project root does not exist or is not a directory: {root}")
    found = []
    for dirpath, dirnames, filenames in os.walk(root_path):
        dirnames.sort()
        for fname in filenames:
            if not fname.endswith(tuple(config.extensions)):
                continue
            full = Path(dirpath) / fname
            rel = normalize_path(full.relative_to(root_path).as_posix())
            if _excluded(rel, config.exclude):
                continue
            found.append((rel, full))
    files = []
    for rel, full in sorted(found):
        try:
            content = full.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            msg = f"{rel}: unreadable: {exc}"
            logger.warning(msg)
            if diagnostics is not None:
                diagnostics.append(msg)
            continue
        files.append(SourceFile(rel, content, config.language))
    return files


def project_fingerprint(files: list[SourceFile]) -> str:
    h = hashlib.sha256()
    for f in sorted(files, key=lambda f: f.path):
        h.update(f.path.encode("utf-8"))
        h.update(b"\0")
        h.update(f.digest.encode("ascii"))
        h.update(b"\n")
    return h.hexdigest()


# --------------------------------------------------------------------------
# Language adapters


class LanguageAdapter:
    """Turns a source file into function units. One adapter per analyzed language."""

    language: str = ""

    def parse_units(self, file: SourceFile, project_paths: frozenset[str] = frozenset()) -> list[FunctionUnit]:
        raise NotImplementedError


def _resolve_module(module: str, level: int, importer: str, project_paths: frozenset[str]) -> str:
    """Map a dotted module name to a project file, or EXTERNAL."""
    importer_dir = posixpath.dirname(importer)
    rel = module.replace(".", "/") if module else ""
    if level:
        base = importer_dir
        for _ in range(level - 1):
            base = posixpath.dirname(base)
        bases = [base]
    else:
        bases = [importer_dir, ""] if importer_dir else [""]
    for base in bases:
        stem = posixpath.join(base, rel) if rel else base
        for cand in (stem + ".py", posixpath.join(stem, "__init__.py")):
            cand = cand.lstrip("/")
            if cand in project_paths:
                return cand
    return EXTERNAL


def _collect_imports(stmts, importer: str, project_paths: frozenset[str]) -> list[ImportEntry]:
    out = []
    for node in stmts:
        if isinstance(node, ast.Import):
            for alias in node.names:
                path = _resolve_module(alias.name, 0, importer, project_paths)
                out.append(ImportEntry(alias.asname or alias.name, path, alias.name, None))
        elif isinstance(node, ast.ImportFrom):
            module = node.module or ""
            for alias in node.names:
                if alias.name == "*":
                    continue
                path = _resolve_module(module, node.level, importer, project_paths)
                if path == EXTERNAL and not module:
                    # from . import sibling
                    path = _resolve_module(alias.name, node.level, importer, project_paths)
                    out.append(ImportEntry(alias.asname or alias.name, path, alias.name, None))
                    continue
                if path != EXTERNAL:
                    sub = _resolve_module(f"{module}.{alias.name}", node.level, importer, project_paths)
                    if sub != EXTERNAL:
                        out.append(ImportEntry(alias.asname or alias.name, sub, f"{module}.{alias.name}", None))
                        continue
                out.append(ImportEntry(alias.asname or alias.name, path, module, alias.name))
    return out


def own_statements(body):
    """Yield every statement in ``body`` without entering nested def/class/lambda scopes."""
    stack = list(reversed(body))
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef)):
            continue
        children = []
        for name in ("body", "orelse", "finalbody"):
            children.extend(getattr(node, name, []) or [])
        for handler in getattr(node, "handlers", []) or []:
            children.extend(handler.body)
        for case in getattr(node, "cases", []) or []:
            children.extend(case.body)
        stack.extend(reversed(children))


def own_nodes(root):
    """Walk ``root`` without descending into nested scopes (defs, classes, lambdas)."""
    stack = [root]
    first = True
    while stack:
        node = stack.pop()
        yield node
        if not first and isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef, ast.Lambda)):
            continue
        first = False
        stack.extend(reversed(list(ast.iter_child_nodes(node))))


def _params(args: ast.arguments) -> list[Param]:
    def ann(a):
        return ast.unparse(a.annotation) if a.annotation is not None else None

    out = [Param(a.arg, ann(a)) for a in args.posonlyargs + args.args]
    if args.vararg:
        out.append(Param(args.vararg.arg, ann(args.vararg), "varargs"))
    out += [Param(a.arg, ann(a), "keyword_only") for a in args.kwonlyargs]
    if args.kwarg:
        out.append(Param(args.kwarg.arg, ann(args.kwarg), "varkw"))
    return out


def _dedupe(names):
    seen = []
    for n in names:
        if n not in seen:
            seen.append(n)
    return seen


def extract_metadata(unit_body: ast.AST, path: str, qualified_name: str | None = None,
                     class_name: str | None = None, module_imports: list[ImportEntry] | None = None,
                     project_paths: frozenset[str] = frozenset()) -> FunctionMetadata:
    """Read identity, parameters, returns, and imports off a def (or module) subtree."""
    is_module = isinstance(unit_body, ast.Module)
    if is_module:
        body = unit_body.body
        fid = FunctionId(path, MAIN, 1)
        params: list[Param] = []
        end = max((getattr(n, "end_lineno", 1) or 1 for n in ast.walk(unit_body) if hasattr(n, "lineno")), default=1)
    else:
        body = unit_body.body
        fid = FunctionId(path, qualified_name or unit_body.name, unit_body.lineno)
        params = _params(unit_body.args)
        end = unit_body.end_lineno

    stmts = list(own_statements(body))
    local_imports = _collect_imports(stmts, path, project_paths)
    imports = local_imports if is_module else list(module_imports or []) + local_imports

    returns: list[str] = []
    local_defs: list[str] = []
    local_names: list[str] = [p.name for p in params]
    global_names: list[str] = []
    for st in stmts:
        if isinstance(st, ast.Return) and st.value is not None:
            called = {id(c.func) for c in ast.walk(st.value) if isinstance(c, ast.Call)}
            for n in own_nodes(st.value):
                if isinstance(n, ast.Name) and isinstance(n.ctx, ast.Load) and id(n) not in called:
                    returns.append(n.id)
        elif isinstance(st, (ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef)):
            local_defs.append(st.name)
        elif isinstance(st, (ast.Global, ast.Nonlocal)):
            global_names.extend(st.names)
        for n in own_nodes(st) if not isinstance(st, (ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef)) else ():
            if isinstance(n, ast.Name) and isinstance(n.ctx, ast.Store):
                local_names.append(n.id)
    return FunctionMetadata(
        id=fid,
        params=params,
        returns=_dedupe(returns),
        imports=imports,
        class_name=class_name,
        end_line=end,
        local_defs=_dedupe(local_defs),
        local_names=_dedupe(local_names),
        global_names=_dedupe(global_names),
    )


class PythonAdapter(LanguageAdapter):
    language = "python"

    def parse(self, file: SourceFile) -> ast.Module:
        try:
            return ast.parse(file.content, filename=file.path)
        except SyntaxError as exc:
            raise ParseError(file.path, exc.lineno, exc.offset, exc.msg) from None
        except ValueError as exc:  # e.g. null bytes
            raise ParseError(file.path, None, None, str(exc)) from None

    def parse_units(self, file: SourceFile, project_paths: frozenset[str] = frozenset()) -> list[FunctionUnit]:
        tree = self.parse(file)
        module_meta = extract_metadata(tree, file.path, project_paths=project_paths)
        units = [FunctionUnit(module_meta, tree)]

        def visit(body, prefix: str, class_name: str | None):
            for st in own_statements(body):
                if isinstance(st, (ast.FunctionDef, ast.AsyncFunctionDef)):
                    qual = f"{prefix}{st.name}"
                    meta = extract_metadata(st, file.path, qual, class_name, module_meta.imports, project_paths)
                    units.append(FunctionUnit(meta, st))
                    visit(st.body, qual + ".", None)
                elif isinstance(st, ast.ClassDef):
                    visit(st.body, f"{prefix}{st.name}.", st.name)

        visit(tree.body, "", None)
        units.sort(key=lambda u: (u.id.start_line, u.id.qualified_name != MAIN, u.id.qualified_name))
        return units


ADAPTERS: dict[str, LanguageAdapter] = {"python": PythonAdapter()}


def parse_file(file: SourceFile, project_paths: frozenset[str] | None = None) -> list[FunctionUnit]:
    """Split one file into function units (all-or-nothing: raises ParseError)."""
    try:
        adapter = ADAPTERS[file.language]
    except KeyError:
        raise ParseError(file.path, None, None, f"no adapter for language {file.language!r}") from None
    return adapter.parse_units(file, project_paths if project_paths is not None else frozenset({file.path}))

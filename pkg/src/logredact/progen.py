"""Random programs inside the analyzed subset, for soundness testing.

Each generated project reads one or two annotated CSV tables, pushes values
through assignments, containers, helper functions in a second module, a
small class, closures, globals, branches and loops, and logs them in every
supported message style. Every variable has a known type, so programs always
run to completion.
"""
from __future__ import annotations

import csv
import random
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .dfg import DfgEdge, DfgNode, FunctionDfg, NodeKind
from .parser import FunctionId

IO_UTILS = '''import csv


def read_table(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))
'''

TABLES = {
    "people": {
        "path": "data/people.csv",
        "columns": {"name": "str", "email": "str", "city": "str", "age": "num", "score": "num"},
    },
    "orders": {
        "path": "data/orders.csv",
        "columns": {"item": "str", "card": "str", "amount": "num"},
    },
}
_WORDS = ["amber", "birch", "cedar", "delta", "ember", "fjord", "grove", "harbor", "iris", "juniper"]


@dataclass
class GeneratedProgram:
    seed: int
    files: dict[str, str]
    tables: dict[str, list[dict[str, str]]]
    annotations: dict
    entry: str = "main.py"

    def write(self, directory) -> Path:
        d = Path(directory)
        (d / "project").mkdir(parents=True, exist_ok=True)
        (d / "data").mkdir(parents=True, exist_ok=True)
        for name, text in self.files.items():
            (d / "project" / name).write_text(text, encoding="utf-8")
        for tname, rows in self.tables.items():
            cols = list(TABLES[tname]["columns"])
            with open(d / TABLES[tname]["path"], "w", newline="", encoding="utf-8") as fh:
                w = csv.DictWriter(fh, cols)
                w.writeheader()
                w.writerows(rows)
        (d / "annotations.yaml").write_text(yaml.safe_dump(self.annotations, sort_keys=False), encoding="utf-8")
        (d / "logredact.yaml").write_text(
            "schema_version: 1\nroot: project\nannotations: annotations.yaml\n", encoding="utf-8")
        return d


@dataclass
class _Scope:
    vars: dict[str, str] = field(default_factory=dict)  # name -> str | num | row:<table> | rows:<table> | list | box


class ProgramGenerator:
    def __init__(self, seed: int, statements: int = 14):
        self.seed = seed
        self.rng = random.Random(seed)
        self.n_statements = statements
        self.counter = 0
        self.helpers: list[tuple[str, list[str], str]] = []  # (name, param types, return type)

    def fresh(self, prefix: str) -> str:
        self.counter += 1
        return f"{prefix}{self.counter}"

    def pick(self, scope: _Scope, kind: str) -> str | None:
        names = [n for n, k in scope.vars.items() if k == kind or (kind.endswith(":") and k.startswith(kind))]
        return self.rng.choice(sorted(names)) if names else None

    # -- data

    def tables(self) -> dict[str, list[dict[str, str]]]:
        out = {}
        for tname, spec in TABLES.items():
            rows = []
            for i in range(4):
                row = {}
                for col, kind in spec["columns"].items():
                    if kind == "num":
                        row[col] = str(self.rng.randint(1, 90))
                    else:
                        row[col] = f"{self.rng.choice(_WORDS)}{col[0]}{i}"
                rows.append(row)
            out[tname] = rows
        return out

    def annotations(self) -> dict:
        rules = [("HIGH", "MASK", {}), ("HIGH", "HASH", {"length": 12}), ("LOW", "PARTIAL", {"keep_last": 2}),
                 ("LOW", "MASK", {}), ("NONE", "KEEP", {})]
        sources = []
        for tname, spec in TABLES.items():
            attrs = []
            for col in spec["columns"]:
                level, rule, extra = self.rng.choice(rules)
                attrs.append({"name": col, "level": level, "rule": rule, **extra})
            sources.append({"id": tname, "match": spec["path"], "attributes": attrs})
        return {"schema_version": 1, "sources": sources}

    # -- helpers module

    def helper_module(self) -> str:
        lines = ["import logging", "", "logger = logging.getLogger(__name__)", ""]
        shapes = [
            (["str", "str"], "str", "return a + \"/\" + b"),
            (["str"], "str", "return a.upper()"),
            (["num", "num"], "num", "return a * 2 + b"),
            (["str", "num"], "str", "return f\"{a}:{b:.1f}\""),
            (["row:people"], "str", "return a[\"name\"]"),
            (["row:people"], "num", "return float(a[\"age\"])"),
            (["row:orders"], "str", "return a[\"card\"]"),
            (["str"], "str", "logger.info(\"helper saw %s\", a)\n    return a"),
            (["num"], "num", "x = a\n    for i in range(2):\n        x = x + i\n    return x"),
        ]
        for i, (params, ret, body) in enumerate(self.rng.sample(shapes, 5)):
            names = ["a", "b", "c"][:len(params)]
            lines += [f"def h{i}({', '.join(names)}):", f"    {body}", "", ""]
            self.helpers.append((f"h{i}", params, ret))
        lines += [
            "class Box:",
            "    def __init__(self, v):",
            "        self.v = v",
            "",
            "    def unwrap_v(self):",
            "        return self.v",
            "",
            "    def relabel(self, w):",
            "        self.v = w",
            "",
        ]
        return "\n".join(lines).rstrip() + "\n"

    # -- statements

    def expr_of(self, scope: _Scope, kind: str, depth: int = 0) -> str | None:
        """An expression of the given kind built from variables in scope."""
        r = self.rng
        options = []
        s = self.pick(scope, "str")
        n = self.pick(scope, "num")
        row_p = self.pick(scope, "row:people")
        row_o = self.pick(scope, "row:orders")
        rows_p = self.pick(scope, "rows:people")
        lst = self.pick(scope, "list")
        box = self.pick(scope, "box")
        if kind == "str":
            if s:
                options += [s, f"{s}.upper()", f"{s} + \"-\"", f"f\"<{{{s}}}>\"", f"{s}.strip()"]
                s2 = self.pick(scope, "str")
                options += [f"{s} + \" \" + {s2}", f"\"%s|%s\" % ({s}, {s2})", f"\"{{}}~{{}}\".format({s}, {s2})"]
                if n:
                    options.append(f"f\"{{{s}}}={{{n}:.1f}}\"")
                options.append(f"({s} if len({s}) > 3 else \"short\")")
            if row_p:
                col = r.choice(["name", "email", "city"])
                options += [f"{row_p}[\"{col}\"]", f"{row_p}.get(\"{col}\")"]
            if row_o:
                options += [f"{row_o}[\"{r.choice(['item', 'card'])}\"]"]
            if rows_p:
                options.append(f"{rows_p}[{r.randint(0, 3)}][\"{r.choice(['name', 'email', 'city'])}\"]")
            if lst:
                options.append(f"{lst}[0]")
            if box:
                options.append(f"{box}.unwrap_v()")
            options.append(f"\"{r.choice(_WORDS)}\"")
        elif kind == "num":
            if n:
                n2 = self.pick(scope, "num")
                options += [n, f"{n} * 2", f"{n} + {n2}", f"abs({n} - {n2})", f"round({n}, 1)", f"-{n}"]
            if s:
                options.append(f"float(len({s}))")
            if row_p:
                options += [f"float({row_p}[\"{r.choice(['age', 'score'])}\"])"]
            if row_o:
                options.append(f"float({row_o}[\"amount\"])")
            options.append(f"{r.randint(1, 9)}.0")
        return r.choice(options) if options else None

    def statement(self, scope: _Scope, indent: str, lines: list[str], depth: int = 0):
        r = self.rng
        choice = r.choice([
            "str", "str", "num", "num", "row", "list", "tuple", "dict", "if", "loop", "helper", "box", "log", "log",
            "log", "closure", "listcomp", "aug",
        ])
        if choice in ("str", "num"):
            e = self.expr_of(scope, choice)
            name = self.pick(scope, choice) if r.random() < 0.3 else None
            name = name or self.fresh("s" if choice == "str" else "n")
            lines.append(f"{indent}{name} = {e}")
            scope.vars[name] = choice
        elif choice == "row":
            rows = self.pick(scope, "rows:")
            if rows:
                name = self.fresh("row")
                lines.append(f"{indent}{name} = {rows}[{r.randint(0, 3)}]")
                scope.vars[name] = "row:" + scope.vars[rows].split(":")[1]
        elif choice == "list":
            s = self.expr_of(scope, "str")
            name = self.fresh("lst")
            lines.append(f"{indent}{name} = []")
            lines.append(f"{indent}{name}.append({s})")
            scope.vars[name] = "list"
        elif choice == "listcomp":
            rows = self.pick(scope, "rows:people")
            if rows:
                name = self.fresh("lst")
                col = r.choice(["name", "email", "city"])
                lines.append(f"{indent}{name} = [x[\"{col}\"] for x in {rows}]")
                scope.vars[name] = "list"
        elif choice == "tuple":
            a, b = self.expr_of(scope, "str"), self.expr_of(scope, "num")
            x, y = self.fresh("s"), self.fresh("n")
            lines.append(f"{indent}{x}, {y} = {a}, {b}")
            scope.vars[x] = "str"
            scope.vars[y] = "num"
        elif choice == "dict":
            a, b = self.expr_of(scope, "str"), self.expr_of(scope, "num")
            d, x = self.fresh("d"), self.fresh("s")
            lines.append(f"{indent}{d} = {{\"k\": {a}, \"m\": {b}}}")
            lines.append(f"{indent}{x} = {d}[\"k\"]")
            scope.vars[x] = "str"
        elif choice == "aug":
            n = self.pick(scope, "num")
            if n:
                lines.append(f"{indent}{n} += {self.expr_of(scope, 'num')}")
        elif choice == "if" and depth < 2:
            n1, n2 = self.expr_of(scope, "num"), self.expr_of(scope, "num")
            target = self.fresh("s")
            lines.append(f"{indent}if {n1} > {n2}:")
            lines.append(f"{indent}    {target} = {self.expr_of(scope, 'str')}")
            self.statement(_Scope(dict(scope.vars)), indent + "    ", lines, depth + 1)
            lines.append(f"{indent}else:")
            lines.append(f"{indent}    {target} = {self.expr_of(scope, 'str')}")
            scope.vars[target] = "str"
        elif choice == "loop" and depth < 2:
            rows = self.pick(scope, "rows:")
            acc = self.fresh("acc")
            lines.append(f"{indent}{acc} = \"\"")
            if rows and r.random() < 0.7:
                table = scope.vars[rows].split(":")[1]
                col = r.choice([c for c, k in TABLES[table]["columns"].items() if k == "str"])
                item = self.fresh("it")
                lines.append(f"{indent}for {item} in {rows}:")
                lines.append(f"{indent}    {acc} = {acc} + {item}[\"{col}\"]")
                if r.random() < 0.5:
                    lines.append(f"{indent}    logger.info(\"visiting %s\", {item}[\"{col}\"])")
            else:
                lines.append(f"{indent}for i in range(3):")
                lines.append(f"{indent}    {acc} = {acc} + {self.expr_of(scope, 'str')}")
            scope.vars[acc] = "str"
        elif choice == "helper" and self.helpers:
            name, params, ret = r.choice(self.helpers)
            args = []
            for p in params:
                if p.startswith("row:"):
                    v = self.pick(scope, p)
                    if v is None:
                        return
                    args.append(v)
                else:
                    args.append(self.expr_of(scope, p))
            target = self.fresh("s" if ret == "str" else "n")
            lines.append(f"{indent}{target} = helpers.{name}({', '.join(args)})")
            scope.vars[target] = ret
        elif choice == "box":
            b = self.fresh("box")
            lines.append(f"{indent}{b} = helpers.Box({self.expr_of(scope, 'str')})")
            if r.random() < 0.4:
                lines.append(f"{indent}{b}.relabel({self.expr_of(scope, 'str')})")
            scope.vars[b] = "box"
        elif choice == "closure" and depth == 0:
            s = self.expr_of(scope, "str")
            fname, target = self.fresh("inner"), self.fresh("s")
            captured = self.fresh("cap")
            lines.append(f"{indent}{captured} = {s}")
            lines.append(f"{indent}def {fname}(suffix):")
            lines.append(f"{indent}    return {captured} + suffix")
            lines.append(f"{indent}{target} = {fname}(\"!\")")
            scope.vars[captured] = "str"
            scope.vars[target] = "str"
        elif choice == "log":
            self.log_statement(scope, indent, lines)

    def log_statement(self, scope: _Scope, indent: str, lines: list[str]):
        r = self.rng
        s = self.expr_of(scope, "str")
        n = self.expr_of(scope, "num")
        if "\"" in s or "\"" in n:
            # keep f-string slots free of nested quotes
            lines.append(f"{indent}t{self.counter} = {s}")
            lines.append(f"{indent}u{self.counter} = {n}")
            s, n = f"t{self.counter}", f"u{self.counter}"
            self.counter += 1
        style = r.choice(["printf", "printf", "brace", "fstring", "concat", "inline", "plain", "warning"])
        if style == "printf":
            lines.append(f"{indent}logger.info(\"value %s and %.2f\", {s}, {n})")
        elif style == "warning":
            lines.append(f"{indent}logger.warning(\"check %s\", {s})")
        elif style == "brace":
            lines.append(f"{indent}logger.info(\"got {{}} then {{:.1f}}\".format({s}, {n}))")
        elif style == "fstring":
            lines.append(f"{indent}logger.info(f\"saw {{{s}}} at {{{n}:.3f}}\")")
        elif style == "concat":
            lines.append(f"{indent}logger.info(\"joined \" + {s} + \" end\")")
        elif style == "inline":
            lines.append(f"{indent}logger.info(\"pair %s/%s\" % ({s}, {s}))")
        else:
            lines.append(f"{indent}logger.info(\"checkpoint {self.counter}\")")

    def main_module(self) -> str:
        head = [
            "import logging",
            "import helpers",
            "from io_utils import read_table",
            "",
            "logger = logging.getLogger(__name__)",
            "PEOPLE = read_table(\"data/people.csv\")",
            "",
            "",
            "def first_city():",
            "    return PEOPLE[0][\"city\"]",
            "",
            "",
            "def main():",
        ]
        scope = _Scope({"PEOPLE": "rows:people"})
        body = ["    orders = read_table(\"data/orders.csv\")"]
        scope.vars["orders"] = "rows:orders"
        body.append("    people = PEOPLE")
        scope.vars["people"] = "rows:people"
        body.append("    c0 = first_city()")
        scope.vars["c0"] = "str"
        for _ in range(self.n_statements):
            self.statement(scope, "    ", body)
        # make sure every program logs something derived from a source
        self.log_statement(scope, "    ", body)
        tail = ["", "", "if __name__ == \"__main__\":", "    main()", ""]
        return "\n".join(head + body + tail)

    def generate(self) -> GeneratedProgram:
        tables = self.tables()
        annotations = self.annotations()
        helpers = self.helper_module()
        main = self.main_module()
        return GeneratedProgram(self.seed, {"io_utils.py": IO_UTILS, "helpers.py": helpers, "main.py": main},
                                tables, annotations)


def generate_program(seed: int, statements: int = 14) -> GeneratedProgram:
    return ProgramGenerator(seed, statements).generate()


_NODE_KINDS = list(NodeKind)
_NAMES = ["rows", "row", "name", "email", "total", "tmp", "x", "y", "acc", "out"]


def random_dfg(rng: random.Random, n_nodes: int, fid: FunctionId | None = None) -> FunctionDfg:
    """A random graph over all node kinds, with slots, field keys, mixing edges and occasional cycles.

    Graphs are not required to come from real code; they exercise pruning and
    serialization on shapes the builder would rarely produce.
    """
    fid = fid or FunctionId(f"gen/m{rng.randint(0, 999)}.py", f"f{rng.randint(0, 9999)}", rng.randint(1, 500))
    nodes: dict[int, DfgNode] = {}
    params = 0
    for i in range(n_nodes):
        kind = rng.choice(_NODE_KINDS)
        node = DfgNode(i, kind, rng.choice(_NAMES), rng.randint(1, 400))
        if kind == NodeKind.VARIABLE:
            node.version = rng.randint(1, 5)
        elif kind == NodeKind.PARAMETER:
            node.param_index = params
            params += 1
        elif kind == NodeKind.CALL:
            node.call_args = [rng.choice(_NAMES) for _ in range(rng.randint(0, 3))]
            node.opaque = rng.random() < 0.1
            node.passthrough = rng.random() < 0.1
        elif kind == NodeKind.LOG:
            node.slot_count = rng.randint(0, 3)
            node.format_string = " ".join(["v=%s"] * node.slot_count) or "done"
            node.format_style = "printf"
            node.level = rng.choice(["INFO", "WARNING"])
            node.end_line = node.line + rng.randint(0, 2)
        elif kind == NodeKind.SOURCE:
            node.source_key = rng.choice(["data/a.csv", "data/b.csv", None])
        nodes[i] = node
    edges = set()
    for _ in range(rng.randint(0, 2 * n_nodes)):
        a, b = rng.randrange(n_nodes), rng.randrange(n_nodes)
        if a == b:
            continue
        if a > b and rng.random() < 0.8:
            a, b = b, a  # mostly forward, some back-edges
        dst = nodes[b]
        slot = None
        if dst.kind in (NodeKind.CALL, NodeKind.LOG):
            arity = dst.arity
            if arity and rng.random() < 0.8:
                slot = rng.randrange(arity)
        key = rng.choice([None, None, "name", "email"])
        edges.add(DfgEdge(a, b, slot, key, key is None and rng.random() < 0.3))
    return FunctionDfg(fid, nodes, sorted(edges, key=lambda e: (e.src, e.dst, e.slot or -1, e.key or "")))

"""Log message formats: printf-style, brace-style, f-strings, and concatenation.

Both the graph builder (which needs the expression feeding each slot) and the
redactor (which needs the literal fragments) go through this module so that
slot numbering always agrees.
"""
from __future__ import annotations

import ast
import re
import string
from dataclasses import dataclass, field

STRING = "string"
NUMBER = "number"

PRINTF_SPEC = re.compile(
    r"%(?P<key>\([^)]*\))?(?P<flags>[#0\- +]*)(?P<width>\*|\d+)?(?:\.(?P<prec>\*|\d*))?[hlL]?(?P<conv>[diouxXeEfFgGcrsa%])"
)
_PRINTF_NUMBER = set("diufFeEgG")
_BRACE_SPEC = re.compile(
    r"^(?:(?P<fill>.)?(?P<align>[<>=^]))?(?P<sign>[+\- ])?(?P<alt>#)?(?P<zero>0)?(?P<width>\d+)?(?P<group>[_,])?(?:\.(?P<prec>\d+))?(?P<type>[a-zA-Z%])?$",
    re.S,
)
_BRACE_NUMBER = set("dfFeEgGn%")

LOG_METHODS = ("debug", "info", "warning", "warn", "error", "critical", "exception", "fatal", "log")


class TemplateError(ValueError):
    """The message expression is outside the supported formatting forms."""


@dataclass(frozen=True)
class SlotSpec:
    index: int
    kind: str = STRING


@dataclass(frozen=True)
class MessageTemplate:
    literals: tuple[str, ...]
    slots: tuple[SlotSpec, ...] = ()
    anchored: bool = True

    def __post_init__(self):
        if len(self.literals) != len(self.slots) + 1:
            raise ValueError("a template needs exactly one more literal than slots")

    def render(self, values) -> str:
        out = [self.literals[0]]
        for v, lit in zip(values, self.literals[1:]):
            out.append(str(v))
            out.append(lit)
        return "".join(out)


@dataclass
class MessageParts:
    """What a log call formats: its style, format text, and one expression per slot."""

    style: str  # plain | printf | brace | fstring | concat | opaque
    format_string: str | None
    slot_exprs: list[ast.expr] = field(default_factory=list)
    message_expr: ast.expr | None = None


def brace_kind(spec: str, conversion: str | None) -> str:
    if conversion:
        return STRING
    m = _BRACE_SPEC.match(spec or "")
    if not m or not m.group("type"):
        return STRING
    if m.group("fill") not in (None, " ", "0"):
        return STRING
    return NUMBER if m.group("type") in _BRACE_NUMBER else STRING


def printf_template(fmt: str) -> MessageTemplate:
    literals, slots, buf, pos = [], [], [], 0
    for m in PRINTF_SPEC.finditer(fmt):
        buf.append(fmt[pos:m.start()])
        pos = m.end()
        if m.group("conv") == "%":
            if m.group(0) != "%%":
                raise TemplateError(f"unsupported conversion {m.group(0)!r}")
            buf.append("%")
            continue
        if m.group("key") or m.group("width") == "*" or m.group("prec") == "*":
            raise TemplateError(f"unsupported conversion {m.group(0)!r}")
        literals.append("".join(buf))
        buf = []
        kind = NUMBER if m.group("conv") in _PRINTF_NUMBER and "#" not in m.group("flags") else STRING
        slots.append(SlotSpec(len(slots), kind))
    tail = fmt[pos:]
    if "%" in tail:
        raise TemplateError("stray '%' in printf-style format")
    buf.append(tail)
    literals.append("".join(buf))
    return MessageTemplate(tuple(literals), tuple(slots))


def _brace_fields(fmt: str):
    try:
        parsed = list(string.Formatter().parse(fmt))
    except ValueError as exc:
        raise TemplateError(str(exc)) from None
    for literal, fname, spec, conv in parsed:
        if fname is not None and spec and ("{" in spec):
            raise TemplateError("nested replacement fields in a format spec are not supported")
        yield literal, fname, spec, conv


def brace_template(fmt: str) -> MessageTemplate:
    literals, slots, buf = [], [], []
    for literal, fname, spec, conv in _brace_fields(fmt):
        buf.append(literal)
        if fname is None:
            continue
        literals.append("".join(buf))
        buf = []
        slots.append(SlotSpec(len(slots), brace_kind(spec, conv)))
    literals.append("".join(buf))
    return MessageTemplate(tuple(literals), tuple(slots))


def _flatten_concat(expr: ast.expr) -> list[ast.expr]:
    if isinstance(expr, ast.BinOp) and isinstance(expr.op, ast.Add):
        return _flatten_concat(expr.left) + _flatten_concat(expr.right)
    return [expr]


def _is_str_const(e) -> bool:
    return isinstance(e, ast.Constant) and isinstance(e.value, str)


def _fstring_pieces(js: ast.JoinedStr):
    """Yield ("lit", text) and ("slot", FormattedValue) pieces."""
    for v in js.values:
        if _is_str_const(v):
            yield "lit", v.value
        elif isinstance(v, ast.FormattedValue):
            yield "slot", v
        else:  # pragma: no cover - CPython only emits the two above
            raise TemplateError("unexpected f-string component")


def _fv_kind(fv: ast.FormattedValue) -> str:
    conv = None if fv.conversion == -1 else chr(fv.conversion)
    if fv.format_spec is None:
        return STRING if conv is None else STRING
    if not all(_is_str_const(v) for v in fv.format_spec.values):
        return STRING
    spec = "".join(v.value for v in fv.format_spec.values)
    return brace_kind(spec, conv)


def expression_template(expr: ast.expr) -> tuple[MessageTemplate, list[ast.expr]]:
    """Template and slot expressions for an f-string or a concatenation."""
    literals, slots, exprs, buf = [], [], [], []

    def add_slot(e, kind):
        literals.append("".join(buf))
        buf.clear()
        slots.append(SlotSpec(len(slots), kind))
        exprs.append(e)

    operands = _flatten_concat(expr)
    for op in operands:
        if _is_str_const(op):
            buf.append(op.value)
        elif isinstance(op, ast.JoinedStr):
            for tag, piece in _fstring_pieces(op):
                if tag == "lit":
                    buf.append(piece)
                else:
                    if piece.format_spec is not None and not all(_is_str_const(v) for v in piece.format_spec.values):
                        raise TemplateError("dynamic format spec in f-string")
                    add_slot(piece.value, _fv_kind(piece))
        else:
            add_slot(op, STRING)
    literals.append("".join(buf))
    return MessageTemplate(tuple(literals), tuple(slots)), exprs


def _is_template_expr(expr) -> bool:
    if isinstance(expr, ast.JoinedStr):
        return True
    if isinstance(expr, ast.BinOp) and isinstance(expr.op, ast.Add):
        return any(_is_str_const(o) or isinstance(o, ast.JoinedStr) for o in _flatten_concat(expr))
    return False


def message_parts(call: ast.Call) -> MessageParts:
    """Decompose a logger call into its message format and slot expressions.

    Never raises: unsupported message shapes come back with style ``opaque``.
    """
    method = call.func.attr if isinstance(call.func, ast.Attribute) else ""
    args = list(call.args)
    if method == "log":
        args = args[1:]
    if not args or any(isinstance(a, ast.Starred) for a in args):
        return MessageParts("opaque", None, [], args[0] if args else None)
    msg, rest = args[0], args[1:]
    try:
        if _is_str_const(msg):
            if not rest:
                return MessageParts("plain", msg.value, [], msg)
            tmpl = printf_template(msg.value)
            if len(tmpl.slots) != len(rest):
                raise TemplateError("printf slot count does not match argument count")
            return MessageParts("printf", msg.value, rest, msg)
        if rest:
            raise TemplateError("formatted message with extra logger arguments")
        if isinstance(msg, ast.BinOp) and isinstance(msg.op, ast.Mod) and _is_str_const(msg.left):
            right = msg.right
            vals = list(right.elts) if isinstance(right, ast.Tuple) else [right]
            if any(isinstance(v, ast.Starred) for v in vals):
                raise TemplateError("starred printf arguments")
            tmpl = printf_template(msg.left.value)
            if len(tmpl.slots) != len(vals):
                raise TemplateError("printf slot count does not match argument count")
            return MessageParts("printf", msg.left.value, vals, msg)
        if (isinstance(msg, ast.Call) and isinstance(msg.func, ast.Attribute) and msg.func.attr == "format"
                and _is_str_const(msg.func.value)):
            return MessageParts("brace", msg.func.value.value, _brace_slot_exprs(msg), msg)
        if _is_template_expr(msg):
            _, exprs = expression_template(msg)
            style = "fstring" if isinstance(msg, ast.JoinedStr) else "concat"
            return MessageParts(style, ast.unparse(msg), exprs, msg)
    except TemplateError:
        return MessageParts("opaque", None, [], msg)
    return MessageParts("opaque", None, [], msg)


def _brace_slot_exprs(call: ast.Call) -> list[ast.expr]:
    fmt = call.func.value.value
    if any(isinstance(a, ast.Starred) for a in call.args) or any(k.arg is None for k in call.keywords):
        raise TemplateError("starred .format() arguments")
    kw = {k.arg: k.value for k in call.keywords}
    exprs, auto = [], 0
    for _, fname, _, _ in _brace_fields(fmt):
        if fname is None:
            continue
        head = re.split(r"[.\[]", fname, maxsplit=1)[0]
        if head == "":
            idx = auto
            auto += 1
            if idx >= len(call.args):
                raise TemplateError("too few .format() arguments")
            exprs.append(call.args[idx])
        elif head.isdigit():
            if int(head) >= len(call.args):
                raise TemplateError("too few .format() arguments")
            exprs.append(call.args[int(head)])
        elif head in kw:
            exprs.append(kw[head])
        else:
            raise TemplateError(f"unknown .format() field {head!r}")
    return exprs


def template_for(style: str, format_string: str | None) -> MessageTemplate:
    """Rebuild the template from what a LogStatement node records."""
    if style == "plain":
        return MessageTemplate((format_string or "",))
    if style == "printf":
        return printf_template(format_string)
    if style == "brace":
        return brace_template(format_string)
    if style in ("fstring", "concat"):
        expr = ast.parse(format_string, mode="eval").body
        return expression_template(expr)[0]
    raise TemplateError(f"no template for style {style!r}")

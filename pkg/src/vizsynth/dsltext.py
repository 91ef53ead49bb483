"""Concrete s-expression syntax for visualization programs.

Grammar (see docs/dsl-grammar.txt):

    program  := table | (KIND table :x COL :y COL [:color COL] [:subplot COL])
    table    := (input)
              | (bin table N COL)
              | (filter table COL OP VALUE)
              | (summarize table (keys COL...) AGG COL)
              | (mutate table COL OP (args COL...))
              | (select table (cols COL...))
"""

from __future__ import annotations

from datetime import date
from typing import Optional, Union

from . import programs as prog
from .types import PlotKind


class DslSyntaxError(Exception):
    def __init__(self, msg: str, pos: int):
        super().__init__(f"{msg} (at offset {pos})")
        self.pos = pos


Sexp = Union[str, list]


def _tokenize(text: str) -> list[tuple[str, int]]:
    out = []
    i = 0
    while i < len(text):
        c = text[i]
        if c.isspace():
            i += 1
        elif c in "()":
            out.append((c, i))
            i += 1
        elif c == '"':
            j = i + 1
            while j < len(text) and text[j] != '"':
                j += 1
            if j >= len(text):
                raise DslSyntaxError("unterminated string", i)
            out.append((text[i : j + 1], i))
            i = j + 1
        else:
            j = i
            while j < len(text) and not text[j].isspace() and text[j] not in "()":
                j += 1
            out.append((text[i:j], i))
            i = j
    return out


def _parse_sexp(tokens: list[tuple[str, int]], i: int) -> tuple[Sexp, int]:
    if i >= len(tokens):
        raise DslSyntaxError("unexpected end of input", 0)
    tok, pos = tokens[i]
    if tok == "(":
        items: list[Sexp] = []
        i += 1
        while i < len(tokens) and tokens[i][0] != ")":
            item, i = _parse_sexp(tokens, i)
            items.append(item)
        if i >= len(tokens):
            raise DslSyntaxError("missing closing parenthesis", pos)
        return items, i + 1
    if tok == ")":
        raise DslSyntaxError("unexpected ')'", pos)
    return tok, i + 1


def _atom(s: Sexp, what: str) -> str:
    if not isinstance(s, str):
        raise DslSyntaxError(f"expected {what}", 0)
    return s


def _value(tok: str) -> prog.FilterRhs:
    if tok.startswith('"') and tok.endswith('"'):
        return tok[1:-1]
    try:
        return int(tok)
    except ValueError:
        pass
    try:
        return float(tok)
    except ValueError:
        pass
    if tok.startswith("@"):
        return prog.ColRef(tok[1:])
    return tok


_FILTER_OPS = {"=": "=", "!=": "!=", "<": "<", "<=": "<=", ">": ">", ">=": ">="}


def _parse_table(s: Sexp) -> prog.TransformProgram:
    if isinstance(s, str) and s == "input":
        return prog.Input()
    if not isinstance(s, list) or not s:
        raise DslSyntaxError("expected a table expression", 0)
    head = _atom(s[0], "operator")
    if head == "input":
        return prog.Input()
    if head == "bin":
        if len(s) != 4:
            raise DslSyntaxError("bin takes (bin table n column)", 0)
        return prog.Bin(_parse_table(s[1]), int(_atom(s[2], "n")), _atom(s[3], "column"))
    if head == "filter":
        if len(s) != 5:
            raise DslSyntaxError("filter takes (filter table col op value)", 0)
        op = _atom(s[3], "operator")
        if op not in _FILTER_OPS:
            raise DslSyntaxError(f"unknown filter operator {op!r}", 0)
        return prog.Filter(
            _parse_table(s[1]), _atom(s[2], "column"), op, _value(_atom(s[4], "value"))
        )
    if head == "summarize":
        if len(s) != 5:
            raise DslSyntaxError(
                "summarize takes (summarize table (keys ...) agg column)", 0
            )
        keys_s = s[2]
        if not isinstance(keys_s, list) or not keys_s or keys_s[0] != "keys":
            raise DslSyntaxError("summarize keys must be (keys col...)", 0)
        keys = tuple(_atom(k, "key") for k in keys_s[1:])
        return prog.Summarize(
            _parse_table(s[1]), keys, _atom(s[3], "aggregation"), _atom(s[4], "column")
        )
    if head == "mutate":
        if len(s) != 5:
            raise DslSyntaxError(
                "mutate takes (mutate table target op (args ...))", 0
            )
        args_s = s[4]
        if not isinstance(args_s, list) or not args_s or args_s[0] != "args":
            raise DslSyntaxError("mutate args must be (args col...)", 0)
        return prog.Mutate(
            _parse_table(s[1]),
            _atom(s[2], "target"),
            _atom(s[3], "operator"),
            tuple(_atom(a, "arg") for a in args_s[1:]),
        )
    if head == "select":
        if len(s) != 3:
            raise DslSyntaxError("select takes (select table (cols ...))", 0)
        cols_s = s[2]
        if not isinstance(cols_s, list) or not cols_s or cols_s[0] != "cols":
            raise DslSyntaxError("select columns must be (cols col...)", 0)
        return prog.Select(_parse_table(s[1]), tuple(_atom(c, "col") for c in cols_s[1:]))
    raise DslSyntaxError(f"unknown operator {head!r}", 0)


_KINDS = {k.value: k for k in PlotKind}


def parse_program(text: str) -> Union[prog.TransformProgram, prog.VisProgram]:
    """Parse either a bare table program or a full visualization program."""
    tokens = _tokenize(text)
    sexp, end = _parse_sexp(tokens, 0)
    if end != len(tokens):
        raise DslSyntaxError("trailing tokens after program", tokens[end][1])
    if isinstance(sexp, list) and sexp and isinstance(sexp[0], str) and sexp[0] in _KINDS:
        kind = _KINDS[sexp[0]]
        table = _parse_table(sexp[1])
        channels: dict[str, Optional[str]] = {
            "x": None,
            "y": None,
            "color": None,
            "subplot": None,
        }
        rest = sexp[2:]
        i = 0
        while i < len(rest):
            key = _atom(rest[i], "channel keyword")
            if not key.startswith(":") or key[1:] not in channels:
                raise DslSyntaxError(f"unknown channel {key!r}", 0)
            if i + 1 >= len(rest):
                raise DslSyntaxError(f"missing column after {key}", 0)
            channels[key[1:]] = _atom(rest[i + 1], "column")
            i += 2
        if channels["x"] is None or channels["y"] is None:
            raise DslSyntaxError("plot needs :x and :y channels", 0)
        plot = prog.PlotProgram(
            kind, channels["x"], channels["y"], channels["color"], channels["subplot"]
        )
        return prog.VisProgram(table, plot)
    return _parse_table(sexp)


def _fmt_value(v: prog.FilterRhs) -> str:
    if isinstance(v, prog.ColRef):
        return f"@{v.name}"
    if isinstance(v, str):
        return f'"{v}"'
    if isinstance(v, date):
        return f'"{v.isoformat()}"'
    if isinstance(v, float) and v.is_integer():
        return f"{v:.1f}"
    return str(v)


def print_table(p: prog.TransformProgram) -> str:
    if isinstance(p, prog.Input):
        return "(input)"
    if isinstance(p, prog.Bin):
        return f"(bin {print_table(p.source)} {p.n} {p.target})"
    if isinstance(p, prog.Filter):
        return (
            f"(filter {print_table(p.source)} {p.col} {p.op} {_fmt_value(p.value)})"
        )
    if isinstance(p, prog.Summarize):
        return (
            f"(summarize {print_table(p.source)} (keys {' '.join(p.keys)}) "
            f"{p.agg} {p.target})"
        )
    if isinstance(p, prog.Mutate):
        return (
            f"(mutate {print_table(p.source)} {p.target} {p.op} "
            f"(args {' '.join(p.args)}))"
        )
    if isinstance(p, prog.Select):
        return f"(select {print_table(p.source)} (cols {' '.join(p.cols)}))"
    raise TypeError(p)


def print_program(p: Union[prog.TransformProgram, prog.VisProgram]) -> str:
    if isinstance(p, prog.VisProgram):
        parts = [p.plot.kind.value, print_table(p.table), f":x {p.plot.x}", f":y {p.plot.y}"]
        if p.plot.color is not None:
            parts.append(f":color {p.plot.color}")
        if p.plot.subplot is not None:
            parts.append(f":subplot {p.plot.subplot}")
        return "(" + " ".join(parts) + ")"
    return print_table(p)

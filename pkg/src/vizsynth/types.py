"""Refinement types: column-type lattice, base types, and logical qualifiers.

A refinement type pairs a base type (a table schema or a plot kind) with a
qualifier: a formula over syntactic-constraint atoms ``pi(x.attr, prov)`` and
table-property comparisons between cardinality / aggregate terms.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields
from enum import Enum
from typing import Iterable, Iterator, Optional, Union


def cached_hash(cls):
    """Cache the structural hash of a frozen dataclass instance; deep
    qualifier trees are hashed constantly as cache keys."""
    names = [f.name for f in fields(cls)]

    def __hash__(self):  # noqa: N807
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash((cls.__name__,) + tuple(getattr(self, n) for n in names))
            object.__setattr__(self, "_hash", h)
        return h

    cls.__hash__ = __hash__
    return cls


class ColumnType(Enum):
    TOP = "top"
    QUALITATIVE = "qualitative"
    QUANTITATIVE = "quantitative"
    NOMINAL = "nominal"
    ORDINAL = "ordinal"
    TEMPORAL = "temporal"
    DISCRETE = "discrete"
    CONTINUOUS = "continuous"

    def __repr__(self) -> str:
        return self.name.capitalize()


_PARENT = {
    ColumnType.NOMINAL: ColumnType.QUALITATIVE,
    ColumnType.ORDINAL: ColumnType.QUALITATIVE,
    ColumnType.TEMPORAL: ColumnType.QUALITATIVE,
    ColumnType.DISCRETE: ColumnType.QUANTITATIVE,
    ColumnType.CONTINUOUS: ColumnType.QUANTITATIVE,
    ColumnType.QUALITATIVE: ColumnType.TOP,
    ColumnType.QUANTITATIVE: ColumnType.TOP,
}

LEAF_COLUMN_TYPES = (
    ColumnType.NOMINAL,
    ColumnType.ORDINAL,
    ColumnType.TEMPORAL,
    ColumnType.DISCRETE,
    ColumnType.CONTINUOUS,
)


def column_ancestors(t: ColumnType) -> list[ColumnType]:
    """t itself followed by its proper supertypes, bottom-up."""
    out = [t]
    while t in _PARENT:
        t = _PARENT[t]
        out.append(t)
    return out


def column_subtype(a: ColumnType, b: ColumnType) -> bool:
    return b in column_ancestors(a)


def column_compatible(a: ColumnType, b: ColumnType) -> bool:
    return column_subtype(a, b) or column_subtype(b, a)


def column_meet(a: ColumnType, b: ColumnType) -> Optional[ColumnType]:
    """Greatest lower bound along the subtype chain, None if incomparable."""
    if column_subtype(a, b):
        return a
    if column_subtype(b, a):
        return b
    return None


def column_join(a: ColumnType, b: ColumnType) -> ColumnType:
    anc = column_ancestors(b)
    for t in column_ancestors(a):
        if t in anc:
            return t
    return ColumnType.TOP


# ---------------------------------------------------------------------------
# Base types
# ---------------------------------------------------------------------------


@cached_hash
@dataclass(frozen=True)
class TableType:
    """Schema as a name-sorted tuple of (column, ColumnType)."""

    schema: tuple[tuple[str, ColumnType], ...]

    def __post_init__(self) -> None:
        names = [c for c, _ in self.schema]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate columns in schema: {names}")
        if any(not c for c in names):
            raise ValueError("empty column name in schema")
        if list(names) != sorted(names):
            object.__setattr__(
                self, "schema", tuple(sorted(self.schema, key=lambda p: p[0]))
            )

    def columns(self) -> tuple[str, ...]:
        return tuple(c for c, _ in self.schema)

    def get(self, col: str) -> Optional[ColumnType]:
        for c, t in self.schema:
            if c == col:
                return t
        return None

    def with_column(self, col: str, ctype: ColumnType) -> "TableType":
        items = dict(self.schema)
        items[col] = ctype
        return TableType(tuple(sorted(items.items())))

    def without_columns(self, cols: Iterable[str]) -> "TableType":
        drop = set(cols)
        return TableType(tuple(p for p in self.schema if p[0] not in drop))

    def __repr__(self) -> str:
        inner = ", ".join(f"{c}: {t!r}" for c, t in self.schema)
        return f"Table({{{inner}}})"


class PlotKind(Enum):
    BAR = "bar"
    SCATTER = "scatter"
    LINE = "line"
    AREA = "area"


@cached_hash
@dataclass(frozen=True)
class PlotType:
    kind: PlotKind

    def __repr__(self) -> str:
        return f"{self.kind.value.capitalize()}Plot"


@dataclass(frozen=True)
class StrType:
    def __repr__(self) -> str:
        return "Str"


@dataclass(frozen=True)
class IntType:
    def __repr__(self) -> str:
        return "Int"


BaseType = Union[TableType, PlotType, StrType, IntType]


def table_base(schema: dict[str, ColumnType] | Iterable[tuple[str, ColumnType]]) -> TableType:
    items = schema.items() if isinstance(schema, dict) else schema
    return TableType(tuple(sorted(items)))


# ---------------------------------------------------------------------------
# Qualifier terms
# ---------------------------------------------------------------------------

SELF_VAR = "v"  # the refinement self-variable (nu)
INPUT_VAR = "x"  # canonical name for a plotting program's table parameter


@cached_hash
@dataclass(frozen=True)
class TVar:
    name: str


@cached_hash
@dataclass(frozen=True)
class TProj:
    table: "TableTerm"
    cols: tuple[str, ...]

    def __post_init__(self) -> None:
        canon = tuple(sorted(set(self.cols)))
        if canon != self.cols:
            object.__setattr__(self, "cols", canon)


@cached_hash
@dataclass(frozen=True)
class TFilter:
    table: "TableTerm"
    col: str
    op: str  # one of = != < <= > >=
    value: "ConstKey"


TableTerm = Union[TVar, TProj, TFilter]

# Constants inside Filter terms: kept as primitive, hashable keys.
ConstKey = Union[str, int, float]


@cached_hash
@dataclass(frozen=True)
class Card:
    table: TableTerm


@cached_hash
@dataclass(frozen=True)
class AggTerm:
    fn: str  # 'max' | 'min'
    table: TableTerm


@cached_hash
@dataclass(frozen=True)
class IntLit:
    value: int


@cached_hash
@dataclass(frozen=True)
class NumVar:
    name: str


NumTerm = Union[Card, AggTerm, IntLit, NumVar]


def proj(var: str, cols: Iterable[str]) -> Card:
    """|Proj(var, cols)| — the most common cardinality term."""
    return Card(TProj(TVar(var), tuple(cols)))


def whole(var: str = SELF_VAR) -> Card:
    """|var| — cardinality of the whole table."""
    return Card(TVar(var))


# ---------------------------------------------------------------------------
# Qualifier formulas
# ---------------------------------------------------------------------------


@cached_hash
@dataclass(frozen=True)
class SourceRef:
    """Dataflow provenance: attribute derived from column `col` of table `var`."""

    var: str
    col: str


Provenance = Union[str, SourceRef]  # operator name or dataflow source


@cached_hash
@dataclass(frozen=True)
class Pi:
    """Syntactic constraint pi(var.attr, prov)."""

    var: str
    attr: str  # channel name (x/y/color/subplot) or column name
    prov: Provenance


@cached_hash
@dataclass(frozen=True)
class QCmp:
    lhs: NumTerm
    op: str  # '=', '<=', '>='
    rhs: NumTerm


@cached_hash
@dataclass(frozen=True)
class QTrue:
    pass


@cached_hash
@dataclass(frozen=True)
class QFalse:
    pass


@cached_hash
@dataclass(frozen=True)
class QNot:
    arg: "Qualifier"


@cached_hash
@dataclass(frozen=True)
class QAnd:
    args: tuple["Qualifier", ...]


@cached_hash
@dataclass(frozen=True)
class QOr:
    args: tuple["Qualifier", ...]


Qualifier = Union[QTrue, QFalse, Pi, QCmp, QNot, QAnd, QOr]

TRUE = QTrue()
FALSE = QFalse()


def qand(*qs: Qualifier) -> Qualifier:
    flat: list[Qualifier] = []
    for q in qs:
        if isinstance(q, QTrue):
            continue
        if isinstance(q, QFalse):
            return FALSE
        if isinstance(q, QAnd):
            flat.extend(q.args)
        else:
            flat.append(q)
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return QAnd(tuple(flat))


def qor(*qs: Qualifier) -> Qualifier:
    flat: list[Qualifier] = []
    for q in qs:
        if isinstance(q, QFalse):
            continue
        if isinstance(q, QTrue):
            return TRUE
        if isinstance(q, QOr):
            flat.extend(q.args)
        else:
            flat.append(q)
    if not flat:
        return FALSE
    if len(flat) == 1:
        return flat[0]
    return QOr(tuple(flat))


def conjuncts(q: Qualifier) -> tuple[Qualifier, ...]:
    if isinstance(q, QTrue):
        return ()
    if isinstance(q, QAnd):
        return q.args
    return (q,)


def subformulas(q: Qualifier) -> Iterator[Qualifier]:
    yield q
    if isinstance(q, QNot):
        yield from subformulas(q.arg)
    elif isinstance(q, (QAnd, QOr)):
        for a in q.args:
            yield from subformulas(a)


def term_columns(t: Union[TableTerm, NumTerm]) -> set[str]:
    """Column names syntactically mentioned by a term."""
    if isinstance(t, TVar):
        return set()
    if isinstance(t, TProj):
        return set(t.cols) | term_columns(t.table)
    if isinstance(t, TFilter):
        return {t.col} | term_columns(t.table)
    if isinstance(t, Card):
        return term_columns(t.table)
    if isinstance(t, AggTerm):
        return term_columns(t.table)
    return set()


def term_has_bare_table(t: Union[TableTerm, NumTerm]) -> bool:
    """True if the term observes a whole table without projecting (e.g. |v|)."""
    if isinstance(t, TVar):
        return True
    if isinstance(t, TProj):
        return False
    if isinstance(t, TFilter):
        return term_has_bare_table(t.table)
    if isinstance(t, (Card, AggTerm)):
        return term_has_bare_table(t.table)
    return False


def num_terms(q: Qualifier) -> Iterator[NumTerm]:
    for sub in subformulas(q):
        if isinstance(sub, QCmp):
            yield sub.lhs
            yield sub.rhs


def pi_atoms(q: Qualifier) -> Iterator[Pi]:
    for sub in subformulas(q):
        if isinstance(sub, Pi):
            yield sub


def rename_var(q: Qualifier, old: str, new: str) -> Qualifier:
    """Rename a table variable throughout a qualifier."""

    def rt(t: TableTerm) -> TableTerm:
        if isinstance(t, TVar):
            return TVar(new) if t.name == old else t
        if isinstance(t, TProj):
            return TProj(rt(t.table), t.cols)
        return TFilter(rt(t.table), t.col, t.op, t.value)

    def rn(t: NumTerm) -> NumTerm:
        if isinstance(t, Card):
            return Card(rt(t.table))
        if isinstance(t, AggTerm):
            return AggTerm(t.fn, rt(t.table))
        if isinstance(t, NumVar) and t.name == old:
            return NumVar(new)
        return t

    def rq(f: Qualifier) -> Qualifier:
        if isinstance(f, Pi):
            var = new if f.var == old else f.var
            prov = f.prov
            if isinstance(prov, SourceRef) and prov.var == old:
                prov = SourceRef(new, prov.col)
            return Pi(var, f.attr, prov)
        if isinstance(f, QCmp):
            return QCmp(rn(f.lhs), f.op, rn(f.rhs))
        if isinstance(f, QNot):
            return QNot(rq(f.arg))
        if isinstance(f, QAnd):
            return qand(*(rq(a) for a in f.args))
        if isinstance(f, QOr):
            return qor(*(rq(a) for a in f.args))
        return f

    return rq(q)


# ---------------------------------------------------------------------------
# Refinement types
# ---------------------------------------------------------------------------


@cached_hash
@dataclass(frozen=True)
class Scalar:
    base: BaseType
    qual: Qualifier = TRUE

    def __repr__(self) -> str:
        if isinstance(self.qual, QTrue):
            return f"{{v: {self.base!r}}}"
        return f"{{v: {self.base!r} | {format_qualifier(self.qual)}}}"


@cached_hash
@dataclass(frozen=True)
class Func:
    param: str
    input: "RefinementType"
    output: "RefinementType"

    def __repr__(self) -> str:
        return f"{self.param}: {self.input!r} -> {self.output!r}"


RefinementType = Union[Scalar, Func]


class TypeEnv:
    """Immutable variable -> RefinementType mapping (no shadowing)."""

    __slots__ = ("_items",)

    def __init__(self, items: Iterable[tuple[str, RefinementType]] = ()):
        self._items = tuple(items)
        names = [n for n, _ in self._items]
        if len(set(names)) != len(names):
            raise ValueError("shadowed variable in type environment")

    def bind(self, name: str, r: RefinementType) -> "TypeEnv":
        return TypeEnv(self._items + ((name, r),))

    def lookup(self, name: str) -> Optional[RefinementType]:
        for n, r in self._items:
            if n == name:
                return r
        return None

    def items(self) -> tuple[tuple[str, RefinementType], ...]:
        return self._items

    def __hash__(self) -> int:
        return hash(self._items)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, TypeEnv) and self._items == other._items


EMPTY_ENV = TypeEnv()


# ---------------------------------------------------------------------------
# Pretty-printing and canonical JSON serialization
# ---------------------------------------------------------------------------


def format_term(t: Union[TableTerm, NumTerm]) -> str:
    if isinstance(t, TVar):
        return t.name
    if isinstance(t, TProj):
        return f"Proj({format_term(t.table)}, {{{', '.join(t.cols)}}})"
    if isinstance(t, TFilter):
        return f"Filter({format_term(t.table)}, {t.col} {t.op} {t.value!r})"
    if isinstance(t, Card):
        return f"|{format_term(t.table)}|"
    if isinstance(t, AggTerm):
        return f"{t.fn}({format_term(t.table)})"
    if isinstance(t, IntLit):
        return str(t.value)
    return t.name


def format_qualifier(q: Qualifier) -> str:
    if isinstance(q, QTrue):
        return "true"
    if isinstance(q, QFalse):
        return "false"
    if isinstance(q, Pi):
        prov = q.prov if isinstance(q.prov, str) else f"{q.prov.var}.{q.prov.col}"
        return f"pi({q.var}.{q.attr}, {prov})"
    if isinstance(q, QCmp):
        op = {"<=": "<=", ">=": ">=", "=": "="}[q.op]
        return f"{format_term(q.lhs)} {op} {format_term(q.rhs)}"
    if isinstance(q, QNot):
        return f"!{format_qualifier(q.arg)}"
    if isinstance(q, QAnd):
        return "(" + " && ".join(format_qualifier(a) for a in q.args) + ")"
    if isinstance(q, QOr):
        return "(" + " || ".join(format_qualifier(a) for a in q.args) + ")"
    raise TypeError(q)


def normalized_qualifier_str(q: Qualifier) -> str:
    """Stable rendering with sorted conjunct/disjunct order, for fixtures."""

    def norm(f: Qualifier) -> Qualifier:
        if isinstance(f, QAnd):
            return QAnd(tuple(sorted((norm(a) for a in f.args), key=format_qualifier)))
        if isinstance(f, QOr):
            return QOr(tuple(sorted((norm(a) for a in f.args), key=format_qualifier)))
        if isinstance(f, QNot):
            return QNot(norm(f.arg))
        return f

    return format_qualifier(norm(q))


def _term_json(t: Union[TableTerm, NumTerm]) -> dict:
    if isinstance(t, TVar):
        return {"op": "var", "name": t.name}
    if isinstance(t, TProj):
        return {"op": "proj", "table": _term_json(t.table), "cols": list(t.cols)}
    if isinstance(t, TFilter):
        return {
            "op": "filter",
            "table": _term_json(t.table),
            "col": t.col,
            "rel": t.op,
            "value": t.value,
        }
    if isinstance(t, Card):
        return {"op": "card", "table": _term_json(t.table)}
    if isinstance(t, AggTerm):
        return {"op": t.fn, "table": _term_json(t.table)}
    if isinstance(t, IntLit):
        return {"op": "const", "value": t.value}
    return {"op": "numvar", "name": t.name}


def _term_from_json(d: dict) -> Union[TableTerm, NumTerm]:
    op = d["op"]
    if op == "var":
        return TVar(d["name"])
    if op == "proj":
        return TProj(_term_from_json(d["table"]), tuple(d["cols"]))
    if op == "filter":
        return TFilter(_term_from_json(d["table"]), d["col"], d["rel"], d["value"])
    if op == "card":
        return Card(_term_from_json(d["table"]))
    if op in ("max", "min"):
        return AggTerm(op, _term_from_json(d["table"]))
    if op == "const":
        return IntLit(d["value"])
    if op == "numvar":
        return NumVar(d["name"])
    raise ValueError(f"unknown term op {op!r}")


def qualifier_to_json(q: Qualifier) -> dict:
    if isinstance(q, QTrue):
        return {"op": "true"}
    if isinstance(q, QFalse):
        return {"op": "false"}
    if isinstance(q, Pi):
        prov: object
        if isinstance(q.prov, SourceRef):
            prov = {"var": q.prov.var, "col": q.prov.col}
        else:
            prov = q.prov
        return {"op": "pi", "var": q.var, "attr": q.attr, "prov": prov}
    if isinstance(q, QCmp):
        return {
            "op": "cmp",
            "rel": q.op,
            "lhs": _term_json(q.lhs),
            "rhs": _term_json(q.rhs),
        }
    if isinstance(q, QNot):
        return {"op": "not", "arg": qualifier_to_json(q.arg)}
    if isinstance(q, QAnd):
        return {"op": "and", "args": [qualifier_to_json(a) for a in q.args]}
    if isinstance(q, QOr):
        return {"op": "or", "args": [qualifier_to_json(a) for a in q.args]}
    raise TypeError(q)


def qualifier_from_json(d: dict) -> Qualifier:
    op = d["op"]
    if op == "true":
        return TRUE
    if op == "false":
        return FALSE
    if op == "pi":
        prov = d["prov"]
        if isinstance(prov, dict):
            prov = SourceRef(prov["var"], prov["col"])
        return Pi(d["var"], d["attr"], prov)
    if op == "cmp":
        lhs = _term_from_json(d["lhs"])
        rhs = _term_from_json(d["rhs"])
        return QCmp(lhs, d["rel"], rhs)  # type: ignore[arg-type]
    if op == "not":
        return QNot(qualifier_from_json(d["arg"]))
    if op == "and":
        return qand(*(qualifier_from_json(a) for a in d["args"]))
    if op == "or":
        return qor(*(qualifier_from_json(a) for a in d["args"]))
    raise ValueError(f"unknown qualifier op {op!r}")


def base_to_json(b: BaseType) -> dict:
    if isinstance(b, TableType):
        return {"kind": "table", "schema": {c: t.value for c, t in b.schema}}
    if isinstance(b, PlotType):
        return {"kind": "plot", "plot": b.kind.value}
    if isinstance(b, StrType):
        return {"kind": "str"}
    return {"kind": "int"}


def base_from_json(d: dict) -> BaseType:
    kind = d["kind"]
    if kind == "table":
        return table_base({c: ColumnType(t) for c, t in d["schema"].items()})
    if kind == "plot":
        return PlotType(PlotKind(d["plot"]))
    if kind == "str":
        return StrType()
    if kind == "int":
        return IntType()
    raise ValueError(f"unknown base kind {kind!r}")


def type_to_json(r: RefinementType) -> dict:
    if isinstance(r, Scalar):
        return {"base": base_to_json(r.base), "qualifier": qualifier_to_json(r.qual)}
    return {
        "param": r.param,
        "input": type_to_json(r.input),
        "output": type_to_json(r.output),
    }


def type_from_json(d: dict) -> RefinementType:
    if "param" in d:
        return Func(d["param"], type_from_json(d["input"]), type_from_json(d["output"]))
    return Scalar(base_from_json(d["base"]), qualifier_from_json(d["qualifier"]))


def canonical_type_json(r: RefinementType) -> str:
    return json.dumps(type_to_json(r), sort_keys=True, separators=(",", ":"))

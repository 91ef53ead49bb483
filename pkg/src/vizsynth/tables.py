"""Tabular data model, CSV ingestion, column-type inference, and the
provenance-tracking interpreter for the table-transformation DSL.

Tables are bags of typed rows. All cardinality observations count distinct
tuples; duplicates are kept because plotting needs them.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import re
from dataclasses import dataclass
from datetime import date
from typing import Callable, Iterable, Optional, Sequence, Union

from . import programs as prog
from .types import (
    AggTerm,
    Card,
    ColumnType,
    IntLit,
    NumTerm,
    Pi,
    QAnd,
    QCmp,
    QFalse,
    QNot,
    QOr,
    QTrue,
    Qualifier,
    Scalar,
    SourceRef,
    TableTerm,
    TableType,
    TFilter,
    TProj,
    TVar,
    column_subtype,
    qand,
    table_base,
    whole,
    proj,
    SELF_VAR,
)


class TableError(Exception):
    pass


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            raise ValueError("interval lower bound exceeds upper bound")

    def midpoint(self) -> float:
        return (self.lo + self.hi) / 2.0

    def label(self) -> str:
        return f"{_fmt_num(self.lo)}-{_fmt_num(self.hi)}"


Value = Union[None, str, int, float, date, Interval]


def _fmt_num(x: float) -> str:
    if float(x).is_integer():
        return str(int(x))
    return f"{x:g}"


def value_kind(v: Value) -> str:
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "str"
    if isinstance(v, int):
        return "int"
    if isinstance(v, float):
        return "float"
    if isinstance(v, date):
        return "date"
    if isinstance(v, Interval):
        return "interval"
    return "str"


_KIND_OK = {
    ColumnType.TOP: {"str", "int", "float", "date", "interval"},
    ColumnType.QUALITATIVE: {"str", "date"},
    ColumnType.NOMINAL: {"str"},
    ColumnType.ORDINAL: {"str", "int"},
    ColumnType.TEMPORAL: {"date"},
    ColumnType.QUANTITATIVE: {"int", "float", "interval"},
    ColumnType.DISCRETE: {"int", "interval"},
    ColumnType.CONTINUOUS: {"int", "float"},
}


def kind_consistent(ctype: ColumnType, v: Value) -> bool:
    return v is None or value_kind(v) in _KIND_OK[ctype]


class Table:
    """Ordered columns, bag of rows, and per-column provenance tags."""

    __slots__ = ("columns", "rows", "provenance", "_fingerprint")

    def __init__(
        self,
        columns: Sequence[tuple[str, ColumnType]],
        rows: Iterable[tuple[Value, ...]],
        provenance: Optional[dict[str, frozenset[str]]] = None,
    ):
        self.columns: tuple[tuple[str, ColumnType], ...] = tuple(columns)
        self.rows: tuple[tuple[Value, ...], ...] = tuple(tuple(r) for r in rows)
        names = [c for c, _ in self.columns]
        if len(set(names)) != len(names) or any(not n for n in names):
            raise TableError("column names must be unique and non-empty")
        if provenance is None:
            provenance = {c: frozenset({prog.source_tag(c)}) for c in names}
        if not set(provenance) <= set(names):
            raise TableError("provenance keys must be a subset of column names")
        self.provenance: dict[str, frozenset[str]] = {
            c: provenance.get(c, frozenset()) for c in names
        }
        ncols = len(self.columns)
        for r in self.rows:
            if len(r) != ncols:
                raise TableError(f"row width {len(r)} != {ncols} columns")
        for j, (name, ctype) in enumerate(self.columns):
            for r in self.rows:
                if not kind_consistent(ctype, r[j]):
                    raise TableError(
                        f"value {r[j]!r} in column {name!r} is not a {ctype.value}"
                    )
        self._fingerprint: Optional[str] = None

    def column_names(self) -> tuple[str, ...]:
        return tuple(c for c, _ in self.columns)

    def column_type(self, name: str) -> ColumnType:
        for c, t in self.columns:
            if c == name:
                return t
        raise TableError(f"unknown column {name!r}")

    def column_index(self, name: str) -> int:
        for i, (c, _) in enumerate(self.columns):
            if c == name:
                return i
        raise TableError(f"unknown column {name!r}")

    def column_values(self, name: str) -> list[Value]:
        j = self.column_index(name)
        return [r[j] for r in self.rows]

    def base_type(self) -> TableType:
        return table_base(dict(self.columns))

    def fingerprint(self) -> str:
        if self._fingerprint is None:
            payload = json.dumps(
                [
                    [[c, t.value] for c, t in self.columns],
                    [[_value_key(v) for v in r] for r in self.rows],
                ],
                sort_keys=True,
            )
            self._fingerprint = hashlib.sha256(payload.encode()).hexdigest()[:16]
        return self._fingerprint

    def __repr__(self) -> str:
        return f"Table({self.column_names()}, {len(self.rows)} rows)"


def _value_key(v: Value) -> object:
    if isinstance(v, date):
        return ("d", v.isoformat())
    if isinstance(v, Interval):
        return ("i", v.lo, v.hi)
    if isinstance(v, float) and v.is_integer():
        return int(v)
    return v


# ---------------------------------------------------------------------------
# Column-type inference and CSV loading
# ---------------------------------------------------------------------------

DISCRETE_DISTINCT_THRESHOLD = 20
_YEAR_RANGE = (1700, 2199)
_DATE_RE = re.compile(r"^\d{4}-\d{2}-\d{2}$")


def _looks_like_year(v: Value) -> bool:
    return isinstance(v, int) and _YEAR_RANGE[0] <= v <= _YEAR_RANGE[1]


def infer_column_type(
    values: Sequence[Value], name: str, distinct_threshold: int = DISCRETE_DISTINCT_THRESHOLD
) -> ColumnType:
    """Deterministic inference into the leaf column types.

    Dates and year-like integers give Temporal; numeric columns split into
    Discrete vs Continuous on a distinct-count threshold (any fractional
    value forces Continuous); everything else is Nominal. Ordinal is never
    inferred, only assignable through spec files.
    """
    present = [v for v in values if v is not None]
    if not present:
        return ColumnType.NOMINAL
    if all(isinstance(v, date) or _looks_like_year(v) for v in present):
        return ColumnType.TEMPORAL
    if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in present):
        distinct = len({_value_key(v) for v in present})
        if any(isinstance(v, float) and not float(v).is_integer() for v in present):
            return ColumnType.CONTINUOUS
        if distinct > distinct_threshold:
            return ColumnType.CONTINUOUS
        return ColumnType.DISCRETE
    return ColumnType.NOMINAL


def _parse_cell(raw: str) -> Value:
    s = raw.strip()
    if s == "":
        return None
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        pass
    if _DATE_RE.match(s):
        try:
            return date.fromisoformat(s)
        except ValueError:
            pass
    return s


def load_table(
    csv_bytes: Union[bytes, str],
    delimiter: str = ",",
    header: bool = True,
    distinct_threshold: int = DISCRETE_DISTINCT_THRESHOLD,
    column_types: Optional[dict[str, ColumnType]] = None,
) -> Table:
    """Parse an RFC-4180-style CSV into a typed Table.

    `column_types` overrides inference per column (spec files may pin e.g.
    Ordinal, which inference never produces).
    """
    text = csv_bytes.decode("utf-8") if isinstance(csv_bytes, bytes) else csv_bytes
    try:
        reader = csv.reader(io.StringIO(text), delimiter=delimiter)
        records = [row for row in reader if row]
    except csv.Error as e:
        raise TableError(f"malformed CSV: {e}") from e
    if not header:
        raise TableError("a header row is required")
    if not records:
        raise TableError("empty table")
    names = [h.strip() for h in records[0]]
    if any(not n for n in names):
        raise TableError("empty column name in header")
    if len(set(names)) != len(names):
        raise TableError("duplicate column names in header")
    body = records[1:]
    if not body:
        raise TableError("empty table")
    ncols = len(names)
    for i, row in enumerate(body):
        if len(row) != ncols:
            raise TableError(f"row {i + 2} has {len(row)} cells, expected {ncols}")

    raw_cols = [[row[j] for row in body] for j in range(ncols)]
    parsed = [[_parse_cell(c) for c in col] for col in raw_cols]
    ctypes: list[ColumnType] = []
    for j, name in enumerate(names):
        override = (column_types or {}).get(name)
        ctypes.append(
            override
            if override is not None
            else infer_column_type(parsed[j], name, distinct_threshold)
        )

    def coerce(v: Value, raw: str, ctype: ColumnType) -> Value:
        if v is None:
            return None
        if ctype == ColumnType.TEMPORAL:
            if isinstance(v, date):
                return v
            if _looks_like_year(v):
                return date(int(v), 1, 1)
            return None
        if ctype in (ColumnType.DISCRETE, ColumnType.CONTINUOUS):
            return v if isinstance(v, (int, float)) else None
        if ctype in (ColumnType.NOMINAL, ColumnType.ORDINAL, ColumnType.QUALITATIVE):
            return raw.strip()
        return v

    rows = [
        tuple(
            coerce(parsed[j][i], raw_cols[j][i], ctypes[j]) for j in range(ncols)
        )
        for i in range(len(body))
    ]
    return Table(list(zip(names, ctypes)), rows)


# ---------------------------------------------------------------------------
# Interpreter
# ---------------------------------------------------------------------------

MutateOp = Callable[[Sequence[float]], float]

DEFAULT_MUTATE_OPS: dict[str, MutateOp] = {
    "max": lambda xs: max(xs),
    "min": lambda xs: min(xs),
    "add": lambda xs: sum(xs),
    "sub": lambda xs: xs[0] - sum(xs[1:]),
}


def _as_number(v: Value) -> float:
    if isinstance(v, Interval):
        return v.midpoint()
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return v
    raise TableError(f"value {v!r} is not numeric")


def _compare(a: Value, op: str, b: Value) -> bool:
    if isinstance(a, Interval) and isinstance(b, Interval):
        if op == "=":
            return a == b
        if op == "!=":
            return a != b
        a, b = a.midpoint(), b.midpoint()
    ka, kb = value_kind(a), value_kind(b)
    numeric = {"int", "float"}
    if not (ka == kb or (ka in numeric and kb in numeric)):
        raise TableError(f"cannot compare {ka} with {kb}")
    if op == "=":
        return a == b
    if op == "!=":
        return a != b
    if op == "<":
        return a < b  # type: ignore[operator]
    if op == "<=":
        return a <= b  # type: ignore[operator]
    if op == ">":
        return a > b  # type: ignore[operator]
    if op == ">=":
        return a >= b  # type: ignore[operator]
    raise TableError(f"unknown comparison {op!r}")


def _require_quantitative(t: Table, col: str, op_name: str) -> None:
    if not column_subtype(t.column_type(col), ColumnType.QUANTITATIVE):
        raise TableError(
            f"{op_name} needs a quantitative column, {col!r} is {t.column_type(col).value}"
        )


def eval_transform(
    p: prog.TransformProgram,
    t: Table,
    mutate_ops: Optional[dict[str, MutateOp]] = None,
) -> Table:
    """Run a transformation pipeline; pure and deterministic."""
    ops = DEFAULT_MUTATE_OPS if mutate_ops is None else mutate_ops

    if isinstance(p, prog.Input):
        return t

    src = eval_transform(p.source, t, mutate_ops)

    if isinstance(p, prog.Bin):
        j = src.column_index(p.target)
        _require_quantitative(src, p.target, "bin")
        kept = [r for r in src.rows if r[j] is not None]
        if not kept:
            raise TableError("bin over an empty column")
        nums = [_as_number(r[j]) for r in kept]
        lo, hi = min(nums), max(nums)
        width = (hi - lo) / p.n
        intervals = [
            Interval(lo + i * width, lo + (i + 1) * width) for i in range(p.n)
        ]

        def bucket(x: float) -> Interval:
            if width == 0:
                return intervals[0]
            i = min(int((x - lo) / width), p.n - 1)
            return intervals[i]

        rows = [
            tuple(
                bucket(_as_number(val)) if k == j else val
                for k, val in enumerate(r)
            )
            for r in kept
        ]
        columns = [
            (c, ColumnType.DISCRETE if c == p.target else ct) for c, ct in src.columns
        ]
        provenance = dict(src.provenance)
        provenance[p.target] = provenance[p.target] | {"bin"}
        return Table(columns, rows, provenance)

    if isinstance(p, prog.Filter):
        j = src.column_index(p.col)
        if isinstance(p.value, prog.ColRef):
            k = src.column_index(p.value.name)
            rows = [
                r
                for r in src.rows
                if r[j] is not None and r[k] is not None and _compare(r[j], p.op, r[k])
            ]
        else:
            rows = [
                r for r in src.rows if r[j] is not None and _compare(r[j], p.op, p.value)
            ]
        provenance = {c: tags | {"filter"} for c, tags in src.provenance.items()}
        return Table(src.columns, rows, provenance)

    if isinstance(p, prog.Summarize):
        for k in p.keys:
            src.column_index(k)
        j = src.column_index(p.target)
        if p.agg in ("mean", "sum"):
            _require_quantitative(src, p.target, f"summarize-{p.agg}")
        key_idx = [src.column_index(k) for k in p.keys]
        referenced = key_idx + [j]
        groups: dict[tuple, list[tuple[Value, ...]]] = {}
        order: list[tuple] = []
        for r in src.rows:
            if any(r[i] is None for i in referenced):
                continue
            gk = tuple(_value_key(r[i]) for i in key_idx)
            if gk not in groups:
                groups[gk] = []
                order.append(gk)
            groups[gk].append(r)
        out_keys = [c for c, _ in src.columns if c in p.keys]
        out_key_idx = [src.column_index(k) for k in out_keys]
        rows = []
        for gk in order:
            members = groups[gk]
            rep = members[0]
            if p.agg == "count":
                agg_val: Value = len(members)
            elif p.agg == "mean":
                agg_val = sum(_as_number(m[j]) for m in members) / len(members)
            else:
                agg_val = float(sum(_as_number(m[j]) for m in members))
            rows.append(tuple(rep[i] for i in out_key_idx) + (agg_val,))
        tgt_type = ColumnType.DISCRETE if p.agg == "count" else ColumnType.CONTINUOUS
        columns = [(c, src.column_type(c)) for c in out_keys] + [(p.target, tgt_type)]
        provenance = {c: src.provenance[c] for c in out_keys}
        provenance[p.target] = src.provenance.get(p.target, frozenset()) | {p.agg}
        return Table(columns, rows, provenance)

    if isinstance(p, prog.Mutate):
        if p.target in src.column_names():
            raise TableError(f"mutate target {p.target!r} already exists")
        if p.op not in ops:
            raise TableError(f"unknown mutate operator {p.op!r}")
        for a in p.args:
            _require_quantitative(src, a, f"mutate-{p.op}")
        arg_idx = [src.column_index(a) for a in p.args]
        fn = ops[p.op]
        rows = []
        for r in src.rows:
            if any(r[i] is None for i in arg_idx):
                continue
            rows.append(r + (fn([_as_number(r[i]) for i in arg_idx]),))
        columns = list(src.columns) + [(p.target, ColumnType.TOP)]
        provenance = dict(src.provenance)
        inherited: frozenset[str] = frozenset()
        for a in p.args:
            inherited |= src.provenance[a]
        provenance[p.target] = inherited | {"mutate"}
        return Table(columns, rows, provenance)

    if isinstance(p, prog.Select):
        for c in p.cols:
            src.column_index(c)
        keep = [c for c, _ in src.columns if c in p.cols]
        idx = [src.column_index(c) for c in keep]
        rows = [tuple(r[i] for i in idx) for r in src.rows]
        columns = [(c, src.column_type(c)) for c in keep]
        provenance = {c: src.provenance[c] for c in keep}
        return Table(columns, rows, provenance)

    raise TypeError(p)


# ---------------------------------------------------------------------------
# Cardinality and the concrete inhabitant check
# ---------------------------------------------------------------------------


def cardinality(t: Table, cols: Sequence[str] = ()) -> int:
    """Distinct tuples of t projected onto cols ([] means all columns)."""
    names = list(cols) if cols else list(t.column_names())
    idx = [t.column_index(c) for c in names]
    return len({tuple(_value_key(r[i]) for i in idx) for r in t.rows})


def get_input_type(t: Table) -> Scalar:
    """Exact refinement type of a concrete table: schema plus per-column and
    whole-table distinct counts."""
    if not t.rows:
        raise TableError("empty table has no input type")
    atoms: list[Qualifier] = [
        QCmp(proj(SELF_VAR, [c]), "=", IntLit(cardinality(t, [c])))
        for c in t.column_names()
    ]
    atoms.append(QCmp(whole(), "=", IntLit(cardinality(t))))
    return Scalar(t.base_type(), qand(*atoms))


class _MissingColumn(Exception):
    pass


def _eval_table_term(term: TableTerm, t: Table, env: dict[str, Table]) -> Table:
    if isinstance(term, TVar):
        if term.name in env:
            return env[term.name]
        return t
    if isinstance(term, TProj):
        base = _eval_table_term(term.table, t, env)
        try:
            idx = [base.column_index(c) for c in term.cols]
        except TableError:
            raise _MissingColumn()
        cols = [base.columns[i] for i in idx]
        rows = [tuple(r[i] for i in idx) for r in base.rows]
        return Table(cols, rows, {c: base.provenance[c] for c, _ in cols})
    if isinstance(term, TFilter):
        base = _eval_table_term(term.table, t, env)
        try:
            j = base.column_index(term.col)
        except TableError:
            raise _MissingColumn()
        rows = [
            r
            for r in base.rows
            if r[j] is not None and _compare(r[j], term.op, term.value)
        ]
        return Table(base.columns, rows, base.provenance)
    raise TypeError(term)


def _eval_num_term(term: NumTerm, t: Table, env: dict[str, Table]) -> float:
    if isinstance(term, IntLit):
        return term.value
    if isinstance(term, Card):
        return cardinality(_eval_table_term(term.table, t, env))
    if isinstance(term, AggTerm):
        sub = _eval_table_term(term.table, t, env)
        if len(sub.columns) != 1:
            raise _MissingColumn()
        vals = [_as_number(v) for v in sub.column_values(sub.column_names()[0]) if v is not None]
        if not vals:
            raise _MissingColumn()
        return max(vals) if term.fn == "max" else min(vals)
    raise _MissingColumn()  # free numeric variables are not evaluable


def _prov_tag(p: Union[str, SourceRef]) -> str:
    return p if isinstance(p, str) else prog.source_tag(p.col)


def eval_qualifier_on_table(q: Qualifier, t: Table, env: Optional[dict[str, Table]] = None) -> bool:
    env = env or {}

    def ev(f: Qualifier) -> bool:
        if isinstance(f, QTrue):
            return True
        if isinstance(f, QFalse):
            return False
        if isinstance(f, Pi):
            if f.attr not in t.provenance:
                raise _MissingColumn()
            return _prov_tag(f.prov) in t.provenance[f.attr]
        if isinstance(f, QCmp):
            lhs = _eval_num_term(f.lhs, t, env)
            rhs = _eval_num_term(f.rhs, t, env)
            return {"=": lhs == rhs, "<=": lhs <= rhs, ">=": lhs >= rhs}[f.op]
        if isinstance(f, QNot):
            return not ev(f.arg)
        if isinstance(f, QAnd):
            return all(ev(a) for a in f.args)
        if isinstance(f, QOr):
            return any(ev(a) for a in f.args)
        raise TypeError(f)

    try:
        return ev(q)
    except _MissingColumn:
        return False


def models(t: Table, r: Scalar) -> bool:
    """Concrete inhabitant check for table types: schema base-subtyping plus
    qualifier evaluation (absent columns make it false, not an error)."""
    if not isinstance(r.base, TableType):
        raise TableError("models() expects a table type")
    actual = t.base_type()
    for col, want in r.base.schema:
        have = actual.get(col)
        if have is None or not column_subtype(have, want):
            return False
    return eval_qualifier_on_table(r.qual, t)


def plot_models(plot: prog.PlotProgram, data: Table, r: Scalar) -> bool:
    """Concrete inhabitant check for plot types: the plot kind must match and
    the qualifier is evaluated against the channel bindings and the plot's
    input table."""
    from .types import PlotType

    if not isinstance(r.base, PlotType):
        raise TableError("plot_models() expects a plot type")
    if r.base.kind != plot.kind:
        return False
    channels = plot.channels()

    def ev(f: Qualifier) -> bool:
        if isinstance(f, QTrue):
            return True
        if isinstance(f, QFalse):
            return False
        if isinstance(f, Pi):
            if f.attr in prog.CHANNELS:
                bound = channels.get(f.attr)
                if isinstance(f.prov, SourceRef):
                    return bound == f.prov.col
                if bound is None:
                    return False
                if bound not in data.provenance:
                    raise _MissingColumn()
                return f.prov in data.provenance[bound]
            # column-attribute atoms refer to the plot's input table
            if f.attr not in data.provenance:
                raise _MissingColumn()
            return _prov_tag(f.prov) in data.provenance[f.attr]
        if isinstance(f, QCmp):
            lhs = _eval_num_term(f.lhs, data, {})
            rhs = _eval_num_term(f.rhs, data, {})
            return {"=": lhs == rhs, "<=": lhs <= rhs, ">=": lhs >= rhs}[f.op]
        if isinstance(f, QNot):
            return not ev(f.arg)
        if isinstance(f, QAnd):
            return all(ev(a) for a in f.args)
        if isinstance(f, QOr):
            return any(ev(a) for a in f.args)
        raise TypeError(f)

    try:
        return ev(r.qual)
    except _MissingColumn:
        return False

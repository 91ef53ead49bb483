"""Specification files: a JSON format for ranked refinement-type
specification distributions, with schema validation and a canonical
serialization that round-trips.

Wildcard syntactic constraints pi(v.attr, *) / pi(v.*, op) are accepted as
sugar and expanded over the dataset's columns at load time.
"""

from __future__ import annotations

import json
from importlib import resources
from typing import Optional

import jsonschema

from .engine.session import ScoredSpec
from .tables import Table
from .types import (
    ColumnType,
    Pi,
    PlotKind,
    PlotType,
    QAnd,
    QNot,
    QOr,
    Qualifier,
    Scalar,
    SourceRef,
    TableType,
    qand,
    qor,
    qualifier_from_json,
    qualifier_to_json,
    table_base,
    TRUE,
)

SPEC_FILE_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "required": ["specs"],
    "properties": {
        "datasets": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "additionalProperties": {
                    "enum": [t.value for t in ColumnType],
                },
            },
        },
        "specs": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["prob", "plot", "table"],
                "properties": {
                    "prob": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                    "plot": {
                        "type": "object",
                        "required": ["base"],
                        "properties": {
                            "base": {"enum": [k.value for k in PlotKind]},
                            "qualifier": {"type": "object"},
                        },
                    },
                    "table": {
                        "type": "object",
                        "properties": {
                            "schema": {
                                "type": "object",
                                "additionalProperties": {
                                    "enum": [t.value for t in ColumnType]
                                },
                            },
                            "qualifier": {"type": "object"},
                        },
                    },
                },
            },
        },
    },
}


class SpecFileError(Exception):
    pass


def expand_wildcards(q: Qualifier, columns: tuple[str, ...]) -> Qualifier:
    """pi(v.*, op) becomes a disjunction over columns; pi(v.ch, *) becomes a
    disjunction of channel bindings. Negation normalizes via qand/qor."""

    def ex(f: Qualifier) -> Qualifier:
        if isinstance(f, Pi):
            if f.attr == "*":
                return qor(*(Pi(f.var, c, f.prov) for c in columns))
            if isinstance(f.prov, SourceRef) and f.prov.col == "*":
                return qor(
                    *(Pi(f.var, f.attr, SourceRef(f.prov.var, c)) for c in columns)
                )
            return f
        if isinstance(f, QNot):
            inner = ex(f.arg)
            if isinstance(inner, QOr):
                return qand(*(QNot(a) for a in inner.args))
            if isinstance(inner, QAnd):
                return qor(*(QNot(a) for a in inner.args))
            return QNot(inner)
        if isinstance(f, QAnd):
            return qand(*(ex(a) for a in f.args))
        if isinstance(f, QOr):
            return qor(*(ex(a) for a in f.args))
        return f

    return ex(q)


def parse_spec_file(
    text: str, table: Optional[Table] = None
) -> tuple[list[ScoredSpec], list[str]]:
    """Parse and validate a spec file; returns (specs sorted by descending
    probability, warnings)."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SpecFileError(f"invalid JSON: {e}") from e
    try:
        jsonschema.validate(doc, SPEC_FILE_SCHEMA)
    except jsonschema.ValidationError as e:
        path = "/" + "/".join(str(p) for p in e.absolute_path)
        raise SpecFileError(f"schema violation at {path}: {e.message}") from e

    warnings: list[str] = []
    columns = table.column_names() if table is not None else ()
    known = set(columns)
    specs: list[ScoredSpec] = []
    for i, entry in enumerate(doc["specs"]):
        plot_d = entry["plot"]
        plot_qual = qualifier_from_json(plot_d.get("qualifier", {"op": "true"}))
        plot_qual = expand_wildcards(plot_qual, columns)
        plot_goal = Scalar(PlotType(PlotKind(plot_d["base"])), plot_qual)
        table_d = entry.get("table", {})
        schema = {
            c: ColumnType(v) for c, v in table_d.get("schema", {}).items()
        }
        for c in schema:
            if known and c not in known:
                warnings.append(
                    f"specs[{i}]: column {c!r} not in the dataset (kept; it may "
                    "name a derived column)"
                )
        table_qual = qualifier_from_json(table_d.get("qualifier", {"op": "true"}))
        table_qual = expand_wildcards(table_qual, columns)
        table_goal = Scalar(table_base(schema), table_qual)
        specs.append(ScoredSpec(plot_goal, table_goal, entry["prob"]))
    ordered = sorted(
        enumerate(specs), key=lambda p: (-p[1].score, p[0])
    )
    if [i for i, _ in ordered] != list(range(len(specs))):
        warnings.append("specs were not sorted by descending probability; reordered")
    return [s for _, s in ordered], warnings


def serialize_specs(specs: list[ScoredSpec]) -> str:
    doc = {
        "specs": [
            {
                "prob": s.score,
                "plot": {
                    "base": s.plot_goal.base.kind.value,  # type: ignore[union-attr]
                    "qualifier": qualifier_to_json(s.plot_goal.qual),
                },
                "table": {
                    "schema": {
                        c: t.value
                        for c, t in s.table_goal.base.schema  # type: ignore[union-attr]
                    },
                    "qualifier": qualifier_to_json(s.table_goal.qual),
                },
            }
            for s in specs
        ]
    }
    return json.dumps(doc, indent=2, sort_keys=True)

"""Vega-Lite v5 emission and validation.

Every emitted document carries inlined data values from the transformed
table and validates against the official v5 JSON schema bundled with the
package.
"""

from __future__ import annotations

import json
from datetime import date
from functools import lru_cache
from importlib import resources

import jsonschema

from . import programs as prog
from .tables import Interval, Table, TableError, Value
from .types import ColumnType, PlotKind

_MARKS = {
    PlotKind.BAR: "bar",
    PlotKind.SCATTER: "point",
    PlotKind.LINE: "line",
    PlotKind.AREA: "area",
}

_FIELD_TYPES = {
    ColumnType.NOMINAL: "nominal",
    ColumnType.ORDINAL: "ordinal",
    ColumnType.TEMPORAL: "temporal",
    ColumnType.DISCRETE: "quantitative",
    ColumnType.CONTINUOUS: "quantitative",
    ColumnType.QUALITATIVE: "nominal",
    ColumnType.QUANTITATIVE: "quantitative",
    ColumnType.TOP: "quantitative",  # mutate columns hold numeric results
}

SCHEMA_URL = "https://vega.github.io/schema/vega-lite/v5.json"


def _json_value(v: Value) -> object:
    if isinstance(v, Interval):
        return v.label()
    if isinstance(v, date):
        return v.isoformat()
    return v


def _field_type(t: Table, col: str) -> str:
    ctype = t.column_type(col)
    if any(isinstance(v, Interval) for v in t.column_values(col)):
        # binned columns render as ordinal interval labels
        return "ordinal"
    return _FIELD_TYPES[ctype]


def emit_vegalite(p: prog.VisProgram, t: Table) -> dict:
    """Vega-Lite v5 document for an already-transformed table."""
    plot = p.plot
    for ch, col in plot.channels().items():
        if col not in t.column_names():
            raise TableError(f"plot channel {ch} references missing column {col!r}")
    values = [
        {c: _json_value(row[i]) for i, c in enumerate(t.column_names())}
        for row in t.rows
    ]
    encoding: dict[str, object] = {
        "x": {"field": plot.x, "type": _field_type(t, plot.x)},
        "y": {"field": plot.y, "type": _field_type(t, plot.y)},
    }
    if plot.color is not None:
        encoding["color"] = {"field": plot.color, "type": _field_type(t, plot.color)}
    if plot.subplot is not None:
        encoding["column"] = {
            "field": plot.subplot,
            "type": _field_type(t, plot.subplot),
        }
    return {
        "$schema": SCHEMA_URL,
        "description": prog.format_vis(p),
        "data": {"values": values},
        "mark": _MARKS[plot.kind],
        "encoding": encoding,
    }


@lru_cache(maxsize=1)
def vegalite_schema() -> dict:
    raw = (
        resources.files("vizsynth")
        .joinpath("data/vega-lite-schema-v5.json")
        .read_text()
    )
    return json.loads(raw)


@lru_cache(maxsize=1)
def _validator() -> jsonschema.Draft7Validator:
    return jsonschema.Draft7Validator(vegalite_schema())


def validate_vegalite(doc: dict) -> None:
    """Raise jsonschema.ValidationError if doc is not a valid v5 document."""
    _validator().validate(doc)

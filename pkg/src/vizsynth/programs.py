"""ASTs for table-transformation and plotting programs.

A visualization program is a table-transformation pipeline composed with a
single plotting call. Transformation pipelines are unary chains, so every
program has exactly one spine from the output operator down to the input
table.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional, Union

from .types import PlotKind, cached_hash

# Operator tags recorded in column provenance. A column derived from source
# column c carries the tag "src:c" in addition to any operator tags.
AGG_OPS = ("count", "mean", "sum")
PROV_OPS = ("mean", "sum", "count", "bin", "filter", "mutate")


def source_tag(col: str) -> str:
    return f"src:{col}"


@cached_hash
@dataclass(frozen=True)
class ColRef:
    """A column used as the right-hand side of a filter predicate."""

    name: str


FilterRhs = Union[ColRef, str, int, float]

COMPARE_OPS = ("=", "!=", "<", "<=", ">", ">=")


@cached_hash
@dataclass(frozen=True)
class Input:
    pass


@cached_hash
@dataclass(frozen=True)
class Bin:
    source: "TransformProgram"
    n: int
    target: str

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValueError("bin requires n >= 2")
        if not self.target:
            raise ValueError("bin target must be a non-empty column name")


@cached_hash
@dataclass(frozen=True)
class Filter:
    source: "TransformProgram"
    col: str
    op: str
    value: FilterRhs

    def __post_init__(self) -> None:
        if self.op not in COMPARE_OPS:
            raise ValueError(f"unknown filter operator {self.op!r}")
        if not self.col:
            raise ValueError("filter column must be non-empty")


@cached_hash
@dataclass(frozen=True)
class Summarize:
    source: "TransformProgram"
    keys: tuple[str, ...]
    agg: str
    target: str

    def __post_init__(self) -> None:
        if self.agg not in AGG_OPS:
            raise ValueError(f"unknown aggregation {self.agg!r}")
        if len(set(self.keys)) != len(self.keys):
            raise ValueError("summarize keys must be distinct")
        if self.target in self.keys:
            raise ValueError("summarize target cannot be a key")
        if not self.target or any(not k for k in self.keys):
            raise ValueError("column names must be non-empty")
        canon = tuple(sorted(self.keys))  # keys are a set
        if canon != self.keys:
            object.__setattr__(self, "keys", canon)


@cached_hash
@dataclass(frozen=True)
class Mutate:
    source: "TransformProgram"
    target: str
    op: str
    args: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.target or any(not a for a in self.args):
            raise ValueError("column names must be non-empty")
        if not self.args:
            raise ValueError("mutate needs at least one argument column")


@cached_hash
@dataclass(frozen=True)
class Select:
    source: "TransformProgram"
    cols: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.cols or any(not c for c in self.cols):
            raise ValueError("select needs non-empty column names")
        if len(set(self.cols)) != len(self.cols):
            raise ValueError("select columns must be distinct")
        canon = tuple(sorted(self.cols))  # columns are a set
        if canon != self.cols:
            object.__setattr__(self, "cols", canon)


TransformProgram = Union[Input, Bin, Filter, Summarize, Mutate, Select]


def child(p: TransformProgram) -> Optional[TransformProgram]:
    if isinstance(p, Input):
        return None
    return p.source


def spine(p: TransformProgram) -> Iterator[TransformProgram]:
    """Nodes from the root (outermost operator) down to Input."""
    node: Optional[TransformProgram] = p
    while node is not None:
        yield node
        node = child(node)


def program_depth(p: TransformProgram) -> int:
    return sum(1 for _ in spine(p))


def derive_provenance(
    p: TransformProgram, input_columns: tuple[str, ...]
) -> dict[str, frozenset[str]]:
    """Which operators occur in the derivation of each output column.

    This is the reference definition used both by the interpreter and by the
    independent provenance oracle in the tests: an operator tag is present on
    a column iff it appears somewhere in the derivation of that column's
    values, and source tags record dataflow from input columns.
    """
    if isinstance(p, Input):
        return {c: frozenset({source_tag(c)}) for c in input_columns}
    prov = derive_provenance(p.source, input_columns)
    if isinstance(p, Bin):
        out = dict(prov)
        out[p.target] = prov.get(p.target, frozenset()) | {"bin"}
        return out
    if isinstance(p, Filter):
        return {c: tags | {"filter"} for c, tags in prov.items()}
    if isinstance(p, Summarize):
        out = {k: prov[k] for k in p.keys if k in prov}
        out[p.target] = prov.get(p.target, frozenset()) | {p.agg}
        return out
    if isinstance(p, Mutate):
        out = dict(prov)
        inherited: frozenset[str] = frozenset()
        for a in p.args:
            inherited |= prov.get(a, frozenset())
        out[p.target] = inherited | {"mutate"}
        return out
    if isinstance(p, Select):
        return {c: tags for c, tags in prov.items() if c in p.cols}
    raise TypeError(p)


# ---------------------------------------------------------------------------
# Plotting programs
# ---------------------------------------------------------------------------

CHANNELS = ("x", "y", "color", "subplot")


@cached_hash
@dataclass(frozen=True)
class PlotProgram:
    kind: PlotKind
    x: str
    y: str
    color: Optional[str] = None
    subplot: Optional[str] = None

    def channels(self) -> dict[str, str]:
        out = {"x": self.x, "y": self.y}
        if self.color is not None:
            out["color"] = self.color
        if self.subplot is not None:
            out["subplot"] = self.subplot
        return out


@cached_hash
@dataclass(frozen=True)
class VisProgram:
    table: TransformProgram
    plot: PlotProgram

    def ast_size(self) -> int:
        return program_depth(self.table) + 1


def format_transform(p: TransformProgram) -> str:
    if isinstance(p, Input):
        return "input"
    if isinstance(p, Bin):
        return f"bin({format_transform(p.source)}, {p.n}, {p.target})"
    if isinstance(p, Filter):
        rhs = p.value.name if isinstance(p.value, ColRef) else repr(p.value)
        return f"filter({format_transform(p.source)}, {p.col} {p.op} {rhs})"
    if isinstance(p, Summarize):
        keys = "{" + ", ".join(p.keys) + "}"
        return f"summarize({format_transform(p.source)}, {keys}, {p.agg}, {p.target})"
    if isinstance(p, Mutate):
        args = "{" + ", ".join(p.args) + "}"
        return f"mutate({format_transform(p.source)}, {p.target}, {p.op}, {args})"
    if isinstance(p, Select):
        return f"select({format_transform(p.source)}, {{{', '.join(p.cols)}}})"
    raise TypeError(p)


def format_plot(p: PlotProgram) -> str:
    parts = [f"x={p.x}", f"y={p.y}"]
    if p.color is not None:
        parts.append(f"color={p.color}")
    if p.subplot is not None:
        parts.append(f"subplot={p.subplot}")
    return f"{p.kind.value.capitalize()}(T, {', '.join(parts)})"


def format_vis(p: VisProgram) -> str:
    return f"let T = {format_transform(p.table)} in {format_plot(p.plot)}"

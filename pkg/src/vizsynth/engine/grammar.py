"""Instantiated grammars: concrete productions for the table and plotting
DSLs over a given input table, filtered against the goal type at the hole.

The filters are completeness-preserving accelerators: a production is only
skipped when no completion through it can concretely inhabit the hole goal
(missing required columns, or a conclusion that contradicts the goal's
top-level literals). The type-compatibility and concrete checks downstream
remain the authoritative gates.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .. import programs as prog
from ..rules import Production, _required_columns
from ..tables import Table, Value, _value_key, get_input_type
from ..types import (
    ColumnType,
    Pi,
    PlotType,
    QNot,
    Qualifier,
    QOr,
    Scalar,
    SourceRef,
    TableType,
    column_compatible,
    column_subtype,
    conjuncts,
)
from .config import SynthConfig

_ORDERED_KINDS = {"int", "float", "date"}


@dataclass
class GrammarContext:
    table: Table
    input_type: Scalar
    cfg: SynthConfig
    filter_choices: dict[str, tuple[tuple[str, Value], ...]] = field(init=False)
    mutate_specs: tuple[tuple[str, str, tuple[str, ...]], ...] = field(init=False)
    plot_vocabulary: tuple[str, ...] = field(init=False)
    eval_cache: dict = field(default_factory=dict)
    type_cache: dict = field(default_factory=dict)
    production_cache: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.filter_choices = {
            c: tuple(self._column_filters(c)) for c in self.table.column_names()
        }
        self.mutate_specs = self._mutate_specs()
        vocab = list(self.table.column_names()) + [t for t, _, _ in self.mutate_specs]
        self.plot_vocabulary = tuple(sorted(set(vocab)))

    def _column_filters(self, col: str) -> Iterable[tuple[str, Value]]:
        """(op, constant) pairs: constants by frequency then value, capped."""
        from ..tables import value_kind

        values = [v for v in self.table.column_values(col) if v is not None]
        if not values:
            return
        freq: dict = {}
        rep: dict = {}
        for v in values:
            k = _value_key(v)
            freq[k] = freq.get(k, 0) + 1
            rep.setdefault(k, v)
        ranked = sorted(freq, key=lambda k: (-freq[k], str(k)))
        consts = [rep[k] for k in ranked[: self.cfg.filter_constant_cap]]
        ordered = value_kind(values[0]) in _ORDERED_KINDS
        ops = ("=", "!=", "<=", ">=") if ordered else ("=", "!=")
        for op in ops:
            for v in consts:
                yield op, v

    def _mutate_specs(self) -> tuple[tuple[str, str, tuple[str, ...]], ...]:
        if not self.cfg.enable_mutate:
            return ()
        cols = sorted(self.table.column_names())
        out = []
        for op in sorted(self.cfg.mutate_ops):
            pairs = (
                itertools.permutations(cols, 2)
                if op == "sub"
                else itertools.combinations(cols, 2)
            )
            for a, b in pairs:
                tgt = f"{op}_{a}_{b}"
                if tgt not in cols:
                    out.append((tgt, op, (a, b)))
        return tuple(out)


def _goal_blocks_pi(goal_qual: Qualifier, attr: str, op: str) -> bool:
    """True if the goal's top-level conjuncts contain not-pi(attr, op)."""
    for c in conjuncts(goal_qual):
        if isinstance(c, QNot) and isinstance(c.arg, Pi):
            if c.arg.attr == attr and c.arg.prov == op:
                return True
    return False


def table_productions(
    ctx: GrammarContext, goal: Scalar, allow_ops: bool
) -> list[Production]:
    """Productions applicable at a table hole with the given goal."""
    cache_key = (goal, allow_ops)
    cached = ctx.production_cache.get(cache_key)
    if cached is not None:
        return cached
    result = _table_productions(ctx, goal, allow_ops)
    ctx.production_cache[cache_key] = result
    return result


def _table_productions(
    ctx: GrammarContext, goal: Scalar, allow_ops: bool
) -> list[Production]:
    assert isinstance(goal.base, TableType)
    cols = list(ctx.table.column_names())
    colset = set(cols)
    required = _required_columns(goal)
    out: list[Production] = [Production("input", ())]
    if not allow_ops:
        return out

    known = colset | {t for t, _, _ in ctx.mutate_specs}

    # select: output columns are exactly the chosen keys
    if required <= colset:
        for size in range(1, len(cols) + 1):
            for keys in itertools.combinations(sorted(cols), size):
                if required <= set(keys):
                    out.append(Production("select", (keys,)))

    # summarize: output columns are keys + target
    for tgt in sorted(cols):
        rest = sorted(colset - {tgt})
        goal_tgt = goal.base.get(tgt)
        for agg in ("count", "mean", "sum"):
            result = ColumnType.DISCRETE if agg == "count" else ColumnType.CONTINUOUS
            if goal_tgt is not None and not column_compatible(goal_tgt, result):
                continue
            if _goal_blocks_pi(goal.qual, tgt, agg):
                continue
            if not required <= colset:
                continue
            for size in range(1, len(rest) + 1):
                for keys in itertools.combinations(rest, size):
                    if required <= set(keys) | {tgt}:
                        out.append(Production("summarize", (keys, agg, tgt)))

    # bin
    for tgt in sorted(cols):
        goal_tgt = goal.base.get(tgt)
        if goal_tgt is not None and not column_compatible(goal_tgt, ColumnType.DISCRETE):
            continue
        if _goal_blocks_pi(goal.qual, tgt, "bin"):
            continue
        for n in ctx.cfg.bin_counts:
            out.append(Production("bin", (n, tgt)))

    # filter: adds the filter tag to every column
    filter_blocked = any(
        _goal_blocks_pi(goal.qual, c, "filter") for c in required | colset
    )
    if not filter_blocked:
        for col in sorted(cols):
            for op, v in ctx.filter_choices[col]:
                out.append(Production("filter", (col, op, v)))

    # mutate
    for tgt, op, args in ctx.mutate_specs:
        if not required <= known | {tgt}:
            continue
        if _goal_blocks_pi(goal.qual, tgt, "mutate"):
            continue
        out.append(Production("mutate", (tgt, op, args)))

    return out


def _channel_choices(
    goal: Scalar, vocab: tuple[str, ...], preferred: tuple[str, ...] = ()
) -> Optional[dict[str, list[Optional[str]]]]:
    """Admissible column bindings per channel, narrowed by the goal's
    top-level channel-binding literals. None in a list means 'channel
    unused'. Goal-mentioned columns are enumerated first so exploration
    order favors the specification's own vocabulary."""
    first = [c for c in preferred if c in vocab]
    rest = [c for c in vocab if c not in first]
    ordered = first + rest
    choices: dict[str, list[Optional[str]]] = {
        "x": list(ordered),
        "y": list(ordered),
        "color": [None] + list(ordered),
        "subplot": [None] + list(ordered),
    }

    def restrict(ch: str, keep: set[Optional[str]]) -> None:
        choices[ch] = [c for c in choices[ch] if c in keep]

    for c in conjuncts(goal.qual):
        if isinstance(c, Pi) and c.attr in choices and isinstance(c.prov, SourceRef):
            restrict(c.attr, {c.prov.col})
        elif isinstance(c, QNot) and isinstance(c.arg, Pi):
            atom = c.arg
            if atom.attr in choices and isinstance(atom.prov, SourceRef):
                restrict(atom.attr, set(choices[atom.attr]) - {atom.prov.col})
        elif isinstance(c, QOr):
            per_channel: dict[str, set[Optional[str]]] = {}
            simple = all(
                isinstance(d, Pi)
                and isinstance(d.prov, SourceRef)
                and d.attr in choices
                for d in c.args
            )
            if simple:
                for d in c.args:
                    per_channel.setdefault(d.attr, set()).add(d.prov.col)
                if len(per_channel) == 1:
                    ch, cols_ = next(iter(per_channel.items()))
                    restrict(ch, cols_)
    if any(not v for v in choices.values()):
        return None
    return choices


def plot_productions(
    ctx: GrammarContext, goal: Scalar, preferred: tuple[str, ...] = ()
) -> list[prog.PlotProgram]:
    if not isinstance(goal.base, PlotType):
        return []
    choices = _channel_choices(goal, ctx.plot_vocabulary, preferred)
    if choices is None:
        return []
    out = []
    for x in choices["x"]:
        for y in choices["y"]:
            for color in choices["color"]:
                for subplot in choices["subplot"]:
                    out.append(
                        prog.PlotProgram(goal.base.kind, x, y, color, subplot)
                    )
    return out

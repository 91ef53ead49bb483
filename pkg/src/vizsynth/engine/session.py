"""Two-level synthesis drivers: per-specification synthesis (plots first,
then strengthened table goals) and the multi-spec session loop that carries
the lemma store across specifications and ranks the combined output.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

from .. import programs as prog
from ..relations import intersect, is_compatible
from ..rules import NoRuleError, plot_cardinality_premise, plot_type_of
from ..tables import Table, TableError, eval_transform, get_input_type, models, plot_models
from ..types import (
    EMPTY_ENV,
    Pi,
    PlotType,
    QAnd,
    QCmp,
    QNot,
    QOr,
    Qualifier,
    Scalar,
    SourceRef,
    TableType,
    qand,
    qor,
    TRUE,
)
from .config import Counters, SynthConfig
from .grammar import GrammarContext
from .lemmas import LemmaStore
from .search import exact_input_type, synthesize_goal_plot, synthesize_goal_table


@dataclass(frozen=True)
class ScoredSpec:
    plot_goal: Scalar
    table_goal: Scalar
    score: float

    def __post_init__(self) -> None:
        if not isinstance(self.plot_goal.base, PlotType):
            raise ValueError("plot goal must have a plot base type")
        if not isinstance(self.table_goal.base, TableType):
            raise ValueError("table goal must have a table base type")
        if not (0 < self.score <= 1):
            raise ValueError("score must be in (0, 1]")


@dataclass
class VisResult:
    program: prog.VisProgram
    table_output: Table
    spec_rank: int
    score: float
    ast_size: int
    order: int


@dataclass
class SessionResult:
    programs: list[VisResult]
    counters: Counters
    parse_ms: float = 0.0
    synth_ms: float = 0.0


# ---------------------------------------------------------------------------
# Ablation: qualifier components are removed from the goals used by the
# abstract pruning pipeline; the final concrete checks always see the full
# specification, so ablation can only change counters, never the result set.
# ---------------------------------------------------------------------------


def _strip(q: Qualifier, drop_pi: bool, drop_cmp: bool) -> Qualifier:
    if isinstance(q, Pi):
        return TRUE if drop_pi else q
    if isinstance(q, QCmp):
        return TRUE if drop_cmp else q
    if isinstance(q, QNot):
        inner = _strip(q.arg, drop_pi, drop_cmp)
        return TRUE if isinstance(inner, type(TRUE)) else QNot(q.arg)
    if isinstance(q, QAnd):
        return qand(*(_strip(a, drop_pi, drop_cmp) for a in q.args))
    if isinstance(q, QOr):
        return qor(*(_strip(a, drop_pi, drop_cmp) for a in q.args))
    return q


def ablate_goal(r: Scalar, mode: Optional[str]) -> Scalar:
    if mode == "base-only":
        return Scalar(r.base, _strip(r.qual, True, True))
    if mode == "syn-only":
        return Scalar(r.base, _strip(r.qual, False, True))
    if mode == "table-only":
        return Scalar(r.base, _strip(r.qual, True, False))
    return r


def _static_plot_goal(r: Scalar) -> Scalar:
    """Weaken a plot goal to the part decidable from the plot program alone
    (channel bindings); operator and cardinality atoms are re-checked
    concretely after the table program is known."""

    def static(q: Qualifier) -> Qualifier:
        if isinstance(q, Pi):
            return q if isinstance(q.prov, SourceRef) and q.attr in prog.CHANNELS else TRUE
        if isinstance(q, QCmp):
            return TRUE
        if isinstance(q, QNot):
            inner = q.arg
            if isinstance(inner, Pi) and isinstance(inner.prov, SourceRef) and inner.attr in prog.CHANNELS:
                return q
            return TRUE
        if isinstance(q, QAnd):
            return qand(*(static(a) for a in q.args))
        if isinstance(q, QOr):
            return qor(*(static(a) for a in q.args))
        return q

    return Scalar(r.base, static(r.qual))


def synthesize_vis(
    spec: ScoredSpec,
    ctx: GrammarContext,
    lemmas: LemmaStore,
    cfg: SynthConfig,
    counters: Counters,
) -> list[tuple[prog.VisProgram, Table]]:
    """All visualization programs inhabiting the specification, in
    deterministic discovery order."""
    mode = cfg.ablation
    r_p = spec.plot_goal
    r_t = spec.table_goal
    r_p_abstract = _static_plot_goal(ablate_goal(r_p, mode))
    r_t_abstract = ablate_goal(r_t, mode)

    plots = synthesize_goal_plot(ctx, r_t_abstract, r_p_abstract, counters)

    results: list[tuple[prog.VisProgram, Table]] = []
    seen: set[tuple] = set()
    goal_cols = sorted(
        {c for c in _plot_goal_columns(r_p)} | set(ctx.plot_vocabulary)
    )

    # One table search against the table goal serves every plot candidate:
    # a table program joins a given plot iff its inferred output type is
    # compatible with the strengthened goal R_t /\ R_in, and compatibility
    # with the intersection can be checked on the shared search's results
    # (conjunct satisfiability is monotone, so the shared search explores a
    # superset of every strengthened search).
    shared = synthesize_goal_table(ctx, r_t_abstract, lemmas, counters)

    strengthened: list[tuple[prog.PlotProgram, Scalar]] = []
    for plot, r_in, _r_out in plots:
        try:
            strengthened.append((plot, intersect(EMPTY_ENV, r_t_abstract, r_in)))
        except ValueError:
            continue

    # Exploration order is table-major: table programs are discovered by the
    # worklist in size order, so simpler pipelines surface first.
    for table_prog, out_type in shared:
        for plot, r_s in strengthened:
            key = (plot, table_prog)
            if key in seen:
                continue
            counters.solver_calls += 1
            if not is_compatible(EMPTY_ENV, out_type, r_s):
                continue
            seen.add(key)
            concrete = _concrete_check(ctx, table_prog, plot, r_t, r_p, goal_cols)
            if concrete is not None:
                results.append((prog.VisProgram(table_prog, plot), concrete))
    return results



def _concrete_input_type(out: Table, plot: prog.PlotProgram) -> Scalar:
    """Input type of a concrete table for plot typing: the exact per-column
    counts plus the counts of the channel groups the cardinality premise
    mentions, so the premise is decided exactly."""
    from ..tables import cardinality
    from ..types import IntLit, proj as proj_term, SELF_VAR

    base = get_input_type(out)
    premise = plot_cardinality_premise(plot)
    extra = []
    if premise is not None:
        have = set(out.column_names())
        for group in (
            [c for c in (plot.x, plot.color, plot.subplot) if c is not None],
            [plot.y],
        ):
            if set(group) <= have:
                extra.append(
                    QCmp(
                        proj_term(SELF_VAR, group),
                        "=",
                        IntLit(cardinality(out, group)),
                    )
                )
    return Scalar(base.base, qand(base.qual, *extra))


def _concrete_check(
    ctx: GrammarContext,
    table_prog: prog.TransformProgram,
    plot: prog.PlotProgram,
    r_t: Scalar,
    r_p: Scalar,
    goal_cols: list[str],
) -> Optional[Table]:
    """Fig.-style final filter: the transformed table must inhabit the table
    goal and the applied plot must be well-typed on it and inhabit the plot
    goal. Returns the transformed table on success."""
    out = ctx.eval_cache.get(table_prog)
    if out is None:
        try:
            out = eval_transform(table_prog, ctx.table)
        except TableError as e:
            out = e
        ctx.eval_cache[table_prog] = out
    if isinstance(out, TableError) or not out.rows:
        return None
    if not models(out, r_t):
        return None
    try:
        plot_type_of(plot, _concrete_input_type(out, plot), extra_vocabulary=goal_cols)
    except NoRuleError:
        return None
    if not plot_models(plot, out, r_p):
        return None
    return out


def _plot_goal_columns(r_p: Scalar) -> set[str]:
    from ..types import subformulas

    cols: set[str] = set()
    for sub in subformulas(r_p.qual):
        atom = sub.arg if isinstance(sub, QNot) else sub
        if isinstance(atom, Pi) and isinstance(atom.prov, SourceRef):
            cols.add(atom.prov.col)
    return cols


def synthesize_session(
    specs: list[ScoredSpec],
    table: Table,
    cfg: SynthConfig,
    lemma_store: Optional[LemmaStore] = None,
) -> SessionResult:
    """Iterate the ranked specifications highest-first, sharing one growing
    lemma store; stop once max_results programs are found. Results are
    ordered by (spec rank, AST size, exploration order)."""
    t0 = time.perf_counter()
    counters = Counters()
    lemmas = lemma_store if lemma_store is not None else LemmaStore()
    ctx = GrammarContext(table, exact_input_type(table), cfg)
    collected: list[VisResult] = []
    order = 0
    seen: set[tuple] = set()
    for rank, spec in enumerate(specs[: cfg.max_specs]):
        if len(collected) >= cfg.max_results:
            break
        for vis, out in synthesize_vis(spec, ctx, lemmas, cfg, counters):
            key = (vis.plot, vis.table)
            if key in seen:
                continue
            seen.add(key)
            collected.append(
                VisResult(vis, out, rank, spec.score, vis.ast_size(), order)
            )
            order += 1
    collected.sort(key=lambda r: (r.spec_rank, r.ast_size, r.order))
    del collected[cfg.max_results :]
    synth_ms = (time.perf_counter() - t0) * 1000.0
    return SessionResult(collected, counters, synth_ms=synth_ms)

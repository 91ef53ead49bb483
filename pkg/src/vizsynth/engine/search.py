"""Goal-type-guided top-down worklist enumeration with compatibility
pruning and lemma learning.

Table partial programs are chains (every operator is unary in its table
argument), so a partial program is a root-first sequence of operator
productions with one open hole at the bottom. The hole closes when the
Input production is applied; only then do complete subtrees exist, and
every node's inferred type is checked against its goal.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional

from .. import programs as prog
from ..relations import is_compatible, is_subtype
from ..rules import (
    NoRuleError,
    Production,
    backward_goals,
    plot_input_signatures,
    type_of,
    INPUT_TABLE_VAR,
)
from ..tables import Table, get_input_type
from ..types import (
    EMPTY_ENV,
    Pi,
    QNot,
    Scalar,
    TableType,
    TypeEnv,
    SELF_VAR,
    qand,
)
from .config import Counters, SynthConfig
from .grammar import GrammarContext, plot_productions, table_productions
from .lemmas import LemmaStore, lemmas_from_conflicts, violates_lemma


def exact_input_type(table: Table) -> Scalar:
    """The dataset's type as the engine sees it: exact distinct counts plus
    closed-world negative syntactic constraints (a freshly loaded column was
    derived by no operator). The negatives are what let a goal demanding
    e.g. pi(v.c, mean) conflict with subtrees that never aggregate."""
    base = get_input_type(table)
    negatives = []
    for col in sorted(table.column_names()):
        for op in prog.PROV_OPS:
            if op not in table.provenance[col]:
                negatives.append(QNot(Pi(SELF_VAR, col, op)))
    return Scalar(base.base, qand(base.qual, *negatives))


@dataclass(frozen=True)
class TablePartial:
    """Chain of operator productions from the root down to one open hole
    (or to the Input leaf once closed). goals[i] annotates ops[i]."""

    ops: tuple[Production, ...]
    goals: tuple[Scalar, ...]
    leaf_goal: Scalar
    closed: bool = False

    def depth(self) -> int:
        return len(self.ops) + 1

    def hole_goals(self) -> tuple[Scalar, ...]:
        return () if self.closed else (self.leaf_goal,)

    def build(self) -> prog.TransformProgram:
        assert self.closed
        t: prog.TransformProgram = prog.Input()
        for production in reversed(self.ops):
            t = _apply_production(production, t)
        return t


def _apply_production(
    production: Production, source: prog.TransformProgram
) -> prog.TransformProgram:
    op = production.op
    if op == "select":
        (cols,) = production.params
        return prog.Select(source, tuple(cols))
    if op == "summarize":
        keys, agg, tgt = production.params
        return prog.Summarize(source, tuple(keys), agg, tgt)
    if op == "bin":
        n, tgt = production.params
        return prog.Bin(source, n, tgt)
    if op == "filter":
        col, cmp_op, value = production.params
        return prog.Filter(source, col, cmp_op, value)
    if op == "mutate":
        tgt, mop, args = production.params
        return prog.Mutate(source, tgt, mop, tuple(args))
    raise ValueError(op)


def _typed_env(ctx: GrammarContext) -> TypeEnv:
    return TypeEnv(((INPUT_TABLE_VAR, ctx.input_type),))


def _subtree_types(
    ctx: GrammarContext, partial: TablePartial
) -> tuple[Optional[list[Scalar]], Optional[int]]:
    """Types of every complete subtree, innermost first; index of the first
    node (from the leaf upwards) where no typing rule applies, if any."""
    env = _typed_env(ctx)
    types: list[Scalar] = [ctx.input_type]
    t: prog.TransformProgram = prog.Input()
    for i, production in enumerate(reversed(partial.ops)):
        t = _apply_production(production, t)
        cached = ctx.type_cache.get(t)
        if cached is None:
            try:
                cached = type_of(t, env)
            except NoRuleError as e:
                cached = e
            ctx.type_cache[t] = cached
        if isinstance(cached, NoRuleError):
            return types, i
        types.append(cached)
    return types, None


def type_incompatible(
    ctx: GrammarContext, partial: TablePartial, counters: Counters
) -> tuple[bool, list[tuple[Scalar, Scalar]]]:
    """Check every complete subtree's inferred type against its node goal;
    returns the (goal, actual) conflicts for lemma inference."""
    if not partial.closed:
        return False, []
    types, failed_at = _subtree_types(ctx, partial)
    assert types is not None
    node_goals = [partial.leaf_goal] + [g for g in reversed(partial.goals)]
    conflicts: list[tuple[Scalar, Scalar]] = []
    for goal, actual in zip(node_goals, types):
        counters.solver_calls += 1
        if not is_compatible(EMPTY_ENV, actual, goal):
            conflicts.append((goal, actual))
    if conflicts:
        return True, conflicts
    if failed_at is not None:
        # ill-typed completion with no goal conflict: prune without a lemma
        return True, []
    return False, []


def synthesize_goal_table(
    ctx: GrammarContext,
    r_out: Scalar,
    lemmas: LemmaStore,
    counters: Counters,
    learn: bool = True,
) -> list[tuple[prog.TransformProgram, Scalar]]:
    """All table programs up to the depth bound whose input accepts the
    dataset and whose inferred output type is compatible with r_out."""
    cfg = ctx.cfg
    results: list[tuple[prog.TransformProgram, Scalar]] = []
    root = TablePartial((), (), r_out)
    worklist: deque[TablePartial] = deque()
    if cfg.use_lemmas and violates_lemma(root.hole_goals(), lemmas):
        counters.prunes_by_lemma += 1
        return results
    worklist.append(root)
    counters.worklist_insertions += 1
    input_base = ctx.input_type.base
    assert isinstance(input_base, TableType)
    env = _typed_env(ctx)

    while worklist:
        partial = worklist.popleft()
        if partial.closed:
            program = partial.build()
            inferred = ctx.type_cache.get(program)
            if inferred is None:
                try:
                    inferred = type_of(program, env)
                except NoRuleError as e:
                    inferred = e
                ctx.type_cache[program] = inferred
            if isinstance(inferred, NoRuleError):
                continue
            counters.solver_calls += 1
            if is_compatible(EMPTY_ENV, inferred, r_out):
                results.append((program, inferred))
            continue

        allow_ops = partial.depth() + 1 <= cfg.max_depth
        for production in table_productions(ctx, partial.leaf_goal, allow_ops):
            counters.expansions += 1
            if production.op == "input":
                child = TablePartial(
                    partial.ops, partial.goals, partial.leaf_goal, closed=True
                )
            else:
                child_goal = backward_goals(production, partial.leaf_goal)[0]
                child = TablePartial(
                    partial.ops + (production,),
                    partial.goals + (partial.leaf_goal,),
                    child_goal,
                )
            if cfg.use_lemmas and violates_lemma(child.hole_goals(), lemmas):
                counters.prunes_by_lemma += 1
                continue
            incompatible, conflicts = type_incompatible(ctx, child, counters)
            if incompatible:
                counters.prunes_by_type += 1
                if learn and cfg.use_lemmas and conflicts:
                    for lemma in lemmas_from_conflicts(conflicts, input_base, cfg):
                        if lemmas.add(lemma):
                            counters.lemmas_learned += 1
                continue
            worklist.append(child)
            counters.worklist_insertions += 1
    return results


def synthesize_goal_plot(
    ctx: GrammarContext,
    r_table_goal: Scalar,
    r_plot_goal: Scalar,
    counters: Counters,
) -> list[tuple[prog.PlotProgram, Scalar, Scalar]]:
    """Plot programs (with inferred input/output types) whose input type is
    compatible with the table goal and whose output type is a subtype of the
    plot goal. Plot programs are single applications, so the worklist
    collapses to one expansion round."""
    out: list[tuple[prog.PlotProgram, Scalar, Scalar]] = []
    extra_vocab = _goal_columns(r_plot_goal)
    assert isinstance(r_table_goal.base, TableType)
    preferred = tuple(
        sorted(set(r_table_goal.base.columns()) | extra_vocab)
    )
    for plot in plot_productions(ctx, r_plot_goal, preferred):
        counters.expansions += 1
        vocab = tuple(sorted(set(ctx.plot_vocabulary) | set(extra_vocab)))
        for r_in, r_out in plot_input_signatures(plot, vocab):
            counters.solver_calls += 2
            if not is_compatible(EMPTY_ENV, r_in, r_table_goal):
                continue
            if not is_subtype(EMPTY_ENV, r_out, r_plot_goal):
                continue
            out.append((plot, r_in, r_out))
    return out


def _goal_columns(goal: Scalar) -> set[str]:
    from ..types import Pi, QNot, SourceRef, subformulas

    cols: set[str] = set()
    for sub in subformulas(goal.qual):
        atom = sub.arg if isinstance(sub, QNot) else sub
        if isinstance(atom, Pi) and isinstance(atom.prov, SourceRef):
            cols.add(atom.prov.col)
    return cols

"""Typing rules for the transformation and plotting DSLs, the forget
operator, and backward propagation of goal types to children of partial
programs.

Forward rules track how each operator rewrites the table schema and weaken
the carried qualifier so that every concrete evaluation still models the
derived type: operators that can drop rows (bin, filter, summarize, mutate)
turn carried cardinality equalities into upper bounds, and operators that
drop columns forget everything those columns pin down.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

from . import programs as prog
from .solver import EncodeEnv, FragmentError, encode, decode_atom, is_valid_implication
from .solver import eliminate as solver_eliminate
from .solver.formulas import FAnd, FFalse, FOr, FTrue, Formula, LinAtom, PropLit
from .types import (
    ColumnType,
    IntLit,
    NumTerm,
    Pi,
    PlotKind,
    PlotType,
    Provenance,
    QAnd,
    QCmp,
    QFalse,
    QNot,
    QOr,
    QTrue,
    Qualifier,
    Scalar,
    SourceRef,
    TableType,
    TypeEnv,
    SELF_VAR,
    INPUT_VAR,
    column_meet,
    column_subtype,
    conjuncts,
    proj,
    qand,
    qor,
    term_columns,
    term_has_bare_table,
    TRUE,
)

INPUT_TABLE_VAR = "T"


class NoRuleError(Exception):
    """No typing rule applies: some premise is unsatisfiable."""

    def __init__(self, rule: str, reason: str):
        super().__init__(f"{rule}: {reason}")
        self.rule = rule
        self.reason = reason


# ---------------------------------------------------------------------------
# forget
# ---------------------------------------------------------------------------

ForgetTarget = Union[NumTerm, Pi]


def _pi_matches(lit: Qualifier, targets: set[Pi]) -> bool:
    if isinstance(lit, Pi):
        return lit in targets
    if isinstance(lit, QNot) and isinstance(lit.arg, Pi):
        return lit.arg in targets
    return False


def forget(q: Qualifier, targets: Iterable[ForgetTarget]) -> Qualifier:
    """The strongest consequence of q mentioning none of the targets.

    Syntactic atoms are dropped from the literal set; semantic terms are
    replaced by fresh integer variables and eliminated by Fourier-Motzkin.
    Disjunctions distribute; other shapes with semantic targets are rejected.
    """
    pi_targets = {t for t in targets if isinstance(t, Pi)}
    sem_targets = {t for t in targets if not isinstance(t, Pi)}
    return _forget(q, pi_targets, sem_targets)


def _forget(q: Qualifier, pis: set[Pi], sems: set[NumTerm]) -> Qualifier:
    if isinstance(q, QOr):
        return qor(*(_forget(a, pis, sems) for a in q.args))
    lits = conjuncts(q)
    if not all(_is_literal(l) for l in lits):
        if sems:
            raise FragmentError("forget: non-conjunctive qualifier with semantic targets")
        return _drop_pi_literals(q, pis)
    kept_pis = [l for l in lits if not isinstance(l, (QCmp,)) and not _pi_matches(l, pis)]
    cmps = [l for l in lits if isinstance(l, QCmp)]
    if not sems:
        return qand(*kept_pis, *cmps)
    touched = [c for c in cmps if _mentions_term(c, sems)]
    untouched = [c for c in cmps if not _mentions_term(c, sems)]
    if not touched:
        return qand(*kept_pis, *cmps)
    env = EncodeEnv()
    f, env = encode(qand(*touched), env)
    drop_vars = set()
    for t in sems:
        encode(QCmp(t, "=", IntLit(0)), env)  # intern the term
        for var, term in env.term_by_intvar.items():
            if term == t:
                drop_vars.add(var)
    projected = solver_eliminate(f, drop_vars, set())
    recovered = _decode_formula(projected, env)
    return qand(*kept_pis, *untouched, recovered)


def _is_literal(l: Qualifier) -> bool:
    if isinstance(l, (Pi, QCmp, QTrue, QFalse)):
        return True
    return isinstance(l, QNot) and isinstance(l.arg, (Pi, QCmp))


def _mentions_term(c: QCmp, sems: set[NumTerm]) -> bool:
    return c.lhs in sems or c.rhs in sems


def _drop_pi_literals(q: Qualifier, pis: set[Pi]) -> Qualifier:
    """Total weakening: targeted literals become true inside any structure."""
    if isinstance(q, Pi):
        return TRUE if q in pis else q
    if isinstance(q, QNot) and isinstance(q.arg, Pi):
        return TRUE if q.arg in pis else q
    if isinstance(q, QAnd):
        return qand(*(_drop_pi_literals(a, pis) for a in q.args))
    if isinstance(q, QOr):
        return qor(*(_drop_pi_literals(a, pis) for a in q.args))
    return q


def _decode_formula(f: Formula, env: EncodeEnv) -> Qualifier:
    if isinstance(f, FTrue):
        return TRUE
    if isinstance(f, FFalse):
        return QFalse()
    if isinstance(f, FAnd):
        return qand(*(_decode_formula(a, env) for a in f.args))
    if isinstance(f, FOr):
        return qor(*(_decode_formula(a, env) for a in f.args))
    if isinstance(f, (PropLit, LinAtom)):
        q = decode_atom(f, env)
        # Constraints the qualifier grammar cannot express are dropped;
        # dropping only ever weakens, which forget is allowed to do.
        return TRUE if q is None else q
    return TRUE


# ---------------------------------------------------------------------------
# Qualifier transport along table operators
# ---------------------------------------------------------------------------


def _literal_parts(q: Qualifier) -> Optional[tuple[list[Qualifier], list[QCmp]]]:
    """Split a conjunction of literals into (pi literals, comparisons)."""
    pis: list[Qualifier] = []
    cmps: list[QCmp] = []
    for l in conjuncts(q):
        if isinstance(l, QCmp):
            cmps.append(l)
        elif isinstance(l, Pi) or (isinstance(l, QNot) and isinstance(l.arg, Pi)):
            pis.append(l)
        elif isinstance(l, QTrue):
            continue
        else:
            return None
    return pis, cmps


def _cmp_support(c: QCmp) -> tuple[set[str], bool]:
    cols = term_columns(c.lhs) | term_columns(c.rhs)
    bare = term_has_bare_table(c.lhs) or term_has_bare_table(c.rhs)
    return cols, bare


def _advance_qualifier(
    q: Qualifier,
    changed: set[str],
    dropped: set[str],
    rows_may_drop: bool,
    scrub_pi: set[Pi],
) -> Qualifier:
    """Carry an input qualifier across an operator.

    - comparisons touching changed/dropped columns (or observing the whole
      table when it shrinks) are forgotten by Fourier-Motzkin;
    - surviving equalities become upper bounds when rows may be dropped;
    - pi literals of dropped columns and of the scrub set are removed.
    """
    unstable = changed | dropped
    parts = _literal_parts(q)
    if parts is None:
        # Rare non-conjunctive carried qualifier: weaken every literal the
        # operator may invalidate.
        return _weaken_all(q, unstable, rows_may_drop, dropped, scrub_pi)
    pis, cmps = parts
    kept_pis = []
    for l in pis:
        atom = l if isinstance(l, Pi) else l.arg  # type: ignore[union-attr]
        if atom in scrub_pi or atom.attr in dropped:
            continue
        kept_pis.append(l)
    forget_terms: set[NumTerm] = set()
    survivors: list[QCmp] = []
    for c in cmps:
        cols, bare = _cmp_support(c)
        if cols & unstable or (bare and (rows_may_drop or dropped)):
            for t in (c.lhs, c.rhs):
                tcols = term_columns(t)
                tbare = term_has_bare_table(t)
                if tcols & unstable or (tbare and (rows_may_drop or dropped)):
                    if not isinstance(t, IntLit):
                        forget_terms.add(t)
        else:
            survivors.append(c)
    base = qand(*kept_pis, *survivors)
    if forget_terms:
        base = forget(qand(*kept_pis, *cmps), forget_terms)
    if rows_may_drop:
        base = _weaken_equalities(base)
    return base


def _weaken_equalities(q: Qualifier) -> Qualifier:
    """Row-dropping operators only shrink distinct counts, so a carried
    `term = k` is only safe as `term <= k` (and `term >= k` is unsafe)."""

    def weaken(l: Qualifier) -> Qualifier:
        if isinstance(l, QCmp):
            const_rhs = isinstance(l.rhs, IntLit)
            const_lhs = isinstance(l.lhs, IntLit)
            if const_rhs and not const_lhs:
                if l.op == "=":
                    return QCmp(l.lhs, "<=", l.rhs)
                if l.op == ">=":
                    return TRUE
                return l
            if const_lhs and not const_rhs:
                # constant-on-the-left: "k ? term"
                if l.op == "=":
                    return QCmp(l.rhs, "<=", l.lhs)  # term <= k
                if l.op == "<=":
                    return TRUE  # k <= term is a lower bound, unsafe
                return l  # k >= term stays
            # term-to-term facts are not preserved under row drops
            return TRUE
        if isinstance(l, (QOr, QAnd)) or (
            isinstance(l, QNot) and not isinstance(l.arg, Pi)
        ):
            return TRUE
        return l

    return qand(*(weaken(l) for l in conjuncts(q)))


def _weaken_all(
    q: Qualifier,
    unstable: set[str],
    rows_may_drop: bool,
    dropped: set[str],
    scrub_pi: set[Pi],
) -> Qualifier:
    if isinstance(q, QAnd):
        return qand(*(_weaken_all(a, unstable, rows_may_drop, dropped, scrub_pi) for a in q.args))
    if isinstance(q, QOr):
        return qor(*(_weaken_all(a, unstable, rows_may_drop, dropped, scrub_pi) for a in q.args))
    if isinstance(q, QNot):
        inner = q.arg
        if isinstance(inner, Pi):
            if inner in scrub_pi or inner.attr in dropped:
                return TRUE
            return q
        return TRUE if isinstance(inner, QCmp) else q
    if isinstance(q, Pi):
        return TRUE if (q in scrub_pi or q.attr in dropped) else q
    if isinstance(q, QCmp):
        cols, bare = _cmp_support(q)
        if cols & unstable or bare:
            return TRUE
        return _weaken_equalities(q) if rows_may_drop else q
    return q


def _scrub_set(q: Qualifier, attr: str, provs: Sequence[Provenance]) -> set[Pi]:
    out = set()
    for sub in conjuncts(q):
        atom = sub.arg if isinstance(sub, QNot) else sub
        if isinstance(atom, Pi) and atom.attr == attr and atom.prov in provs:
            out.add(atom)
    return out


# ---------------------------------------------------------------------------
# Typing rules: table transformation DSL
# ---------------------------------------------------------------------------


def type_of(
    term: prog.TransformProgram,
    env: TypeEnv,
    input_var: str = INPUT_TABLE_VAR,
) -> Scalar:
    """Most precise derivable type of a complete table program."""
    if isinstance(term, prog.Input):
        r = env.lookup(input_var)
        if not isinstance(r, Scalar) or not isinstance(r.base, TableType):
            raise NoRuleError("Input", f"{input_var} is not bound to a table type")
        return r

    sub = type_of(term.source, env, input_var)
    schema = sub.base
    assert isinstance(schema, TableType)

    if isinstance(term, prog.Bin):
        tgt = schema.get(term.target)
        if tgt is None:
            raise NoRuleError("Bin", f"missing column {term.target!r}")
        if not column_subtype(tgt, ColumnType.QUANTITATIVE):
            raise NoRuleError("Bin", f"target {term.target!r} must be quantitative")
        out_base = schema.with_column(term.target, ColumnType.DISCRETE)
        scrub = _scrub_set(sub.qual, term.target, ["bin"])
        carried = _advance_qualifier(
            sub.qual, {term.target}, set(), rows_may_drop=True, scrub_pi=scrub
        )
        new = qand(
            QCmp(proj(SELF_VAR, [term.target]), "<=", IntLit(term.n)),
            Pi(SELF_VAR, term.target, "bin"),
        )
        return Scalar(out_base, qand(carried, new))

    if isinstance(term, prog.Filter):
        if schema.get(term.col) is None:
            raise NoRuleError("Filter", f"missing column {term.col!r}")
        if isinstance(term.value, prog.ColRef) and schema.get(term.value.name) is None:
            raise NoRuleError("Filter", f"missing column {term.value.name!r}")
        cols = set(schema.columns())
        scrub = set()
        for c in cols:
            scrub |= _scrub_set(sub.qual, c, ["filter"])
        carried = _advance_qualifier(
            sub.qual, cols, set(), rows_may_drop=True, scrub_pi=scrub
        )
        new = qand(*(Pi(SELF_VAR, c, "filter") for c in schema.columns()))
        return Scalar(schema, qand(carried, new))

    if isinstance(term, prog.Summarize):
        for k in term.keys:
            if schema.get(k) is None:
                raise NoRuleError("Summarize", f"missing key column {k!r}")
        tgt = schema.get(term.target)
        if tgt is None:
            raise NoRuleError("Summarize", f"missing column {term.target!r}")
        if not term.keys:
            raise NoRuleError("Summarize", "needs at least one key column")
        if term.agg in ("mean", "sum") and not column_subtype(
            tgt, ColumnType.QUANTITATIVE
        ):
            raise NoRuleError(
                "Summarize", f"{term.agg} target {term.target!r} must be quantitative"
            )
        out_ctype = (
            ColumnType.DISCRETE if term.agg == "count" else ColumnType.CONTINUOUS
        )
        keep = set(term.keys) | {term.target}
        dropped = set(schema.columns()) - keep
        out_base = schema.without_columns(dropped).with_column(term.target, out_ctype)
        scrub = _scrub_set(sub.qual, term.target, [term.agg])
        carried = _advance_qualifier(
            sub.qual, {term.target}, dropped, rows_may_drop=True, scrub_pi=scrub
        )
        new = qand(
            QCmp(
                proj(SELF_VAR, [term.target]), "<=", proj(SELF_VAR, term.keys)
            ),
            Pi(SELF_VAR, term.target, term.agg),
        )
        return Scalar(out_base, qand(carried, new))

    if isinstance(term, prog.Mutate):
        if schema.get(term.target) is not None:
            raise NoRuleError("Mutate", f"target {term.target!r} already exists")
        for a in term.args:
            at = schema.get(a)
            if at is None:
                raise NoRuleError("Mutate", f"missing argument column {a!r}")
            if not column_subtype(at, ColumnType.QUANTITATIVE):
                raise NoRuleError("Mutate", f"argument {a!r} must be quantitative")
        out_base = schema.with_column(term.target, ColumnType.TOP)
        scrub = _scrub_set(sub.qual, term.target, ["mutate"])
        carried = _advance_qualifier(
            sub.qual, {term.target}, set(), rows_may_drop=True, scrub_pi=scrub
        )
        new = qand(
            QCmp(proj(SELF_VAR, [term.target]), "<=", proj(SELF_VAR, term.args)),
            Pi(SELF_VAR, term.target, "mutate"),
        )
        return Scalar(out_base, qand(carried, new))

    if isinstance(term, prog.Select):
        for c in term.cols:
            if schema.get(c) is None:
                raise NoRuleError("Select", f"missing column {c!r}")
        dropped = set(schema.columns()) - set(term.cols)
        if not dropped:
            return sub
        out_base = schema.without_columns(dropped)
        carried = _advance_qualifier(
            sub.qual, set(), dropped, rows_may_drop=False, scrub_pi=set()
        )
        return Scalar(out_base, carried)

    raise TypeError(term)


# ---------------------------------------------------------------------------
# Typing rules: plotting DSL
# ---------------------------------------------------------------------------

# Channel schema requirements per plot kind, as maximal antichains of
# admissible column types. "y" for bar/line/area must be quantitative; the
# other channels exclude the types that make the mark unreadable.
_NOT_CONTINUOUS = (ColumnType.DISCRETE, ColumnType.QUALITATIVE)
_NOT_NOMINAL = (ColumnType.QUANTITATIVE, ColumnType.ORDINAL, ColumnType.TEMPORAL)

CHANNEL_REQUIREMENTS: dict[PlotKind, dict[str, tuple[ColumnType, ...]]] = {
    PlotKind.BAR: {
        "x": _NOT_CONTINUOUS,
        "y": (ColumnType.QUANTITATIVE,),
        "color": _NOT_CONTINUOUS,
        "subplot": _NOT_CONTINUOUS,
    },
    PlotKind.SCATTER: {
        "x": _NOT_NOMINAL,
        "y": (ColumnType.QUANTITATIVE, ColumnType.ORDINAL),
        "color": (ColumnType.TOP,),
        "subplot": _NOT_CONTINUOUS,
    },
    PlotKind.LINE: {
        "x": _NOT_NOMINAL,
        "y": (ColumnType.QUANTITATIVE,),
        "color": _NOT_CONTINUOUS,
        "subplot": _NOT_CONTINUOUS,
    },
    PlotKind.AREA: {
        "x": _NOT_NOMINAL,
        "y": (ColumnType.QUANTITATIVE,),
        "color": _NOT_CONTINUOUS,
        "subplot": _NOT_CONTINUOUS,
    },
}

# The scatter rule carries no cardinality premise; bar/line/area demand one
# bar/point per (x, color, subplot) combination.
CARDINALITY_PREMISE_KINDS = (PlotKind.BAR, PlotKind.LINE, PlotKind.AREA)


def _channel_ok(ctype: ColumnType, allowed: tuple[ColumnType, ...]) -> bool:
    return any(column_subtype(ctype, ub) for ub in allowed)


def plot_cardinality_premise(plot: prog.PlotProgram) -> Optional[QCmp]:
    if plot.kind not in CARDINALITY_PREMISE_KINDS:
        return None
    group = [c for c in (plot.x, plot.color, plot.subplot) if c is not None]
    return QCmp(proj(SELF_VAR, group), ">=", proj(SELF_VAR, [plot.y]))


def plot_output_type(plot: prog.PlotProgram, vocabulary: Sequence[str]) -> Scalar:
    """Most precise output type: positive channel bindings plus closed-world
    negative bindings over the vocabulary."""
    vocab = sorted(set(vocabulary) | set(plot.channels().values()))
    atoms: list[Qualifier] = []
    for ch in prog.CHANNELS:
        bound = plot.channels().get(ch)
        if bound is not None:
            atoms.append(Pi(SELF_VAR, ch, SourceRef(INPUT_VAR, bound)))
        for col in vocab:
            if col != bound:
                atoms.append(QNot(Pi(SELF_VAR, ch, SourceRef(INPUT_VAR, col))))
    return Scalar(PlotType(plot.kind), qand(*atoms))


def plot_type_of(
    plot: prog.PlotProgram,
    input_type: Scalar,
    env: TypeEnv = TypeEnv(),
    extra_vocabulary: Sequence[str] = (),
) -> Scalar:
    """Type a plotting program against a concrete input table type, checking
    the schema premises and (for bar/line/area) the cardinality premise."""
    if not isinstance(input_type.base, TableType):
        raise NoRuleError(plot.kind.value, "plot input must be a table")
    reqs = CHANNEL_REQUIREMENTS[plot.kind]
    for ch, col in plot.channels().items():
        ctype = input_type.base.get(col)
        if ctype is None:
            raise NoRuleError(plot.kind.value, f"missing column {col!r} for {ch}")
        if not _channel_ok(ctype, reqs[ch]):
            raise NoRuleError(
                plot.kind.value,
                f"{ch} column {col!r} has type {ctype.value}, needs one of "
                + "/".join(t.value for t in reqs[ch]),
            )
    premise = plot_cardinality_premise(plot)
    if premise is not None:
        enc = EncodeEnv()
        f_in, _ = encode(input_type.qual, enc)
        f_req, _ = encode(premise, enc)
        if not is_valid_implication(f_in, f_req, enc.app_vars()):
            raise NoRuleError(
                plot.kind.value,
                "cannot prove one mark per (x, color, subplot) group: "
                f"{premise}",
            )
    vocab = list(input_type.base.columns()) + list(extra_vocabulary)
    return plot_output_type(plot, vocab)


def plot_input_signatures(
    plot: prog.PlotProgram, vocabulary: Sequence[str]
) -> list[tuple[Scalar, Scalar]]:
    """All (input, output) type pairs consistent with the plot's typing rule.

    Channel requirements that are not single types ("anything but
    Continuous") are enumerated over the maximal antichain of admissible
    column types, so each candidate input schema is concrete.
    """
    reqs = CHANNEL_REQUIREMENTS[plot.kind]
    channels = list(plot.channels().items())
    choice_lists = [reqs[ch] for ch, _ in channels]
    out: list[tuple[Scalar, Scalar]] = []
    output = plot_output_type(plot, vocabulary)

    def build(i: int, schema: dict[str, ColumnType]) -> None:
        if i == len(channels):
            base = TableType(tuple(sorted(schema.items())))
            premise = plot_cardinality_premise(plot)
            qual: Qualifier = premise if premise is not None else TRUE
            out.append((Scalar(base, qual), output))
            return
        ch, col = channels[i]
        for t in choice_lists[i]:
            prev = schema.get(col)
            if prev is None:
                schema[col] = t
                build(i + 1, schema)
                del schema[col]
            else:
                m = column_meet(prev, t)
                if m is None:
                    continue
                schema[col] = m
                build(i + 1, schema)
                schema[col] = prev

    build(0, {})
    seen: set[tuple] = set()
    uniq = []
    for pair in out:
        key = (pair[0], pair[1])
        if key not in seen:
            seen.add(key)
            uniq.append(pair)
    return uniq


# ---------------------------------------------------------------------------
# Backward goal propagation
# ---------------------------------------------------------------------------


from .types import cached_hash as _cached_hash


@_cached_hash
@dataclass(frozen=True)
class Production:
    """A grammar production: an operator with all parameters fixed. The only
    child hole is the source table expression (Input has none)."""

    op: str  # input | bin | filter | summarize | mutate | select
    params: tuple

    def arity(self) -> int:
        return 0 if self.op == "input" else 1


def _required_columns(goal: Scalar) -> set[str]:
    """Columns any inhabitant of the goal must expose: schema columns plus
    every column its qualifier observes."""
    assert isinstance(goal.base, TableType)
    cols = set(goal.base.columns())
    for sub in _all_literals(goal.qual):
        atom = sub.arg if isinstance(sub, QNot) else sub
        if isinstance(atom, Pi):
            cols.add(atom.attr)
        elif isinstance(atom, QCmp):
            cols |= term_columns(atom.lhs) | term_columns(atom.rhs)
    return cols


def _all_literals(q: Qualifier):
    from .types import subformulas

    for sub in subformulas(q):
        if isinstance(sub, (Pi, QCmp)):
            yield sub
        elif isinstance(sub, QNot):
            yield sub


def _backward_cardinalities(q: Qualifier, preserved: set[str]) -> Qualifier:
    """Necessary conditions on the child for goal comparisons: the operator
    can only shrink projections, so `= k` weakens to `>= k`, `>= k` stays,
    and upper bounds are dropped. Only atoms over preserved columns remain."""

    def back(l: Qualifier) -> Qualifier:
        if isinstance(l, QCmp):
            cols, bare = _cmp_support(l)
            if bare or not cols <= preserved:
                return TRUE
            const_rhs = isinstance(l.rhs, IntLit)
            const_lhs = isinstance(l.lhs, IntLit)
            if const_rhs and not const_lhs:
                if l.op == "=":
                    return QCmp(l.lhs, ">=", l.rhs)
                if l.op == ">=":
                    return l
                return TRUE
            if const_lhs and not const_rhs:
                # "k ? term": = needs term >= k, <= (k <= term) stays
                if l.op == "=":
                    return QCmp(l.lhs, "<=", l.rhs)
                if l.op == "<=":
                    return l
                return TRUE
            return TRUE
        if isinstance(l, (Pi, QTrue)) or (
            isinstance(l, QNot) and isinstance(l.arg, Pi)
        ):
            return TRUE  # pi literals are handled separately
        return TRUE

    parts = _literal_parts(q)
    if parts is None:
        return TRUE
    return qand(*(back(l) for l in conjuncts(q)))


def _backward_pis(
    q: Qualifier, preserved_attrs: set[str], discharge: set[tuple[str, Provenance]]
) -> Qualifier:
    """Pi literals over preserved columns survive backwards except the atoms
    the operator itself discharges."""

    def back(l: Qualifier) -> Qualifier:
        atom = l.arg if isinstance(l, QNot) else l
        if not isinstance(atom, Pi):
            return TRUE
        if atom.attr not in preserved_attrs:
            return TRUE
        if (atom.attr, atom.prov) in discharge:
            return TRUE
        return l

    parts = _literal_parts(q)
    if parts is None:
        return TRUE
    lits = [back(l) for l in conjuncts(q) if not isinstance(l, QCmp)]
    return qand(*lits)


from functools import lru_cache


@lru_cache(maxsize=65536)
def backward_goals(production: Production, hole_goal: Scalar) -> list[Scalar]:
    """Goal types for the child holes of a production applied at a hole.

    Each child goal is a necessary condition: a complete subprogram whose
    actual type is incompatible with it can never complete the expansion
    into an inhabitant of the hole goal.
    """
    if production.op == "input":
        return []
    assert isinstance(hole_goal.base, TableType)
    goal_schema = dict(hole_goal.base.schema)
    q = hole_goal.qual

    if production.op == "select":
        (cols,) = production.params
        child_schema = {c: t for c, t in goal_schema.items()}
        pis = _backward_pis(q, set(cols), set())
        # select drops no rows: comparisons over kept columns stay exact
        parts = _literal_parts(q)
        if parts is None:
            card = TRUE
        else:
            card = qand(
                *(
                    l
                    for l in parts[1]
                    if not _cmp_support(l)[1] and _cmp_support(l)[0] <= set(cols)
                )
            )
        child_qual = qand(pis, card)
        return [Scalar(TableType(tuple(sorted(child_schema.items()))), child_qual)]

    if production.op == "bin":
        n, tgt = production.params
        child_schema = {c: t for c, t in goal_schema.items() if c != tgt}
        child_schema[tgt] = ColumnType.QUANTITATIVE
        preserved = set(child_schema) - {tgt}
        child_qual = qand(
            _backward_pis(q, preserved | {tgt}, {(tgt, "bin")}),
            _backward_cardinalities(q, preserved),
        )
        return [Scalar(TableType(tuple(sorted(child_schema.items()))), child_qual)]

    if production.op == "filter":
        col, op, value = production.params
        child_schema = dict(goal_schema)
        child_schema.setdefault(col, ColumnType.TOP)
        if isinstance(value, prog.ColRef):
            child_schema.setdefault(value.name, ColumnType.TOP)
        preserved = set(child_schema)
        discharge = {(c, "filter") for c in preserved}
        child_qual = qand(
            _backward_pis(q, preserved, discharge),
            _backward_cardinalities(q, preserved),
        )
        return [Scalar(TableType(tuple(sorted(child_schema.items()))), child_qual)]

    if production.op == "summarize":
        keys, agg, tgt = production.params
        child_schema = {c: t for c, t in goal_schema.items() if c in keys}
        for k in keys:
            child_schema.setdefault(k, ColumnType.TOP)
        child_schema[tgt] = (
            ColumnType.QUANTITATIVE if agg in ("mean", "sum") else ColumnType.TOP
        )
        preserved = set(keys)
        child_qual = qand(
            _backward_pis(q, preserved | {tgt}, {(tgt, agg)}),
            _backward_cardinalities(q, preserved),
        )
        return [Scalar(TableType(tuple(sorted(child_schema.items()))), child_qual)]

    if production.op == "mutate":
        tgt, op, args = production.params
        child_schema = {c: t for c, t in goal_schema.items() if c != tgt}
        for a in args:
            child_schema.setdefault(a, ColumnType.QUANTITATIVE)
        preserved = set(child_schema)
        child_qual = qand(
            _backward_pis(q, preserved, {(tgt, "mutate")}),
            _backward_cardinalities(q, preserved),
        )
        return [Scalar(TableType(tuple(sorted(child_schema.items()))), child_qual)]

    raise ValueError(f"unknown production {production.op!r}")

import pytest

from vizsynth import programs as prog
from vizsynth.engine import (
    Counters,
    GrammarContext,
    Lemma,
    LemmaStore,
    ScoredSpec,
    SynthConfig,
    base_type_interpolant,
    gen_req,
    synthesize_session,
    synthesize_vis,
    type_interpolant,
    violates_lemma,
)
from vizsynth.engine.grammar import table_productions
from vizsynth.engine.lemmas import validate_lemma
from vizsynth.engine.search import (
    TablePartial,
    exact_input_type,
    synthesize_goal_table,
    type_incompatible,
)
from vizsynth.relations import is_compatible, is_subtype
from vizsynth.rules import INPUT_TABLE_VAR, Production, type_of
from vizsynth.tables import Table, TableError, eval_transform, models
from vizsynth.types import (
    ColumnType,
    EMPTY_ENV,
    IntLit,
    Pi,
    PlotKind,
    PlotType,
    QCmp,
    Scalar,
    SourceRef,
    TypeEnv,
    normalized_qualifier_str,
    proj,
    qand,
    qor,
    table_base,
    FALSE,
    INPUT_VAR,
    SELF_VAR,
    TRUE,
)

from oracle import oracle_synthesize

D, C, N = ColumnType.DISCRETE, ColumnType.CONTINUOUS, ColumnType.NOMINAL
QT, QL, TOP = ColumnType.QUANTITATIVE, ColumnType.QUALITATIVE, ColumnType.TOP


def small_table():
    return Table(
        [("g", N), ("h", N), ("v", C)],
        [
            ("a", "p", 1.5),
            ("a", "q", 2.5),
            ("b", "p", 3.5),
            ("b", "q", 1.0),
            ("a", "p", 4.5),
            ("b", "q", 2.0),
        ],
    )


def ctx_for(table, **kw):
    cfg = SynthConfig(**kw)
    return GrammarContext(table, exact_input_type(table), cfg), cfg


# ---------------------------------------------------------------------------
# GenReq fixtures
# ---------------------------------------------------------------------------


def test_genreq_qualitative_to_discrete_k1():
    src = table_base({"colA": QL})
    dst = table_base({"colA": D})
    r = gen_req(src, dst, 1)
    assert normalized_qualifier_str(r.qual) == normalized_qualifier_str(
        Pi(SELF_VAR, "colA", "count")
    )


def test_genreq_qualitative_to_continuous_k2():
    src = table_base({"colA": QL})
    dst = table_base({"colA": C})
    r = gen_req(src, dst, 2)
    expected = qand(
        Pi(SELF_VAR, "colA", "count"),
        qor(Pi(SELF_VAR, "colA", "mean"), Pi(SELF_VAR, "colA", "sum")),
    )
    assert normalized_qualifier_str(r.qual) == normalized_qualifier_str(expected)


def test_genreq_empty_op_set_is_bottom():
    src = table_base({"colA": C})
    dst = table_base({"colA": QL})
    r = gen_req(src, dst, 1)
    assert r.qual == FALSE
    assert gen_req(src, dst, 4).qual == FALSE


# ---------------------------------------------------------------------------
# interpolants
# ---------------------------------------------------------------------------


def test_base_interpolant_example():
    b1 = table_base({"colA": D, "colB": QL, "colC": C})
    b2 = table_base({"colA": QL, "colB": QL, "colC": C})
    assert base_type_interpolant(b1, b2) == table_base({"colA": QT})


def test_refinement_interpolant_example():
    a = proj(SELF_VAR, ["colA"])
    b = proj(SELF_VAR, ["colB"])
    r1 = Scalar(
        table_base({"colA": D, "colB": D}),
        qand(QCmp(a, "<=", b), QCmp(b, "<=", IntLit(20))),
    )
    r2 = Scalar(table_base({"colA": D}), QCmp(a, "=", IntLit(30)))
    i = type_interpolant(r1, r2)
    assert i.base == r1.base
    assert normalized_qualifier_str(i.qual) == normalized_qualifier_str(
        QCmp(a, "<=", IntLit(20))
    )


def test_interpolant_three_conditions_mechanically():
    r1 = Scalar(table_base({"colA": D, "colB": QL, "colC": C}))
    r2 = Scalar(table_base({"colA": QL, "colB": QL, "colC": C}))
    i = type_interpolant(r1, r2)
    assert is_subtype(EMPTY_ENV, r1, i)
    assert not is_compatible(EMPTY_ENV, i, r2)
    # every strict base-supertype of the interpolant is compatible with r2
    assert isinstance(i.base.schema, tuple)
    (col, ctype), = i.base.schema
    from vizsynth.types import column_ancestors

    for anc in column_ancestors(ctype)[1:]:
        sup = Scalar(table_base({col: anc}))
        assert is_compatible(EMPTY_ENV, sup, r2)
    assert is_compatible(EMPTY_ENV, Scalar(table_base({})), r2)


def test_interpolant_rejects_compatible_inputs():
    with pytest.raises(ValueError):
        type_interpolant(
            Scalar(table_base({"colA": D})), Scalar(table_base({"colA": D}))
        )


# ---------------------------------------------------------------------------
# lemmas
# ---------------------------------------------------------------------------


def test_lemma_example_from_infeasible_goal(cars):
    """The goal requiring Fuel_economy: Qualitative over a Continuous source
    yields the lemma ({Table({Fuel_economy: Qualitative})}, bottom), and a
    subsumed later goal is rejected with zero worklist expansions."""
    ctx, cfg = ctx_for(cars, max_depth=3)
    store = LemmaStore()
    counters = Counters()
    goal = Scalar(
        table_base({"Model": D, "Fuel_economy": QL}),
        Pi(SELF_VAR, "Model", "count"),
    )
    results = synthesize_goal_table(ctx, goal, store, counters)
    assert results == []
    guards = {lemma.guard for lemma in store}
    expected_guard = Scalar(table_base({"Fuel_economy": QL}))
    assert expected_guard in guards
    the_lemma = next(l for l in store if l.guard == expected_guard)
    assert the_lemma.requirement.qual == FALSE

    # a subsumed goal is pruned before any expansion
    counters2 = Counters()
    subsumed = Scalar(
        table_base({"Body_style": N, "Fuel_economy": N}),
        Pi(SELF_VAR, "Body_style", "count"),
    )
    results2 = synthesize_goal_table(ctx, subsumed, store, counters2)
    assert results2 == []
    assert counters2.expansions == 0
    assert counters2.prunes_by_lemma == 1


def test_violates_lemma_empty_store():
    goal = Scalar(table_base({"A": D}), TRUE)
    assert not violates_lemma([goal], LemmaStore())


def test_lemma_validity_against_program_universe(cars):
    """No stored lemma may exclude a type concretely inhabited by a program
    output over the same dataset."""
    ctx, cfg = ctx_for(cars, max_depth=3)
    store = LemmaStore()
    counters = Counters()
    goal = Scalar(
        table_base({"Model": D, "Fuel_economy": QL}),
        Pi(SELF_VAR, "Model", "count"),
    )
    synthesize_goal_table(ctx, goal, store, counters)
    env = TypeEnv(((INPUT_TABLE_VAR, ctx.input_type),))
    from oracle import enumerate_table_programs

    inhabited = []
    for p in enumerate_table_programs(cars, SynthConfig(max_depth=2, filter_constant_cap=2)):
        try:
            out = eval_transform(p, cars)
            r = type_of(p, env)
        except (TableError, Exception):
            continue
        if out.rows and models(out, r):
            inhabited.append(r)
    assert inhabited
    for lemma in store:
        assert validate_lemma(lemma, inhabited), lemma


# ---------------------------------------------------------------------------
# expansion and incompatibility
# ---------------------------------------------------------------------------


def test_expand_production_counts():
    t = Table([("g", N), ("v", C)], [("a", 1.0), ("b", 2.5)])
    ctx, cfg = ctx_for(t, max_depth=2, filter_constant_cap=2, bin_counts=(5,))
    goal = Scalar(table_base({}), TRUE)
    prods = table_productions(ctx, goal, allow_ops=True)
    by_op = {}
    for p in prods:
        by_op.setdefault(p.op, []).append(p)
    # hand-enumerated: input; selects over non-empty subsets of {g, v};
    # summarize: count/mean/sum for each (target, keys = the other column)
    # pair (aggregating g stays admissible because an inner count can make
    # any column quantitative); bins on both columns; filters: 2 constants
    # x 2 operators on nominal g, 2 x 4 on numeric v
    assert len(by_op["input"]) == 1
    assert len(by_op["select"]) == 3
    assert len(by_op["summarize"]) == 6
    assert len(by_op["bin"]) == 2
    assert len(by_op["filter"]) == 2 * 2 + 2 * 4


def test_depth_cap_leaves_only_input():
    t = small_table()
    ctx, cfg = ctx_for(t, max_depth=1)
    goal = Scalar(table_base({}), TRUE)
    prods = table_productions(ctx, goal, allow_ops=False)
    assert [p.op for p in prods] == ["input"]


def test_type_incompatible_fig6_style(cars):
    ctx, cfg = ctx_for(cars, max_depth=3)
    goal = Scalar(table_base({"Model": TOP, "Fuel_economy": QL}), TRUE)
    partial = TablePartial((), (), goal, closed=True)
    bad, conflicts = type_incompatible(ctx, partial, Counters())
    assert bad and conflicts


def test_type_incompatible_open_program_false(cars):
    ctx, cfg = ctx_for(cars, max_depth=3)
    goal = Scalar(table_base({"Fuel_economy": QL}), TRUE)
    partial = TablePartial((), (), goal, closed=False)
    bad, _ = type_incompatible(ctx, partial, Counters())
    assert not bad


def test_never_prunes_feasible_prefix(cars):
    """No prefix of a program whose completion concretely inhabits the goal
    is ever reported type-incompatible."""
    ctx, cfg = ctx_for(cars, max_depth=3)
    goal = Scalar(
        table_base({"Origin": QL, "Fuel_economy": C}),
        Pi(SELF_VAR, "Fuel_economy", "mean"),
    )
    from vizsynth.rules import backward_goals

    production = Production("summarize", (("Body_style", "Origin"), "mean", "Fuel_economy"))
    (child_goal,) = backward_goals(production, goal)
    complete = TablePartial((production,), (goal,), child_goal, closed=True)
    program = complete.build()
    out = eval_transform(program, cars)
    assert models(out, goal)
    bad, _ = type_incompatible(ctx, complete, Counters())
    assert not bad


# ---------------------------------------------------------------------------
# synthesize_goal / synthesize_vis vs brute force
# ---------------------------------------------------------------------------


def spec_mean_bar():
    plot_goal = Scalar(
        PlotType(PlotKind.BAR), Pi(SELF_VAR, "x", SourceRef(INPUT_VAR, "g"))
    )
    table_goal = Scalar(
        table_base({"g": TOP, "v": TOP}), Pi(SELF_VAR, "v", "mean")
    )
    return ScoredSpec(plot_goal, table_goal, 0.9)


def _engine_result_set(spec, t, cfg):
    ctx = GrammarContext(t, exact_input_type(t), cfg)
    return {
        (vis.table, vis.plot)
        for vis, _out in synthesize_vis(spec, ctx, LemmaStore(), cfg, Counters())
    }


@pytest.mark.parametrize("use_lemmas", [True, False])
def test_completeness_vs_bruteforce(use_lemmas):
    t = small_table()
    cfg = SynthConfig(
        max_depth=3,
        filter_constant_cap=2,
        bin_counts=(5,),
        max_results=10_000,
        ablation=None if use_lemmas else "no-lemma",
    )
    spec = spec_mean_bar()
    got = _engine_result_set(spec, t, cfg)
    expected = oracle_synthesize(spec, t, cfg)
    assert got == expected
    assert expected  # non-degenerate instance


def test_completeness_vs_bruteforce_with_mutate():
    t = Table(
        [("g", N), ("v", C)],
        [("a", 1.5), ("a", 2.5), ("b", 4.0), ("b", 1.0)],
    )
    cfg = SynthConfig(
        max_depth=2,
        filter_constant_cap=2,
        bin_counts=(5,),
        enable_mutate=True,
        mutate_ops=("max",),
        max_results=10_000,
    )
    spec = ScoredSpec(
        Scalar(PlotType(PlotKind.BAR), TRUE),
        Scalar(table_base({"g": TOP}), TRUE),
        0.9,
    )
    got = _engine_result_set(spec, t, cfg)
    expected = oracle_synthesize(spec, t, cfg)
    assert got == expected


def test_identity_program_found():
    t = small_table()
    cfg = SynthConfig(max_depth=2, filter_constant_cap=2, bin_counts=(5,))
    ctx = GrammarContext(t, exact_input_type(t), cfg)
    goal = exact_input_type(t)
    results = synthesize_goal_table(ctx, goal, LemmaStore(), Counters())
    assert any(isinstance(p, prog.Input) for p, _ in results)


def test_determinism_same_output_order():
    t = small_table()
    spec = spec_mean_bar()
    cfg = SynthConfig(max_depth=3, filter_constant_cap=2, bin_counts=(5,))
    r1 = synthesize_session([spec], t, cfg)
    r2 = synthesize_session([spec], t, cfg)
    assert [str(x.program) for x in r1.programs] == [str(x.program) for x in r2.programs]


def test_lemma_pruning_monotone_counters():
    t = small_table()
    infeasible = ScoredSpec(
        Scalar(PlotType(PlotKind.BAR), TRUE),
        Scalar(table_base({"v": QL}), TRUE),  # Continuous column required Qualitative
        0.9,
    )
    feasible = spec_mean_bar()
    subsumed = ScoredSpec(
        Scalar(PlotType(PlotKind.BAR), TRUE),
        Scalar(table_base({"v": N, "g": N}), TRUE),
        0.8,
    )
    specs = [infeasible, subsumed, feasible]
    on = synthesize_session([s for s in specs], t, SynthConfig(max_depth=3, filter_constant_cap=2, bin_counts=(5,)))
    off = synthesize_session(
        [s for s in specs],
        t,
        SynthConfig(max_depth=3, filter_constant_cap=2, bin_counts=(5,), ablation="no-lemma"),
    )
    assert on.counters.expansions <= off.counters.expansions
    assert on.counters.prunes_by_lemma > 0
    assert {str(r.program) for r in on.programs} == {str(r.program) for r in off.programs}

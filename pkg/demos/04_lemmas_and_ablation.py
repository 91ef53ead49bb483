"""Lemma learning in action: an unrealizable goal produces a reusable
(guard, requirement) lemma that rejects a later subsumed specification
without any search, and ablation counters quantify the pruning.

Run from the repository root:  python demos/04_lemmas_and_ablation.py
"""

import pathlib

from vizsynth.engine import Counters, GrammarContext, LemmaStore, SynthConfig
from vizsynth.engine.search import exact_input_type, synthesize_goal_table
from vizsynth.specs import parse_spec_file
from vizsynth.engine import synthesize_session
from vizsynth.tables import load_table
from vizsynth.types import ColumnType, Pi, Scalar, table_base, SELF_VAR

cars = load_table(pathlib.Path("tests/data/cars.csv").read_bytes())
cfg = SynthConfig(max_depth=3)
ctx = GrammarContext(cars, exact_input_type(cars), cfg)
store = LemmaStore()

print("== an unrealizable goal: Fuel_economy required Qualitative ==")
goal = Scalar(
    table_base({"Model": ColumnType.DISCRETE, "Fuel_economy": ColumnType.QUALITATIVE}),
    Pi(SELF_VAR, "Model", "count"),
)
counters = Counters()
results = synthesize_goal_table(ctx, goal, store, counters)
print(f"  results: {len(results)}, expansions: {counters.expansions}, "
      f"lemmas learned: {len(store)}")
for lemma in store:
    print(f"  lemma guard {lemma.guard!r}  requirement {lemma.requirement!r}")

print("\n== a subsumed goal is rejected without search ==")
subsumed = Scalar(
    table_base({"Body_style": ColumnType.NOMINAL, "Fuel_economy": ColumnType.NOMINAL}),
    Pi(SELF_VAR, "Body_style", "count"),
)
counters2 = Counters()
synthesize_goal_table(ctx, subsumed, store, counters2)
print(f"  expansions: {counters2.expansions}, lemma prunes: {counters2.prunes_by_lemma}")

print("\n== ablation counters on the running example ==")
spec_text = pathlib.Path("tests/data/cars_running_example.spec.json").read_text()
specs, _ = parse_spec_file(spec_text, cars)
for ablation in (None, "syn-only", "table-only", "base-only"):
    cfg = SynthConfig(max_depth=3, max_results=10_000, ablation=ablation)
    r = synthesize_session(specs, cars, cfg)
    print(f"  {str(ablation or 'full'):10s} expansions={r.counters.expansions:6d} "
          f"type-prunes={r.counters.prunes_by_type:6d} programs={len(r.programs)}")

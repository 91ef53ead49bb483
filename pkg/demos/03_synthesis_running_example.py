"""The end-to-end running example: parse the query, synthesize ranked
visualization programs, and emit Vega-Lite.

Run from the repository root:  python demos/03_synthesis_running_example.py
"""

import json
import pathlib

from vizsynth import programs as prog
from vizsynth.engine import SynthConfig, synthesize_session
from vizsynth.heuristics import heuristic_parse
from vizsynth.specs import parse_spec_file
from vizsynth.tables import load_table
from vizsynth.types import format_qualifier
from vizsynth.vegalite import emit_vegalite, validate_vegalite

cars = load_table(pathlib.Path("tests/data/cars.csv").read_bytes())
query = (
    "show the fuel efficiency for cars from different countries "
    "segregated based on body style"
)

print("== ranked specifications from the keyword parser ==")
specs = heuristic_parse(query, cars)
for s in specs[:4]:
    print(f"  {s.score:.4f}  {s.plot_goal.base!r}  {format_qualifier(s.table_goal.qual)}")

print("\n== synthesis from the hand-written specification file ==")
spec_text = pathlib.Path("tests/data/cars_running_example.spec.json").read_text()
file_specs, _ = parse_spec_file(spec_text, cars)
result = synthesize_session(file_specs, cars, SynthConfig(max_depth=3, max_results=10))
print(f"  counters: {result.counters.as_dict()}")
for i, r in enumerate(result.programs):
    print(f"  #{i} (size {r.ast_size})  {prog.format_vis(r.program)}")

print("\n== the top program as Vega-Lite ==")
best = result.programs[0]
doc = emit_vegalite(best.program, best.table_output)
validate_vegalite(doc)
print(json.dumps({k: doc[k] for k in ("mark", "encoding")}, indent=2))

"""Walk through the tabular core: loading a CSV, inferring column types,
running transformation pipelines, and checking concrete inhabitance.

Run from the repository root:  python demos/01_tables_and_types.py
"""

import pathlib

from vizsynth import programs as prog
from vizsynth.tables import cardinality, eval_transform, get_input_type, load_table, models
from vizsynth.types import ColumnType, Pi, Scalar, format_qualifier, table_base, SELF_VAR

cars = load_table(pathlib.Path("tests/data/cars.csv").read_bytes())

print("== inferred schema ==")
for name, ctype in cars.columns:
    print(f"  {name}: {ctype.value}")

print("\n== the exact type of the dataset ==")
input_type = get_input_type(cars)
print(" ", format_qualifier(input_type.qual))

print("\n== a transformation pipeline ==")
pipeline = prog.Summarize(
    prog.Select(prog.Input(), ("Origin", "Fuel_economy", "Body_style")),
    ("Origin", "Body_style"),
    "mean",
    "Fuel_economy",
)
print(" ", prog.format_transform(pipeline))
out = eval_transform(pipeline, cars)
for row in out.rows[:5]:
    print("   ", row)
print(f"  ... {len(out.rows)} rows,", f"|Proj(v, {{Origin}})| = {cardinality(out, ['Origin'])}")

print("\n== provenance makes syntactic constraints concrete ==")
goal = Scalar(
    table_base({"Fuel_economy": ColumnType.TOP}),
    Pi(SELF_VAR, "Fuel_economy", "mean"),
)
print("  raw cars models {v | pi(v.Fuel_economy, mean)}? ", models(cars, goal))
print("  aggregated      models the same goal?           ", models(out, goal))

import json
import pathlib

import pytest
from click.testing import CliRunner

from vizsynth import programs as prog
from vizsynth.cli import cli
from vizsynth.dsltext import parse_program, print_program
from vizsynth.types import PlotKind

DATA = pathlib.Path(__file__).parent / "data"
CARS = str(DATA / "cars.csv")
SPEC = str(DATA / "cars_running_example.spec.json")


@pytest.fixture()
def runner():
    return CliRunner()


# ---------------------------------------------------------------------------
# textual DSL round-trip
# ---------------------------------------------------------------------------


def test_dsl_roundtrip():
    text = (
        "(bar (summarize (select (input) (cols Body_style Fuel_economy Origin)) "
        "(keys Body_style Origin) mean Fuel_economy) "
        ":x Origin :y Fuel_economy :subplot Body_style)"
    )
    p = parse_program(text)
    assert isinstance(p, prog.VisProgram)
    assert p.plot.kind == PlotKind.BAR
    assert parse_program(print_program(p)) == p


def test_dsl_parse_errors_have_positions():
    from vizsynth.dsltext import DslSyntaxError

    with pytest.raises(DslSyntaxError):
        parse_program("(select (input)")
    with pytest.raises(DslSyntaxError, match="unknown operator"):
        parse_program("(join (input) (input))")


# ---------------------------------------------------------------------------
# synthesize
# ---------------------------------------------------------------------------


def test_synthesize_with_spec_file(runner, tmp_path):
    out_dir = tmp_path / "vl"
    r = runner.invoke(
        cli,
        [
            "synthesize",
            "--data",
            CARS,
            "--spec-file",
            SPEC,
            "--k",
            "3",
            "--out",
            str(out_dir),
        ],
    )
    assert r.exit_code == 0, r.output
    doc = json.loads(r.output)
    assert doc["version"] == "v1"
    programs = doc["result"]["programs"]
    assert 0 < len(programs) <= 10
    assert programs[0]["program"]["plot"]["kind"] == "bar"
    assert (out_dir / "program_00.vl.json").exists()


def test_synthesize_query_or_specfile_exclusive(runner):
    from vizsynth.cli import main
    import sys

    r = runner.invoke(cli, ["synthesize", "--data", CARS])
    assert r.exit_code != 0


def test_synthesize_empty_spec_list_distinct_exit(tmp_path):
    import subprocess
    import sys

    empty = tmp_path / "empty.json"
    empty.write_text(json.dumps({"specs": []}))
    proc = subprocess.run(
        [
            sys.executable,
            "-c",
            "from vizsynth.cli import main; main()",
            "synthesize",
            "--data",
            CARS,
            "--spec-file",
            str(empty),
        ],
        capture_output=True,
        text=True,
    )
    # user error: exit code 1 with the required message
    assert proc.returncode == 1
    assert "no specifications" in proc.stderr


def test_cli_determinism_byte_identical(runner):
    args = ["synthesize", "--data", CARS, "--spec-file", SPEC, "--k", "2"]
    a = json.loads(runner.invoke(cli, args).output)
    b = json.loads(runner.invoke(cli, args).output)
    assert a["result"] == b["result"]


# ---------------------------------------------------------------------------
# typecheck / run
# ---------------------------------------------------------------------------


def test_typecheck_fig4_table(runner, tmp_path):
    f = tmp_path / "p.dsl"
    f.write_text(
        "(summarize (select (input) (cols Body_style Fuel_economy Origin)) "
        "(keys Body_style Origin) mean Fuel_economy)"
    )
    r = runner.invoke(cli, ["typecheck", "--data", CARS, "--program", str(f)])
    assert r.exit_code == 0, r.output
    assert "pi(v.Fuel_economy, mean)" in r.output


def test_typecheck_bar_continuous_x_names_premise(runner, tmp_path):
    f = tmp_path / "p.dsl"
    f.write_text("(bar (input) :x Fuel_economy :y Fuel_economy)")
    import subprocess
    import sys

    proc = subprocess.run(
        [
            sys.executable,
            "-c",
            "from vizsynth.cli import main; main()",
            "typecheck",
            "--data",
            CARS,
            "--program",
            str(f),
        ],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 1
    assert "x column" in proc.stderr


def test_run_input_echoes_csv(runner, tmp_path, cars_csv_text):
    f = tmp_path / "p.dsl"
    f.write_text("(input)")
    r = runner.invoke(cli, ["run", "--data", CARS, "--program", str(f)])
    assert r.exit_code == 0
    lines = [l for l in r.output.strip().splitlines() if l]
    assert lines[0].startswith("Model,Fuel_economy,Body_style,Origin")
    assert len(lines) == 31


def test_run_summarize(runner, tmp_path):
    f = tmp_path / "p.dsl"
    f.write_text("(summarize (input) (keys Origin) count Model)")
    r = runner.invoke(cli, ["run", "--data", CARS, "--program", str(f)])
    assert r.exit_code == 0
    assert r.output.splitlines()[0] == "Origin,Model"
    assert len(r.output.strip().splitlines()) == 4

"""Command-line entry points: synthesize, typecheck, run, serve.

Exit codes: 0 ok, 1 user error, 2 internal error.
"""

from __future__ import annotations

import csv
import io
import json
import sys
import time
from pathlib import Path
from typing import Optional

import click

from . import programs as prog
from .dsltext import DslSyntaxError, parse_program, print_program
from .engine import LemmaStore, SynthConfig, synthesize_session
from .engine.session import SessionResult
from .heuristics import heuristic_parse
from .rules import NoRuleError, plot_type_of, type_of, INPUT_TABLE_VAR
from .specs import SpecFileError, parse_spec_file
from .tables import Table, TableError, eval_transform, get_input_type, load_table
from .types import Scalar, TypeEnv, format_qualifier
from .vegalite import emit_vegalite, validate_vegalite


class UserError(Exception):
    pass


def result_to_json(result: SessionResult, tables: bool = True) -> dict:
    """Versioned result document; the deterministic core excludes timings."""
    programs = []
    for r in result.programs:
        entry = {
            "program": {
                "text": prog.format_vis(r.program),
                "dsl": print_program(r.program),
                "plot": {
                    "kind": r.program.plot.kind.value,
                    "x": r.program.plot.x,
                    "y": r.program.plot.y,
                    "color": r.program.plot.color,
                    "subplot": r.program.plot.subplot,
                },
            },
            "spec_rank": r.spec_rank,
            "score": r.score,
            "ast_size": r.ast_size,
        }
        if tables:
            entry["vega_lite"] = emit_vegalite(r.program, r.table_output)
        programs.append(entry)
    return {
        "version": "v1",
        "result": {
            "programs": programs,
            "counters": result.counters.as_dict(),
        },
        "timing": {
            "parse_ms": round(result.parse_ms, 3),
            "synth_ms": round(result.synth_ms, 3),
        },
    }


def _load_data(path: str) -> Table:
    try:
        return load_table(Path(path).read_bytes())
    except FileNotFoundError as e:
        raise UserError(f"cannot read {path}: {e}") from e
    except TableError as e:
        raise UserError(f"{path}: {e}") from e


def _config_from_options(k, max_results, ablation, enable_mutate, filter_cap, bins) -> SynthConfig:
    try:
        return SynthConfig(
            max_depth=k,
            max_results=max_results,
            ablation=ablation,
            enable_mutate=enable_mutate,
            filter_constant_cap=filter_cap,
            bin_counts=tuple(int(b) for b in bins.split(",")) if bins else (5, 10),
        )
    except ValueError as e:
        raise UserError(str(e)) from e


@click.group()
def cli() -> None:
    """Type-directed synthesis of visualizations."""


@cli.command()
@click.option("--data", required=True, help="input CSV file")
@click.option("--query", default=None, help="natural-language query")
@click.option("--spec-file", default=None, help="specification distribution JSON")
@click.option("--k", default=4, show_default=True, help="max synthesis depth")
@click.option("--max-results", default=10, show_default=True)
@click.option(
    "--ablation",
    type=click.Choice(["base-only", "syn-only", "table-only", "no-lemma"]),
    default=None,
)
@click.option("--enable-mutate", is_flag=True, default=False)
@click.option("--filter-cap", default=8, show_default=True)
@click.option("--bins", default="5,10", show_default=True, help="bin counts")
@click.option("--out", default=None, help="directory for per-program .vl.json files")
@click.option(
    "--seedless-determinism",
    is_flag=True,
    default=False,
    help="run twice and verify byte-identical results",
)
def synthesize(
    data, query, spec_file, k, max_results, ablation, enable_mutate, filter_cap, bins, out, seedless_determinism
) -> None:
    """Synthesize ranked visualization programs for a dataset."""
    if (query is None) == (spec_file is None):
        raise UserError("exactly one of --query or --spec-file is required")
    table = _load_data(data)
    cfg = _config_from_options(k, max_results, ablation, enable_mutate, filter_cap, bins)
    t0 = time.perf_counter()
    if query is not None:
        specs = heuristic_parse(query, table, max_specs=cfg.max_specs)
    else:
        try:
            specs, warnings = parse_spec_file(Path(spec_file).read_text(), table)
        except FileNotFoundError as e:
            raise UserError(str(e)) from e
        except SpecFileError as e:
            raise UserError(str(e)) from e
        for w in warnings:
            click.echo(f"warning: {w}", err=True)
    parse_ms = (time.perf_counter() - t0) * 1000.0
    if not specs:
        raise UserError("no specifications")
    result = synthesize_session(specs, table, cfg)
    result.parse_ms = parse_ms
    doc = result_to_json(result)
    if seedless_determinism:
        again = result_to_json(synthesize_session(specs, table, cfg))
        a = json.dumps(doc["result"], sort_keys=True)
        b = json.dumps(again["result"], sort_keys=True)
        if a != b:
            raise RuntimeError("determinism self-check failed")
    if out is not None:
        outdir = Path(out)
        outdir.mkdir(parents=True, exist_ok=True)
        for i, entry in enumerate(doc["result"]["programs"]):
            vl = entry["vega_lite"]
            validate_vegalite(vl)
            (outdir / f"program_{i:02d}.vl.json").write_text(
                json.dumps(vl, indent=2, sort_keys=True)
            )
    click.echo(json.dumps(doc, indent=2, sort_keys=True))


def _read_program(path: str):
    try:
        return parse_program(Path(path).read_text())
    except FileNotFoundError as e:
        raise UserError(str(e)) from e
    except DslSyntaxError as e:
        raise UserError(f"{path}: {e}") from e


@cli.command()
@click.option("--data", required=True)
@click.option("--program", "program_path", required=True, help="program file (s-expression syntax)")
def typecheck(data, program_path) -> None:
    """Infer and print the refinement type of a program over a dataset."""
    table = _load_data(data)
    p = _read_program(program_path)
    env = TypeEnv(((INPUT_TABLE_VAR, get_input_type(table)),))
    try:
        if isinstance(p, prog.VisProgram):
            ttype = type_of(p.table, env)
            ptype = plot_type_of(p.plot, ttype)
            click.echo(f"table: {ttype!r}")
            click.echo(f"plot:  {ptype!r}")
        else:
            ttype = type_of(p, env)
            click.echo(f"{ttype!r}")
    except NoRuleError as e:
        raise UserError(f"ill-typed: {e}") from e


@cli.command()
@click.option("--data", required=True)
@click.option("--program", "program_path", required=True)
def run(data, program_path) -> None:
    """Evaluate a table program and print the transformed table as CSV."""
    table = _load_data(data)
    p = _read_program(program_path)
    if isinstance(p, prog.VisProgram):
        p = p.table
    try:
        out = eval_transform(p, table)
    except TableError as e:
        raise UserError(str(e)) from e
    from .vegalite import _json_value

    writer = csv.writer(sys.stdout)
    writer.writerow(out.column_names())
    for row in out.rows:
        writer.writerow(["" if v is None else _json_value(v) for v in row])


@cli.command()
@click.option("--port", default=8571, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--data-dir", default=None, help="directory of CSVs to preload")
def serve(port, host, data_dir) -> None:
    """Run the HTTP service backing the web UI."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(data_dir), host=host, port=port, log_level="warning")


def main() -> None:
    try:
        cli.main(standalone_mode=False)
    except click.exceptions.Abort:
        sys.exit(1)
    except (click.ClickException, UserError) as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(1)
    except Exception as e:  # internal
        click.echo(f"internal error: {e}", err=True)
        sys.exit(2)


if __name__ == "__main__":
    main()

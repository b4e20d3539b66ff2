"""Command-line interface: ingest, build-kg, ask, bench, serve.

State persists in a workspace directory: the relational store lives in
``store.db`` and the knowledge graph in ``graph.cypher`` (the batch
script format), so separate invocations compose into one pipeline.

Exit codes: 0 success, 1 domain error, 2 usage error.
"""

from __future__ import annotations

import functools
import json
import sys
from pathlib import Path
from typing import Optional

import click

from ..agents import DatabaseTeam, KnowledgeGraphTeam
from ..bench.runner import default_kg_config, run_benchmark
from ..errors import DataFactoryError
from ..graphquery import emit_batch_script, read_batch_script
from ..ingest import clean_rows, generate_ddl, infer_schema, read_delimited
from ..kgbuild import SourceTable, build_graph, config_from_json
from ..kgbuild.suggest import suggest_config
from ..leader import FinalAnswer, LeaderConfig, Teams, run_session
from ..llm import HttpLlm, LlmPort, ReplayLlm
from ..memory import QaRecordStore
from ..relstore import RelStore

DEFAULT_WORKSPACE = ".datafactory"
STORE_FILE = "store.db"
GRAPH_FILE = "graph.cypher"


def _domain_errors(fn):
    """Map engine failures to exit code 1 with the message on stderr."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (DataFactoryError, OSError, ValueError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(1)

    return wrapper


def _workspace(path: str) -> Path:
    ws = Path(path)
    ws.mkdir(parents=True, exist_ok=True)
    return ws


def _open_store(ws: Path) -> RelStore:
    return RelStore(str(ws / STORE_FILE))


def _load_graph(ws: Path):
    graph_path = ws / GRAPH_FILE
    if not graph_path.exists():
        return None
    return read_batch_script(graph_path.read_text(encoding="utf-8"))


def _make_llm(replay: Optional[str]) -> LlmPort:
    if replay:
        return ReplayLlm.from_file(replay)
    return HttpLlm.from_env()


def _table_rows(store: RelStore, table: str) -> tuple[list[str], list[list]]:
    result = store.run_select(f"SELECT * FROM {table}")
    return result.columns, result.rows


@click.group()
def cli() -> None:
    """Table question answering over relational and graph views."""


@cli.command()
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.option("--name", default=None, help="Table name (default: file stem).")
@click.option("--workspace", default=DEFAULT_WORKSPACE, show_default=True)
@_domain_errors
def ingest(path: str, name: Optional[str], workspace: str) -> None:
    """Load a CSV/TSV file into the relational store."""
    ws = _workspace(workspace)
    raw = read_delimited(path, name)
    schema = infer_schema(raw)
    rows, quality = clean_rows(raw, schema)
    store = _open_store(ws)
    store.create_table(generate_ddl(schema))
    store.load_rows(schema.table_name, rows)
    click.echo(f"ingested {schema.table_name}: {len(rows)} rows, {len(schema.columns)} columns")
    for warning in quality.warnings:
        click.echo(f"warning: {warning}", err=True)


@cli.command("build-kg")
@click.option("--table", required=True, help="Ingested table to transform.")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--replay", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--workspace", default=DEFAULT_WORKSPACE, show_default=True)
@_domain_errors
def build_kg(table: str, config_path: Optional[str], replay: Optional[str], workspace: str) -> None:
    """Build the knowledge graph from an ingested table."""
    ws = _workspace(workspace)
    store = _open_store(ws)
    columns, rows = _table_rows(store, table)
    if config_path:
        schemas, rules = config_from_json(Path(config_path).read_text(encoding="utf-8"))
    else:
        try:
            llm = _make_llm(replay)
            schemas, rules = suggest_config(table, columns, rows[:5], llm)
        except DataFactoryError:
            schemas, rules = default_kg_config(table, columns)
            click.echo("note: no usable model suggestion; using the default config", err=True)
    source = SourceTable(name=table, columns=columns, rows=rows)
    graph = build_graph(source, schemas, rules)
    (ws / GRAPH_FILE).write_text(emit_batch_script(graph), encoding="utf-8")
    click.echo(
        f"built graph: {len(graph.entities)} entities, {len(graph.relationships)} relationships"
    )


@cli.command()
@click.option("--question", "--q", "question", required=True)
@click.option("--mode", type=click.Choice(["leader", "database", "knowledge_graph"]), default="leader", show_default=True)
@click.option("--replay", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--max-steps", default=20, show_default=True)
@click.option("--workspace", default=DEFAULT_WORKSPACE, show_default=True)
@_domain_errors
def ask(question: str, mode: str, replay: Optional[str], max_steps: int, workspace: str) -> None:
    """Answer a question over the ingested data."""
    ws = _workspace(workspace)
    store = _open_store(ws)
    if not store.tables():
        raise DataFactoryError("no tables ingested yet; run `datafactory ingest` first")
    graph = _load_graph(ws)
    llm = _make_llm(replay)

    if mode == "database":
        team = DatabaseTeam(store, QaRecordStore(), llm)
        result = team.run(question)
        click.echo(result.analysis)
        return
    if mode == "knowledge_graph":
        if graph is None:
            raise DataFactoryError("no knowledge graph; run `datafactory build-kg` first")
        team = KnowledgeGraphTeam(graph, QaRecordStore(), llm)
        result = team.run(question)
        click.echo(result.analysis)
        return

    teams = Teams(
        database=DatabaseTeam(store, QaRecordStore(), llm),
        knowledge_graph=KnowledgeGraphTeam(graph, QaRecordStore(), llm) if graph else None,
    )
    trace = run_session(question, teams, llm, config=LeaderConfig(max_steps=max_steps))
    click.echo(trace.final.text)
    if not isinstance(trace.final, FinalAnswer):
        sys.exit(1)


@cli.command()
@click.option("--dataset", type=click.Choice(["tabfact", "wikitq", "fetaqa"]), required=True)
@click.option("--path", "data_path", required=True, type=click.Path(exists=True))
@click.option("--limit", type=int, default=None)
@click.option("--replay", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@_domain_errors
def bench(dataset: str, data_path: str, limit: Optional[int], replay: Optional[str], out_path: str) -> None:
    """Run a benchmark and write the JSON report."""
    llm = _make_llm(replay)
    report = run_benchmark(dataset, data_path, llm, limit=limit)
    Path(out_path).write_text(json.dumps(report.to_dict(), indent=2), encoding="utf-8")
    click.echo(f"dataset={dataset} n={len(report.instances)} aggregate={report.aggregate}")


@cli.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8765, show_default=True)
@click.option("--replay", type=click.Path(exists=True, dir_okay=False), default=None)
@_domain_errors
def serve(host: str, port: int, replay: Optional[str]) -> None:
    """Start the HTTP gateway."""
    import uvicorn

    from .app import AppState, build_app

    state = AppState()
    if replay:
        state.llm = ReplayLlm.from_file(replay)
    uvicorn.run(build_app(state), host=host, port=port)


def main() -> None:
    cli(prog_name="datafactory")


if __name__ == "__main__":
    main()

"""FastAPI adapter: thin HTTP plumbing over the engine modules.

No domain logic lives here. Every endpoint validates its input, takes
the relevant lock, calls a module op, and serializes the result; the
whole behavior surface is testable without the server. Sessions run in
daemon threads and publish ordered trace events that the SSE endpoint
streams to clients as they land.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import asdict, dataclass, field
from itertools import count
from pathlib import Path
from typing import Iterator, Optional

from fastapi import FastAPI, Form, HTTPException, Request, UploadFile
from fastapi.responses import StreamingResponse

from ..agents import DatabaseTeam, KnowledgeGraphTeam, TeamResult, result_digest
from ..errors import (
    CypherSyntaxError,
    DataFactoryError,
    LlmUnavailable,
    NameCollision,
    UnsupportedFeature,
)
from ..graphquery import (
    eval_query,
    extract_subgraph,
    introspect,
    parse_cypher,
    render_schema,
)
from ..ingest import RawTable, clean_rows, generate_ddl, infer_schema, parse_delimited
from ..kgbuild import KnowledgeGraph, SourceTable, build_graph, config_from_json
from ..kgbuild.suggest import suggest_config
from ..leader import (
    ClarificationRequest,
    FinalAnswer,
    LeaderConfig,
    ReActStep,
    Teams,
    TimeoutAnswer,
    run_session,
)
from ..llm import HttpLlm, LlmPort
from ..memory import QaRecordStore
from ..relstore import RelStore

ASK_MODES = ("database", "knowledge_graph", "leader")
EVENT_KINDS = ("thought", "action", "observation", "final", "error", "chart", "subgraph")
DEFAULT_IDLE_TTL = 30 * 60.0
SUGGEST_SAMPLE_ROWS = 5


@dataclass
class TraceEvent:
    session_id: str
    seq: int
    kind: str
    payload: dict

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "seq": self.seq,
            "kind": self.kind,
            "payload": self.payload,
        }


class Session:
    """Ordered, thread-safe event log for one ask; seq starts at 1."""

    def __init__(self, session_id: str, mode: str, question: str):
        self.session_id = session_id
        self.mode = mode
        self.question = question
        self.events: list[TraceEvent] = []
        self.done = False
        self.final_kind: Optional[str] = None
        self.last_access = time.monotonic()
        self._cond = threading.Condition()

    def emit(self, kind: str, payload: dict) -> TraceEvent:
        if kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind {kind!r}")
        with self._cond:
            event = TraceEvent(self.session_id, len(self.events) + 1, kind, payload)
            self.events.append(event)
            self._cond.notify_all()
        return event

    def finish(self) -> None:
        with self._cond:
            self.done = True
            self._cond.notify_all()

    def stream(self, poll_timeout: float = 0.1) -> Iterator[TraceEvent]:
        index = 0
        while True:
            with self._cond:
                while index >= len(self.events) and not self.done:
                    self._cond.wait(timeout=poll_timeout)
                pending = self.events[index:]
                finished = self.done
            for event in pending:
                yield event
            index += len(pending)
            if finished and index >= len(self.events):
                return


@dataclass
class TableRecord:
    raw: RawTable
    table_name: str
    columns: list[str]
    rows: list[list]


@dataclass
class AppState:
    """Everything the service holds in memory; injectable for tests."""

    store: RelStore = field(default_factory=RelStore)
    tables: dict[str, TableRecord] = field(default_factory=dict)
    graph: Optional[KnowledgeGraph] = None
    llm: Optional[LlmPort] = None
    domain_knowledge: Optional[str] = None
    leader_config: LeaderConfig = field(default_factory=LeaderConfig)
    idle_ttl: float = DEFAULT_IDLE_TTL
    sessions: dict[str, Session] = field(default_factory=dict)
    mem_sql: QaRecordStore = field(default_factory=QaRecordStore)
    mem_cypher: QaRecordStore = field(default_factory=QaRecordStore)
    write_lock: threading.Lock = field(default_factory=threading.Lock)
    _ids: Iterator[int] = field(default_factory=lambda: count(1))

    def ensure_llm(self) -> LlmPort:
        if self.llm is None:
            self.llm = HttpLlm.from_env()
        return self.llm

    def new_session(self, mode: str, question: str) -> Session:
        session = Session(f"s-{next(self._ids):04d}", mode, question)
        self.sessions[session.session_id] = session
        return session

    def evict_idle(self, now: Optional[float] = None) -> int:
        """Drop finished sessions idle past the TTL; returns eviction count."""
        now = time.monotonic() if now is None else now
        stale = [
            sid
            for sid, sess in self.sessions.items()
            if sess.done and now - sess.last_access > self.idle_ttl
        ]
        for sid in stale:
            del self.sessions[sid]
        return len(stale)


def _ingest_raw(state: AppState, raw: RawTable) -> dict:
    schema = infer_schema(raw)
    if schema.table_name in state.tables:
        raise NameCollision(f"table {schema.table_name!r} already ingested")
    rows, quality = clean_rows(raw, schema)
    state.store.create_table(generate_ddl(schema))
    state.store.load_rows(schema.table_name, rows)
    state.tables[schema.table_name] = TableRecord(
        raw=raw, table_name=schema.table_name, columns=schema.column_names(), rows=rows
    )
    return {
        "table": schema.table_name,
        "columns": schema.column_names(),
        "rows": len(rows),
        "dropped_rows": quality.dropped_rows,
        "warnings": quality.warnings,
    }


def _default_config(record: TableRecord):
    from ..bench.runner import default_kg_config

    return default_kg_config(record.table_name, record.columns)


def _build_kg(state: AppState, table: str, config_json: Optional[dict]) -> dict:
    record = state.tables.get(table)
    if record is None:
        raise HTTPException(status_code=404, detail=f"unknown table {table!r}")
    if config_json is not None:
        try:
            schemas, rules = config_from_json(json.dumps(config_json))
        except (ValueError, KeyError) as exc:
            raise HTTPException(status_code=422, detail=f"bad config: {exc}")
    else:
        try:
            schemas, rules = suggest_config(
                record.table_name,
                record.columns,
                record.rows[:SUGGEST_SAMPLE_ROWS],
                state.ensure_llm(),
                domain_knowledge=state.domain_knowledge,
            )
        except DataFactoryError:
            schemas, rules = _default_config(record)
    source = SourceTable(name=record.table_name, columns=record.columns, rows=record.rows)
    state.graph = build_graph(source, schemas, rules)
    return {
        "table": table,
        "entities": len(state.graph.entities),
        "relationships": len(state.graph.relationships),
        "entity_types": sorted(state.graph.entity_types()),
        "rel_types": sorted(state.graph.rel_types()),
    }


def _emit_team_artifacts(session: Session, graph: Optional[KnowledgeGraph], result: TeamResult) -> None:
    if result.chart is not None:
        session.emit(
            "chart",
            {
                "spec": asdict(result.chart),
                "columns": result.result.columns,
                "rows": result.result.rows,
            },
        )
    if graph is not None and result.bound_ids:
        view = extract_subgraph(graph, result.bound_ids, radius=1)
        session.emit("subgraph", view.to_dict())


class _RecordingTeam:
    """Pass-through wrapper capturing each TeamResult for artifact events."""

    def __init__(self, team, results: list[TeamResult]):
        self._team = team
        self._results = results
        self.name = team.name

    def run(self, question: str) -> TeamResult:
        result = self._team.run(question)
        self._results.append((self.name, result))
        return result


def _final_name(final) -> str:
    if isinstance(final, FinalAnswer):
        return "final"
    if isinstance(final, TimeoutAnswer):
        return "timeout"
    if isinstance(final, ClarificationRequest):
        return "clarification"
    return "unknown"


def _session_worker(state: AppState, session: Session, question: str, llm: LlmPort) -> None:
    try:
        if session.mode == "leader":
            results: list[tuple[str, TeamResult]] = []
            teams = Teams(
                database=_RecordingTeam(
                    DatabaseTeam(state.store, state.mem_sql, llm, state.domain_knowledge),
                    results,
                )
                if state.tables
                else None,
                knowledge_graph=_RecordingTeam(
                    KnowledgeGraphTeam(state.graph, state.mem_cypher, llm, state.domain_knowledge),
                    results,
                )
                if state.graph is not None
                else None,
            )

            def on_step(step: ReActStep) -> None:
                if step.action == "final_answer":
                    return
                if step.thought:
                    session.emit("thought", {"text": step.thought})
                session.emit("action", {"action": step.action, "input": step.action_input})
                if step.observation is not None:
                    session.emit("observation", {"text": step.observation})

            trace = run_session(
                question, teams, llm, config=state.leader_config, on_step=on_step
            )
            for name, result in results[-1:]:
                _emit_team_artifacts(session, state.graph if name == "knowledge_graph_team" else None, result)
            session.final_kind = _final_name(trace.final)
            session.emit(
                "final",
                {
                    "answer": trace.final.text,
                    "final_kind": session.final_kind,
                    "steps": len(trace.steps),
                    "team_call_counts": trace.team_call_counts,
                    "usage": {
                        "input_tokens": trace.usage.input_tokens,
                        "output_tokens": trace.usage.output_tokens,
                    },
                },
            )
        else:
            if session.mode == "database":
                team = DatabaseTeam(state.store, state.mem_sql, llm, state.domain_knowledge)
            else:
                team = KnowledgeGraphTeam(state.graph, state.mem_cypher, llm, state.domain_knowledge)
            session.emit("action", {"action": team.name, "input": question})
            result = team.run(question)
            session.emit(
                "observation",
                {"text": f"{result.analysis}\nresult: {result_digest(result.result)}"},
            )
            _emit_team_artifacts(
                session, state.graph if session.mode == "knowledge_graph" else None, result
            )
            session.final_kind = "final"
            session.emit(
                "final",
                {"answer": result.analysis, "final_kind": "final", "query": result.query},
            )
    except DataFactoryError as exc:
        session.emit("error", {"type": type(exc).__name__, "message": str(exc)})
    except Exception as exc:  # defensive: a worker must never die silently
        session.emit("error", {"type": type(exc).__name__, "message": str(exc)})
    finally:
        session.finish()


def build_app(state: Optional[AppState] = None) -> FastAPI:
    state = state or AppState()
    app = FastAPI(title="datafactory", version="0.1.0")
    app.state.engine = state

    def _http_domain_error(exc: DataFactoryError, status: int = 422) -> HTTPException:
        return HTTPException(status_code=status, detail=f"{type(exc).__name__}: {exc}")

    @app.post("/tables")
    async def post_tables(file: UploadFile, name: Optional[str] = Form(default=None)):
        payload = (await file.read()).decode("utf-8")
        filename = file.filename or "table.csv"
        delimiter = "\t" if filename.lower().endswith((".tsv", ".tab")) else ","
        table_name = name or Path(filename).stem
        with state.write_lock:
            try:
                raw = parse_delimited(payload, table_name, delimiter)
                return _ingest_raw(state, raw)
            except NameCollision as exc:
                raise _http_domain_error(exc, status=409)
            except DataFactoryError as exc:
                raise _http_domain_error(exc)

    @app.post("/kg/build")
    async def post_kg_build(request: Request):
        body = await request.json()
        table = body.get("table")
        if not table:
            raise HTTPException(status_code=422, detail="missing 'table'")
        with state.write_lock:
            try:
                return _build_kg(state, table, body.get("config"))
            except LlmUnavailable as exc:
                raise _http_domain_error(exc, status=503)
            except DataFactoryError as exc:
                raise _http_domain_error(exc)

    @app.post("/ask")
    async def post_ask(request: Request):
        body = await request.json()
        question = (body.get("question") or "").strip()
        mode = body.get("mode", "leader")
        if not question:
            raise HTTPException(status_code=422, detail="question must be non-empty")
        if mode not in ASK_MODES:
            raise HTTPException(status_code=422, detail=f"mode must be one of {ASK_MODES}")
        if not state.tables:
            raise HTTPException(status_code=409, detail="no data loaded; ingest a table first")
        if mode == "knowledge_graph" and state.graph is None:
            raise HTTPException(status_code=409, detail="knowledge graph not built yet")
        try:
            llm = state.ensure_llm()
        except LlmUnavailable as exc:
            raise _http_domain_error(exc, status=503)

        prior_id = body.get("session_id")
        if prior_id:
            prior = state.sessions.get(prior_id)
            if prior is None:
                raise HTTPException(status_code=404, detail=f"unknown session {prior_id!r}")
            if prior.final_kind == "clarification":
                question = f"{prior.question}\n(Clarification provided: {question})"

        state.evict_idle()
        session = state.new_session(mode, question)
        threading.Thread(
            target=_session_worker, args=(state, session, question, llm), daemon=True
        ).start()
        return {"session_id": session.session_id}

    @app.get("/sessions/{session_id}/events")
    def get_events(session_id: str):
        session = state.sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        session.last_access = time.monotonic()

        def sse() -> Iterator[str]:
            for event in session.stream():
                data = json.dumps(event.to_dict(), ensure_ascii=False)
                yield f"id: {event.seq}\nevent: {event.kind}\ndata: {data}\n\n"

        return StreamingResponse(sse(), media_type="text/event-stream")

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        session = state.sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        session.last_access = time.monotonic()
        return {
            "session_id": session.session_id,
            "mode": session.mode,
            "done": session.done,
            "events": [e.to_dict() for e in session.events],
        }

    @app.get("/graph/schema")
    def get_graph_schema():
        if state.graph is None:
            raise HTTPException(status_code=409, detail="knowledge graph not built yet")
        schema = introspect(state.graph)
        return {
            "labels": sorted(schema.labels),
            "rel_types": sorted(schema.rel_types),
            "property_keys": {k: sorted(v) for k, v in sorted(schema.property_keys.items())},
            "text": render_schema(schema),
        }

    @app.post("/graph/query")
    async def post_graph_query(request: Request):
        if state.graph is None:
            raise HTTPException(status_code=409, detail="knowledge graph not built yet")
        body = await request.json()
        cypher = (body.get("cypher") or "").strip()
        if not cypher:
            raise HTTPException(status_code=422, detail="missing 'cypher'")
        try:
            result = eval_query(state.graph, parse_cypher(cypher))
        except (CypherSyntaxError, UnsupportedFeature) as exc:
            raise _http_domain_error(exc)
        return {"columns": result.columns, "rows": result.rows}

    @app.get("/graph/subgraph")
    def get_graph_subgraph(ids: str = "", radius: int = 1):
        if state.graph is None:
            raise HTTPException(status_code=409, detail="knowledge graph not built yet")
        bound = [part.strip() for part in ids.split(",") if part.strip()]
        view = extract_subgraph(state.graph, bound, radius=radius)
        return view.to_dict()

    return app

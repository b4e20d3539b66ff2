"""Database-team and KG-team agents.

Both teams share the same shape: assemble a prompt context (schema,
few-shot demonstrations from memory, optional domain knowledge),
generate a query with one repair round against the real engine, execute,
and analyze. Successful generations feed the memory store, so the teams
get better demonstrations as a session progresses.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from .errors import DataFactoryError, GenerationFailed
from .graphquery import eval_query, introspect, parse_cypher, render_schema
from .kgbuild.graph import KnowledgeGraph
from .llm import ChatRequest, LlmPort, Message
from .memory import QaRecordStore, make_record
from .prompts import load_prompt, render
from .relstore import RelStore, ResultTable
from .textutil import extract_fenced

DEFAULT_SHOT_K = 3
ANALYSIS_ROW_CAP = 50
REPAIR_BUDGET = 1

CHART_KINDS = ("bar", "line", "pie", "scatter")


@dataclass
class PromptContext:
    question: str
    schema_text: str
    domain_knowledge: Optional[str] = None
    shots: list[tuple[str, str]] = field(default_factory=list)


@dataclass
class ChartSpec:
    kind: str
    x: str
    y: str
    title: str = ""
    series: Optional[str] = None


def assemble_context(
    question: str,
    kind: str,
    store: Optional[RelStore],
    graph: Optional[KnowledgeGraph],
    mem: QaRecordStore,
    domain_knowledge: Optional[str] = None,
    k: int = DEFAULT_SHOT_K,
) -> PromptContext:
    """Schema text plus up to k demonstrations retrieved from memory."""
    if kind == "sql":
        assert store is not None
        schema_text = "\n\n".join(store.schema_ddl())
    else:
        assert graph is not None
        schema_text = render_schema(introspect(graph))
    shots = []
    if len(mem.records(kind)) > 0:
        shots = [(r.question, r.query_text) for r in mem.retrieve_similar(question, kind, k)]
    return PromptContext(question, schema_text, domain_knowledge, shots)


def _render_shots(ctx: PromptContext) -> str:
    if not ctx.shots:
        return ""
    blocks = []
    for shot_q, shot_query in ctx.shots:
        blocks.append(f"Example question: {shot_q}\nExample query: {shot_query}")
    return "\n\n".join(blocks) + "\n\n"


def _generation_prompt(template_name: str, ctx: PromptContext) -> str:
    return render(
        load_prompt(template_name),
        question=ctx.question,
        schema=ctx.schema_text,
        domain_knowledge=ctx.domain_knowledge or "none provided",
        shots=_render_shots(ctx),
    )


def _generate(
    template_name: str,
    fence_langs: tuple[str, ...],
    ctx: PromptContext,
    llm: LlmPort,
    validate,
    record,
) -> str:
    """Shared generate-validate-repair loop (one repair round)."""
    messages = [Message("user", _generation_prompt(template_name, ctx))]
    last_error: Optional[Exception] = None
    for _ in range(REPAIR_BUDGET + 1):
        response = llm.complete(ChatRequest(messages=list(messages)))
        query = extract_fenced(response.text, fence_langs)
        if query is None:
            last_error = GenerationFailed("response contains no fenced query block")
            feedback = "The reply had no fenced query block. Answer with only the query in a fenced block."
        else:
            try:
                summary = validate(query)
            except DataFactoryError as exc:
                last_error = exc
                feedback = f"The query failed: {exc}. Fix it and answer with only the corrected query in a fenced block."
            else:
                record(query, summary)
                return query
        messages = messages + [Message("assistant", response.text), Message("user", feedback)]
    raise GenerationFailed(f"repair budget exhausted: {last_error}") from last_error


def result_digest(result: ResultTable, limit: int = 3) -> str:
    """Compact one-line description of a result for observations."""
    n = len(result.rows)
    head = "; ".join(
        "(" + ", ".join("null" if v is None else str(v) for v in row) + ")"
        for row in result.rows[:limit]
    )
    cols = ", ".join(result.columns)
    text = f"{n} row{'s' if n != 1 else ''} [{cols}]"
    return f"{text}: {head}" if head else text


def generate_sql(
    ctx: PromptContext, llm: LlmPort, store: RelStore, mem: Optional[QaRecordStore] = None
) -> str:
    """Text-to-SQL with a dry run against the store as the validator."""

    def validate(sql: str) -> str:
        return result_digest(store.run_select(sql))

    def record(sql: str, summary: str) -> None:
        if mem is not None:
            mem.record_qa(make_record(ctx.question, sql, "sql", summary, dim=mem.dim))

    return _generate("text2sql", ("sql",), ctx, llm, validate, record)


def generate_cypher(
    ctx: PromptContext, llm: LlmPort, graph: KnowledgeGraph, mem: Optional[QaRecordStore] = None
) -> str:
    """Text-to-Cypher validated by parsing and a dry evaluation."""

    def validate(query: str) -> str:
        ast = parse_cypher(query)
        return result_digest(eval_query(graph, ast))

    def record(query: str, summary: str) -> None:
        if mem is not None:
            mem.record_qa(make_record(ctx.question, query, "cypher", summary, dim=mem.dim))

    return _generate("text2cypher", ("cypher",), ctx, llm, validate, record)


def _serialize_result(result: ResultTable, row_cap: int) -> tuple[str, str]:
    if not result.rows:
        directive = "The result set is empty: say explicitly that no matching data was found."
        return "(no rows)", directive
    lines = [" | ".join(result.columns)]
    for row in result.rows[:row_cap]:
        lines.append(" | ".join("null" if v is None else str(v) for v in row))
    if len(result.rows) > row_cap:
        lines.append(f"... truncated, {len(result.rows) - row_cap} more rows omitted")
    return "\n".join(lines), ""


def analyze_result(
    question: str,
    result: ResultTable,
    llm: LlmPort,
    query: str = "",
    row_cap: int = ANALYSIS_ROW_CAP,
) -> str:
    """Ask the model to explain a result; returns its text verbatim."""
    serialized, directive = _serialize_result(result, row_cap)
    prompt = render(
        load_prompt("analysis"),
        question=question,
        query=query or "(not recorded)",
        result=serialized,
        directive=directive,
    )
    return llm.complete(ChatRequest(messages=[Message("user", prompt)])).text


def parse_chart_spec(text: str, columns: list[str]) -> Optional[ChartSpec]:
    """Parse and validate a proposed chart spec; anything off → None."""
    body = extract_fenced(text, ("json",))
    if body is None:
        stripped = text.strip()
        if not stripped.startswith("{"):
            return None
        body = stripped
    try:
        doc = json.loads(body)
    except json.JSONDecodeError:
        return None
    if not isinstance(doc, dict):
        return None
    kind = doc.get("kind")
    x, y = doc.get("x"), doc.get("y")
    series = doc.get("series")
    if kind not in CHART_KINDS or x not in columns or y not in columns:
        return None
    if series is not None and series not in columns:
        return None
    return ChartSpec(kind=kind, x=x, y=y, title=str(doc.get("title") or ""), series=series)


def make_chart_spec(
    question: str, result: ResultTable, llm: LlmPort
) -> Optional[ChartSpec]:
    """Best-effort chart proposal; every failure path degrades to None."""
    if not result.rows or len(result.columns) < 2:
        return None
    preview_lines = [" | ".join("null" if v is None else str(v) for v in row) for row in result.rows[:5]]
    prompt = render(
        load_prompt("chart"),
        question=question,
        columns=", ".join(result.columns),
        preview="\n".join(preview_lines),
    )
    try:
        response = llm.complete(ChatRequest(messages=[Message("user", prompt)]))
    except DataFactoryError:
        return None
    return parse_chart_spec(response.text, result.columns)


@dataclass
class TeamResult:
    query: str
    result: ResultTable
    analysis: str
    chart: Optional[ChartSpec] = None
    bound_ids: list[str] = field(default_factory=list)


class DatabaseTeam:
    """Text-to-SQL pipeline over the relational store."""

    name = "database_team"
    kind = "sql"

    def __init__(
        self,
        store: RelStore,
        mem: QaRecordStore,
        llm: LlmPort,
        domain_knowledge: Optional[str] = None,
        shot_k: int = DEFAULT_SHOT_K,
    ) -> None:
        self.store = store
        self.mem = mem
        self.llm = llm
        self.domain_knowledge = domain_knowledge
        self.shot_k = shot_k

    def run(self, question: str) -> TeamResult:
        ctx = assemble_context(
            question, "sql", self.store, None, self.mem, self.domain_knowledge, self.shot_k
        )
        sql = generate_sql(ctx, self.llm, self.store, self.mem)
        result = self.store.run_select(sql)
        analysis = analyze_result(question, result, self.llm, query=sql)
        chart = make_chart_spec(question, result, self.llm)
        return TeamResult(query=sql, result=result, analysis=analysis, chart=chart)


class KnowledgeGraphTeam:
    """Text-to-Cypher pipeline over the knowledge graph."""

    name = "knowledge_graph_team"
    kind = "cypher"

    def __init__(
        self,
        graph: KnowledgeGraph,
        mem: QaRecordStore,
        llm: LlmPort,
        domain_knowledge: Optional[str] = None,
        shot_k: int = DEFAULT_SHOT_K,
    ) -> None:
        self.graph = graph
        self.mem = mem
        self.llm = llm
        self.domain_knowledge = domain_knowledge
        self.shot_k = shot_k

    def run(self, question: str) -> TeamResult:
        ctx = assemble_context(
            question, "cypher", None, self.graph, self.mem, self.domain_knowledge, self.shot_k
        )
        query = generate_cypher(ctx, self.llm, self.graph, self.mem)
        result = eval_query(self.graph, parse_cypher(query))
        analysis = analyze_result(question, result, self.llm, query=query)
        bound = [
            v
            for row in result.rows
            for v in row
            if isinstance(v, str) and v in self.graph.entities
        ]
        seen: set[str] = set()
        unique_bound = [v for v in bound if not (v in seen or seen.add(v))]
        return TeamResult(query=query, result=result, analysis=analysis, bound_ids=unique_bound)

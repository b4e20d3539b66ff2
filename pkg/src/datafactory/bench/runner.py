"""Benchmark runner: ingest, build the graph, run sessions, score.

One instance failing never aborts the run; it is scored 0 and flagged
in the report so aggregate numbers stay recomputable from the rows.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

from ..agents import DatabaseTeam, KnowledgeGraphTeam
from ..ingest import clean_rows, generate_ddl, infer_schema
from ..kgbuild import EntitySchema, RelationshipRule, SourceTable, build_graph
from ..leader import LeaderConfig, FinalAnswer, Teams, run_session
from ..llm import LlmPort, Usage
from ..memory import QaRecordStore
from ..relstore import RelStore
from .datasets import BenchInstance, load_dataset
from .metrics import exact_match, rouge_score
from .stats import collect_stats

ENTAILED_TOKENS = frozenset({"entailed", "true", "yes"})
REFUTED_TOKENS = frozenset({"refuted", "false", "no"})

KgConfig = tuple[list[EntitySchema], list[RelationshipRule]]
KgConfigProvider = Callable[[BenchInstance], KgConfig]


def parse_tabfact_answer(text: str) -> Optional[str]:
    """First entailment verdict found in the answer, scanning left to right."""
    for token in re.findall(r"[a-z]+", text.lower()):
        if token in ENTAILED_TOKENS:
            return "entailed"
        if token in REFUTED_TOKENS:
            return "refuted"
    return None


def default_kg_config(table_name: str, columns: list[str]) -> KgConfig:
    """Canned single-entity config: first column as id, the rest as attrs."""
    if not columns:
        raise ValueError("table has no columns")
    schema = EntitySchema(
        entity_type="row",
        id_columns=[columns[0]],
        attr_columns=list(columns),
        namespace=table_name,
    )
    return [schema], []


@dataclass
class InstanceResult:
    instance_id: str
    question: str
    gold: object
    prediction: str
    score: float
    detail: dict = field(default_factory=dict)
    failed: bool = False
    error: Optional[str] = None
    steps: int = 0
    team_call_counts: dict = field(default_factory=dict)
    usage: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "instance_id": self.instance_id,
            "question": self.question,
            "gold": self.gold,
            "prediction": self.prediction,
            "score": self.score,
            "detail": self.detail,
            "failed": self.failed,
            "error": self.error,
            "steps": self.steps,
            "team_call_counts": self.team_call_counts,
            "usage": self.usage,
        }


@dataclass
class RunReport:
    method: str
    dataset: str
    instances: list[InstanceResult] = field(default_factory=list)
    aggregate: dict = field(default_factory=dict)
    usage: dict = field(default_factory=dict)
    invocation: dict = field(default_factory=dict)
    bins: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "dataset": self.dataset,
            "n_instances": len(self.instances),
            "aggregate": self.aggregate,
            "usage": self.usage,
            "invocation": self.invocation,
            "bins": self.bins,
            "instances": [r.to_dict() for r in self.instances],
        }


def _usage_dict(usage: Usage) -> dict:
    return {
        "input_tokens": usage.input_tokens,
        "output_tokens": usage.output_tokens,
        "total_tokens": usage.total,
    }


def score_prediction(dataset: str, prediction: str, gold) -> tuple[float, dict]:
    """Primary score plus metric detail for one prediction."""
    if dataset == "tabfact":
        verdict = parse_tabfact_answer(prediction)
        correct = verdict == gold
        return (1.0 if correct else 0.0), {"verdict": verdict}
    if dataset == "wikitq":
        correct = exact_match(prediction, gold)
        return (1.0 if correct else 0.0), {}
    rouge = {
        "rouge1": rouge_score(prediction, gold, 1),
        "rouge2": rouge_score(prediction, gold, 2),
        "rougeL": rouge_score(prediction, gold, "L"),
    }
    return rouge["rougeL"], {"rouge": rouge}


def _run_instance(
    instance: BenchInstance,
    llm: LlmPort,
    kg_config: Optional[KgConfigProvider],
    leader_config: Optional[LeaderConfig],
    created_at: Optional[str],
) -> tuple[InstanceResult, object]:
    store = RelStore()
    schema = infer_schema(instance.table)
    rows, _quality = clean_rows(instance.table, schema)
    store.create_table(generate_ddl(schema))
    store.load_rows(schema.table_name, rows)

    source = SourceTable(name=schema.table_name, columns=schema.column_names(), rows=rows)
    schemas, rules = (
        kg_config(instance)
        if kg_config is not None
        else default_kg_config(schema.table_name, schema.column_names())
    )
    graph = build_graph(source, schemas, rules, created_at=created_at)

    teams = Teams(
        database=DatabaseTeam(store, QaRecordStore(), llm),
        knowledge_graph=KnowledgeGraphTeam(graph, QaRecordStore(), llm),
    )
    trace = run_session(instance.question, teams, llm, config=leader_config)
    prediction = trace.final.text if trace.final is not None else ""
    score, detail = score_prediction(instance.dataset, prediction, instance.gold)
    result = InstanceResult(
        instance_id=instance.instance_id,
        question=instance.question,
        gold=instance.gold,
        prediction=prediction,
        score=score,
        detail=detail,
        failed=not isinstance(trace.final, FinalAnswer),
        error=None if isinstance(trace.final, FinalAnswer) else type(trace.final).__name__,
        steps=len(trace.steps),
        team_call_counts=dict(trace.team_call_counts),
        usage=_usage_dict(trace.usage),
    )
    return result, trace


@dataclass
class _FailedTrace:
    team_call_counts: dict = field(default_factory=lambda: {"database_team": 0, "knowledge_graph_team": 0})


def run_benchmark(
    kind: str,
    path: str | Path,
    llm: LlmPort,
    limit: Optional[int] = None,
    kg_config: Optional[KgConfigProvider] = None,
    leader_config: Optional[LeaderConfig] = None,
    created_at: Optional[str] = None,
    method: str = "datafactory",
) -> RunReport:
    """Run every instance, score it, and aggregate the report."""
    instances = load_dataset(kind, path, limit=limit)
    report = RunReport(method=method, dataset=kind)
    traces = []
    correctness: list[bool] = []

    for instance in instances:
        try:
            result, trace = _run_instance(instance, llm, kg_config, leader_config, created_at)
        except Exception as exc:  # per-instance isolation, never abort the run
            result = InstanceResult(
                instance_id=instance.instance_id,
                question=instance.question,
                gold=instance.gold,
                prediction="",
                score=0.0,
                failed=True,
                error=f"{type(exc).__name__}: {exc}",
            )
            trace = _FailedTrace()
        report.instances.append(result)
        traces.append(trace)
        correctness.append(result.score >= 1.0)

    n = len(report.instances)
    scores = [r.score for r in report.instances]
    report.aggregate = {"n": n, "score_mean": (sum(scores) / n) if n else 0.0}
    if kind in ("tabfact", "wikitq"):
        report.aggregate["accuracy"] = report.aggregate["score_mean"]
    else:
        for key in ("rouge1", "rouge2", "rougeL"):
            values = [r.detail.get("rouge", {}).get(key, 0.0) for r in report.instances]
            report.aggregate[key] = (sum(values) / n) if n else 0.0
    report.aggregate["failed"] = sum(1 for r in report.instances if r.failed)

    totals = {"input_tokens": 0, "output_tokens": 0, "total_tokens": 0}
    for r in report.instances:
        for key in totals:
            totals[key] += r.usage.get(key, 0)
    report.usage = dict(totals)
    report.usage["avg_total_tokens"] = (totals["total_tokens"] / n) if n else 0.0

    stats = collect_stats(traces, correctness)
    report.invocation = stats.invocation
    report.bins = stats.bins
    return report

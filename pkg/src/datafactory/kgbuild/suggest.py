"""LLM-driven strategy generation: propose a build config for a table.

The model sees the table schema and a few sample rows and answers with a
fenced JSON config document. A suggestion that fails to parse or fails
validation earns exactly one retry with the error fed back; a second
failure raises.
"""

from __future__ import annotations

import json
from typing import Any, Optional, Sequence

from ..errors import InvalidSuggestion, UnparseableSuggestion
from ..llm import ChatRequest, LlmPort, Message
from ..prompts import load_prompt, render
from ..textutil import extract_fenced
from .config import EntitySchema, RelationshipRule, config_from_json, validate_config

SAMPLE_ROW_LIMIT = 5


def _render_rows(columns: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    lines = [" | ".join(columns)]
    for row in rows[:SAMPLE_ROW_LIMIT]:
        lines.append(" | ".join("" if v is None else str(v) for v in row))
    return "\n".join(lines)


def _parse_suggestion(text: str) -> tuple[list[EntitySchema], list[RelationshipRule]]:
    body = extract_fenced(text, ("json",))
    if body is None:
        body = text.strip()
    if not body:
        raise UnparseableSuggestion("suggestion contains no config document")
    try:
        return config_from_json(body)
    except (ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
        raise UnparseableSuggestion(f"config document does not parse: {exc}") from exc


def suggest_config(
    table_name: str,
    columns: Sequence[str],
    sample_rows: Sequence[Sequence[Any]],
    llm: LlmPort,
    domain_knowledge: Optional[str] = None,
) -> tuple[list[EntitySchema], list[RelationshipRule]]:
    """Ask the model for an (entities, relationships) config for the table."""
    prompt = render(
        load_prompt("kg_strategy"),
        table_name=table_name,
        columns=", ".join(columns),
        samples=_render_rows(columns, sample_rows),
        domain_knowledge=domain_knowledge or "none provided",
    )
    messages = [
        Message("system", load_prompt("kg_strategy_system")),
        Message("user", prompt),
    ]

    last_error: Exception = UnparseableSuggestion("no suggestion produced")
    for attempt in range(2):
        response = llm.complete(ChatRequest(messages=list(messages)))
        try:
            schemas, rules = _parse_suggestion(response.text)
        except UnparseableSuggestion as exc:
            last_error = exc
            messages = messages + [
                Message("assistant", response.text),
                Message("user", f"That reply was not usable: {exc}. Answer again with only a fenced JSON config."),
            ]
            continue
        report = validate_config(schemas, rules, columns)
        if report.ok:
            return schemas, rules
        details = "; ".join(i.message for i in report.errors())
        last_error = InvalidSuggestion(f"suggested config fails validation: {details}")
        messages = messages + [
            Message("assistant", response.text),
            Message("user", f"The config is invalid: {details}. Fix these problems and answer with only a fenced JSON config."),
        ]
    raise last_error

"""Deterministic table-to-graph transformation.

Rows become typed entities according to entity schemas (optionally
splitting multi-value cells), entities with equal ids merge, and
relationship rules connect entity pairs either within a row or across
rows sharing group-column values. Given identical inputs, including the
``created_at`` stamp, the output graph is identical; the wall clock is
treated as an input, not ambient state.
"""

from __future__ import annotations

import datetime as _dt
import re
from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Sequence

import numpy as np

from .. import kernels
from ..errors import ConfigInvalid, IdMismatch, MissingIdValue, UnknownAttribute
from .config import (
    And,
    AttrCompare,
    EntitySchema,
    Or,
    RelationshipRule,
    RuleExpr,
    Similarity,
    validate_config,
)
from .graph import Entity, KnowledgeGraph, Provenance, Relationship

Embedder = Callable[[str], np.ndarray]

CellMap = dict[str, Any]


@dataclass
class SourceTable:
    """Cleaned tabular input for a build: column names plus typed rows."""

    name: str
    columns: list[str]
    rows: list[list[Any]] = field(default_factory=list)

    def cell_maps(self) -> list[CellMap]:
        return [dict(zip(self.columns, row)) for row in self.rows]


def _default_embed() -> Embedder:
    from ..memory import embed

    return embed


def _cell_str(value: Any) -> str:
    """Render a cell for use inside an entity id.

    Strings are trimmed, booleans lowercase, numbers use their canonical
    repr. None and empty strings have no identity and raise.
    """
    if value is None:
        raise MissingIdValue("id value is null")
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        text = value.strip()
        if not text:
            raise MissingIdValue("id value is empty")
        return text
    return repr(value) if isinstance(value, float) else str(value)


def compose_id(entity_type: str, values: Sequence[Any], namespace: Optional[str] = None) -> str:
    """Compose the stable id: [namespace:]type:value[:value...]."""
    if not values:
        raise MissingIdValue(f"no id values for entity type {entity_type!r}")
    parts = [namespace] if namespace else []
    parts.append(entity_type)
    parts.extend(_cell_str(v) for v in values)
    return ":".join(parts)


def make_entity_id(row: CellMap, schema: EntitySchema) -> str:
    """Identifier for the entity a schema extracts from a row.

    Split schemas have no single row-level id; use compose_id with the
    part value instead.
    """
    if schema.split is not None:
        raise MissingIdValue("split schemas derive ids from cell parts, not rows")
    values = [row.get(col) for col in schema.id_columns]
    return compose_id(schema.entity_type, values, schema.namespace)


def split_cell(value: str, delimiters: Sequence[str]) -> list[str]:
    """Split a multi-value cell on any delimiter, trimming parts.

    Empty parts vanish; order and duplicates are preserved.
    """
    pattern = "|".join(re.escape(d) for d in delimiters)
    parts = re.split(pattern, value) if pattern else [value]
    return [p.strip() for p in parts if p.strip()]


@dataclass(frozen=True)
class MetaInfo:
    source_table: str
    row_index: int
    created_at: str


def assemble_attributes(
    row: CellMap,
    schema: EntitySchema,
    meta: MetaInfo,
    split_value: Optional[str] = None,
) -> dict[str, Any]:
    """Build the attribute map: core identity, custom columns, provenance meta.

    Prefixes keep the three partitions disjoint. Null attr columns get no
    key at all; null id values cannot occur here because extraction skips
    such rows. For split schemas the single core attr is the part value.
    """
    attrs: dict[str, Any] = {}
    if schema.split is not None:
        attrs[f"core.{schema.split.source_column}"] = split_value
    else:
        for col in schema.id_columns:
            value = row.get(col)
            attrs[f"core.{col}"] = value.strip() if isinstance(value, str) else value
    for col in schema.attr_columns:
        value = row.get(col)
        if value is not None:
            attrs[f"custom.{col}"] = value
    attrs["meta.source_table"] = meta.source_table
    attrs["meta.source_rows"] = [meta.row_index]
    attrs["meta.created_at"] = meta.created_at
    return attrs


def extract_row_entities(
    schema: EntitySchema,
    row: CellMap,
    row_index: int,
    table_name: str,
    created_at: str,
) -> list[Entity]:
    """Extract the entities one schema yields from one row.

    Rows with a null or empty id value yield nothing for that schema.
    Split schemas yield one entity per non-empty part, so a repeated part
    shows up twice and merges downstream.
    """
    out: list[Entity] = []
    meta = MetaInfo(table_name, row_index, created_at)
    if schema.split is not None:
        cell = row.get(schema.split.source_column)
        if cell is None:
            return out
        text = cell if isinstance(cell, str) else _cell_str(cell)
        for part in split_cell(text, schema.split.delimiters):
            eid = compose_id(schema.entity_type, [part], schema.namespace)
            attrs = assemble_attributes(row, schema, meta, split_value=part)
            out.append(Entity(eid, schema.entity_type, attrs))
        return out

    try:
        eid = make_entity_id(row, schema)
    except MissingIdValue:
        return out
    attrs = assemble_attributes(row, schema, meta)
    out.append(Entity(eid, schema.entity_type, attrs))
    return out


ConflictLog = list[dict[str, Any]]


def merge_entities(a: Entity, b: Entity) -> tuple[Entity, ConflictLog]:
    """Merge two extractions of the same entity.

    Non-null values override null ones; when both sides are non-null and
    disagree, the first occurrence wins and the clash is logged. Meta
    keys are system-managed: source rows union, conflict logs accumulate
    under meta.conflicts.
    """
    if a.id != b.id:
        raise IdMismatch(f"cannot merge {a.id!r} with {b.id!r}")
    if a.type != b.type:
        raise IdMismatch(f"entity {a.id!r} has conflicting types {a.type!r} and {b.type!r}")

    merged: dict[str, Any] = dict(a.attrs)
    conflicts: ConflictLog = []
    for key, value in b.attrs.items():
        if key.startswith("meta."):
            continue
        if key not in merged or merged[key] is None:
            merged[key] = value
        elif value is not None and merged[key] != value:
            conflicts.append({"attr": key, "kept": merged[key], "dropped": value})

    rows = sorted(
        set(a.attrs.get("meta.source_rows", [])) | set(b.attrs.get("meta.source_rows", []))
    )
    merged["meta.source_table"] = a.attrs.get("meta.source_table") or b.attrs.get("meta.source_table")
    merged["meta.source_rows"] = rows
    merged["meta.created_at"] = a.attrs.get("meta.created_at") or b.attrs.get("meta.created_at")
    log = (
        list(a.attrs.get("meta.conflicts", []))
        + list(b.attrs.get("meta.conflicts", []))
        + conflicts
    )
    if log:
        merged["meta.conflicts"] = log
    return Entity(a.id, a.type, merged), conflicts


def cosine_similarity(u: Sequence[float], v: Sequence[float]) -> float:
    return kernels.cosine(np.asarray(u, dtype=np.float64), np.asarray(v, dtype=np.float64))


def _as_number(value: Any) -> Optional[float]:
    if isinstance(value, bool):
        return float(value)
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return float(value.strip())
        except ValueError:
            return None
    return None


def _as_text(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    return value if isinstance(value, str) else str(value)


def _compare(a: Any, b: Any, op: str) -> bool:
    if a is None or b is None:
        return False
    na, nb = _as_number(a), _as_number(b)
    x: Any
    y: Any
    if na is not None and nb is not None:
        x, y = na, nb
    else:
        x, y = _as_text(a), _as_text(b)
    if op == "=":
        return x == y
    if op == ">":
        return x > y
    if op == "<":
        return x < y
    if op == ">=":
        return x >= y
    if op == "<=":
        return x <= y
    raise ConfigInvalid(f"unknown comparison operator {op!r}")


def _resolve(entity: Entity, name: str, strict: bool) -> Any:
    if name in entity.attrs:
        return entity.attrs[name]
    if "." not in name:
        for prefix in ("core.", "custom."):
            key = prefix + name
            if key in entity.attrs:
                return entity.attrs[key]
    if strict:
        raise UnknownAttribute(f"entity {entity.id!r} has no attribute {name!r}")
    return None


def eval_rule_expr(
    expr: Optional[RuleExpr],
    src: Entity,
    tgt: Entity,
    embed: Optional[Embedder] = None,
    strict: bool = False,
) -> bool:
    """Evaluate a rule expression over a candidate (source, target) pair.

    A missing expression is vacuously true. Comparisons with a null
    operand are false; both operands numeric compare numerically,
    otherwise lexicographically. An empty conjunction is true, an empty
    disjunction false.
    """
    if expr is None:
        return True
    if isinstance(expr, And):
        return all(eval_rule_expr(c, src, tgt, embed, strict) for c in expr.children)
    if isinstance(expr, Or):
        return any(eval_rule_expr(c, src, tgt, embed, strict) for c in expr.children)
    if isinstance(expr, AttrCompare):
        return _compare(
            _resolve(src, expr.src_attr, strict),
            _resolve(tgt, expr.tgt_attr, strict),
            expr.op,
        )
    if isinstance(expr, Similarity):
        a = _resolve(src, expr.src_attr, strict)
        b = _resolve(tgt, expr.tgt_attr, strict)
        if not isinstance(a, str) or not isinstance(b, str):
            return False
        if not a.strip() or not b.strip():
            return False
        fn = embed or _default_embed()
        return cosine_similarity(fn(a), fn(b)) >= expr.threshold
    raise ConfigInvalid(f"unknown rule expression node {expr!r}")


def group_rows(rows: Sequence[CellMap], group_columns: Sequence[str]) -> dict[tuple, list[int]]:
    """Group row indexes by their group-column value tuple.

    Rows with any null group value join no group. Keys appear in first-
    occurrence order; indexes stay ascending.
    """
    groups: dict[tuple, list[int]] = {}
    for idx, row in enumerate(rows):
        key = tuple(row.get(col) for col in group_columns)
        if any(v is None for v in key):
            continue
        groups.setdefault(key, []).append(idx)
    return groups


def discover_intra_row(
    row_entities: Sequence[Sequence[Entity]],
    rules: Sequence[RelationshipRule],
    embed: Optional[Embedder] = None,
) -> list[Relationship]:
    """Run intra-row rules over each row's entity list.

    Pair order is deterministic: rows ascending, rules in declaration
    order, sources then targets in extraction order.
    """
    out: list[Relationship] = []
    for row_idx, entities in enumerate(row_entities):
        for rule in rules:
            if rule.match_mode != "intra_row":
                continue
            sources = [e for e in entities if e.type == rule.source_type]
            targets = [e for e in entities if e.type == rule.target_type]
            for s in sources:
                for t in targets:
                    if s.id == t.id:
                        continue
                    if eval_rule_expr(rule.expr, s, t, embed):
                        out.append(
                            Relationship(s.id, t.id, rule.rel_type, Provenance(rule.rel_type, [row_idx]))
                        )
    return out


def discover_cross_row(
    rows: Sequence[CellMap],
    row_entities: Sequence[Sequence[Entity]],
    rules: Sequence[RelationshipRule],
    embed: Optional[Embedder] = None,
) -> list[Relationship]:
    """Run cross-row rules inside each group of rows.

    Both orientations of a row pair are considered; an entity never
    relates to itself even when it spans both rows.
    """
    out: list[Relationship] = []
    for rule in rules:
        if rule.match_mode != "cross_row":
            continue
        groups = group_rows(rows, rule.group_columns)
        for idxs in groups.values():
            for i in idxs:
                for j in idxs:
                    if i == j:
                        continue
                    sources = [e for e in row_entities[i] if e.type == rule.source_type]
                    targets = [e for e in row_entities[j] if e.type == rule.target_type]
                    for s in sources:
                        for t in targets:
                            if s.id == t.id:
                                continue
                            if eval_rule_expr(rule.expr, s, t, embed):
                                prov = Provenance(rule.rel_type, sorted({i, j}))
                                out.append(Relationship(s.id, t.id, rule.rel_type, prov))
    return out


def _dedup_relationships(edges: Sequence[Relationship]) -> list[Relationship]:
    # Duplicate (source, target, type) triples collapse; provenance rows union.
    seen: dict[tuple[str, str, str], Relationship] = {}
    for edge in edges:
        key = edge.key()
        if key in seen:
            kept = seen[key]
            rows = sorted(set(kept.provenance.rows) | set(edge.provenance.rows))
            kept.provenance.rows = rows
        else:
            seen[key] = Relationship(
                edge.source_id,
                edge.target_id,
                edge.rel_type,
                Provenance(edge.provenance.rule, list(edge.provenance.rows)),
            )
    return list(seen.values())


def build_graph(
    table: SourceTable,
    schemas: Sequence[EntitySchema],
    rules: Sequence[RelationshipRule],
    embed: Optional[Embedder] = None,
    created_at: Optional[str] = None,
) -> KnowledgeGraph:
    """Transform a cleaned table into a knowledge graph.

    Validation failures abort the build. Entities merge by id as rows
    are scanned; relationship discovery then runs over the merged
    entities and duplicate edges collapse with unioned provenance.
    """
    report = validate_config(schemas, rules, table.columns)
    if not report.ok:
        details = "; ".join(i.message for i in report.errors())
        raise ConfigInvalid(f"invalid build config: {details}")

    if created_at is None:
        created_at = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")

    rows = table.cell_maps()
    entities: dict[str, Entity] = {}
    row_ids: list[list[str]] = []
    for idx, row in enumerate(rows):
        ids: list[str] = []
        for schema in schemas:
            for ent in extract_row_entities(schema, row, idx, table.name, created_at):
                if ent.id in entities:
                    entities[ent.id], _ = merge_entities(entities[ent.id], ent)
                else:
                    entities[ent.id] = ent
                if ent.id not in ids:
                    ids.append(ent.id)
        row_ids.append(ids)

    row_entities = [[entities[eid] for eid in ids] for ids in row_ids]
    edges = discover_intra_row(row_entities, rules, embed)
    edges += discover_cross_row(rows, row_entities, rules, embed)
    return KnowledgeGraph(entities=entities, relationships=_dedup_relationships(edges))

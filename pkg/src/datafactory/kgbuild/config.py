"""Entity schemas, relationship rules, and their validation.

A build configuration is the (S, R) pair driving the table-to-graph
transformation: entity schemas say how rows become typed entities,
relationship rules say which entity pairs get connected. Configurations
arrive either from a JSON document (see :func:`config_from_json`) or from
an LLM suggestion (:mod:`datafactory.kgbuild.suggest`); both paths go
through :func:`validate_config` before a build is allowed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

DEFAULT_DELIMITERS = (",", ";", "|")
DEFAULT_SIMILARITY_THRESHOLD = 0.8

COMPARE_OPS = ("=", ">", "<", ">=", "<=")

# --- rule expressions -------------------------------------------------------


@dataclass(frozen=True)
class AttrCompare:
    src_attr: str
    op: str
    tgt_attr: str


@dataclass(frozen=True)
class Similarity:
    src_attr: str
    tgt_attr: str
    threshold: float = DEFAULT_SIMILARITY_THRESHOLD


@dataclass(frozen=True)
class And:
    children: tuple["RuleExpr", ...] = ()


@dataclass(frozen=True)
class Or:
    children: tuple["RuleExpr", ...] = ()


RuleExpr = Union[AttrCompare, Similarity, And, Or]


@dataclass(frozen=True)
class SplitConfig:
    source_column: str
    delimiters: tuple[str, ...] = DEFAULT_DELIMITERS


@dataclass
class EntitySchema:
    entity_type: str
    id_columns: list[str] = field(default_factory=list)
    attr_columns: list[str] = field(default_factory=list)
    split: Optional[SplitConfig] = None
    namespace: Optional[str] = None


@dataclass
class RelationshipRule:
    rel_type: str
    source_type: str
    target_type: str
    match_mode: str  # "intra_row" | "cross_row"
    group_columns: list[str] = field(default_factory=list)
    expr: Optional[RuleExpr] = None  # None means always-true


@dataclass
class ValidationIssue:
    severity: str  # "error" | "warning"
    message: str
    location: str


@dataclass
class ValidationReport:
    issues: list[ValidationIssue] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not any(i.severity == "error" for i in self.issues)

    def errors(self) -> list[ValidationIssue]:
        return [i for i in self.issues if i.severity == "error"]


# --- validation ----------------------------------------------------------------


def _walk_expr(expr: Optional[RuleExpr]):
    if expr is None:
        return
    yield expr
    if isinstance(expr, (And, Or)):
        for child in expr.children:
            yield from _walk_expr(child)


def validate_config(
    schemas: Sequence[EntitySchema],
    rules: Sequence[RelationshipRule],
    columns: Sequence[str],
) -> ValidationReport:
    """Check (S, R) for consistency against the table's column names.

    Errors: missing columns, duplicate entity types, intra-row rules whose
    source and target type coincide, cross-row rules without group
    columns, similarity thresholds outside [0, 1], rules referencing
    undefined entity types. Unused table columns only warn.
    """
    report = ValidationReport()
    known = set(columns)
    types_seen: set[str] = set()
    used_columns: set[str] = set()

    def error(message: str, location: str) -> None:
        report.issues.append(ValidationIssue("error", message, location))

    def warn(message: str, location: str) -> None:
        report.issues.append(ValidationIssue("warning", message, location))

    for schema in schemas:
        loc = f"entity:{schema.entity_type}"
        if schema.entity_type in types_seen:
            error(f"duplicate entity type {schema.entity_type!r}", loc)
        types_seen.add(schema.entity_type)
        if schema.split is not None and schema.id_columns:
            error("schema declares both id_columns and split; identity would be ambiguous", loc)
        if schema.split is None and not schema.id_columns:
            error("schema needs id_columns (or a split config)", loc)
        for col in list(schema.id_columns) + list(schema.attr_columns):
            if col not in known:
                error(f"column {col!r} not in table", loc)
            used_columns.add(col)
        if schema.split is not None:
            if schema.split.source_column not in known:
                error(f"split column {schema.split.source_column!r} not in table", loc)
            used_columns.add(schema.split.source_column)
            if not schema.split.delimiters:
                error("split config has an empty delimiter set", loc)

    for idx, rule in enumerate(rules):
        loc = f"rule:{rule.rel_type}[{idx}]"
        if rule.match_mode not in ("intra_row", "cross_row"):
            error(f"unknown match_mode {rule.match_mode!r}", loc)
        for t in (rule.source_type, rule.target_type):
            if t not in types_seen:
                error(f"rule references undefined entity type {t!r}", loc)
        if rule.match_mode == "intra_row" and rule.source_type == rule.target_type:
            error("intra-row rules require distinct source and target types", loc)
        if rule.match_mode == "cross_row":
            if not rule.group_columns:
                error("cross-row rules require group columns", loc)
            for col in rule.group_columns:
                if col not in known:
                    error(f"group column {col!r} not in table", loc)
                used_columns.add(col)
        elif rule.group_columns:
            warn("group columns are ignored for intra-row rules", loc)
        for node in _walk_expr(rule.expr):
            if isinstance(node, AttrCompare):
                if node.op not in COMPARE_OPS:
                    error(f"unknown comparison operator {node.op!r}", loc)
                if not node.src_attr or not node.tgt_attr:
                    error("comparison attributes must be non-empty", loc)
            elif isinstance(node, Similarity):
                if not (0.0 <= node.threshold <= 1.0):
                    error(f"similarity threshold {node.threshold} outside [0, 1]", loc)
                if not node.src_attr or not node.tgt_attr:
                    error("similarity attributes must be non-empty", loc)

    for col in columns:
        if col not in used_columns:
            warn(f"column {col!r} is not used by any schema or rule", f"column:{col}")

    return report


# --- JSON document format ---------------------------------------------------------


def _expr_from_json(doc) -> Optional[RuleExpr]:
    if doc is None:
        return None
    if not isinstance(doc, dict) or "kind" not in doc:
        raise ValueError(f"rule expression must be an object with a 'kind': {doc!r}")
    kind = doc["kind"]
    if kind == "and":
        return And(tuple(_expr_from_json(c) for c in doc.get("children", [])))
    if kind == "or":
        return Or(tuple(_expr_from_json(c) for c in doc.get("children", [])))
    if kind == "attr_compare":
        return AttrCompare(doc["src_attr"], doc["op"], doc["tgt_attr"])
    if kind == "similarity":
        return Similarity(
            doc["src_attr"],
            doc["tgt_attr"],
            float(doc.get("threshold", DEFAULT_SIMILARITY_THRESHOLD)),
        )
    raise ValueError(f"unknown rule expression kind {kind!r}")


def _expr_to_json(expr: Optional[RuleExpr]):
    if expr is None:
        return None
    if isinstance(expr, And):
        return {"kind": "and", "children": [_expr_to_json(c) for c in expr.children]}
    if isinstance(expr, Or):
        return {"kind": "or", "children": [_expr_to_json(c) for c in expr.children]}
    if isinstance(expr, AttrCompare):
        return {"kind": "attr_compare", "src_attr": expr.src_attr, "op": expr.op, "tgt_attr": expr.tgt_attr}
    return {
        "kind": "similarity",
        "src_attr": expr.src_attr,
        "tgt_attr": expr.tgt_attr,
        "threshold": expr.threshold,
    }


def config_from_json(text: str) -> tuple[list[EntitySchema], list[RelationshipRule]]:
    """Parse a config document: top-level ``entities`` and ``relationships``."""
    doc = json.loads(text)
    if not isinstance(doc, dict):
        raise ValueError("config document must be a JSON object")
    entities = doc.get("entities", [])
    relationships = doc.get("relationships", [])
    for key, section in (("entities", entities), ("relationships", relationships)):
        if not isinstance(section, list) or any(not isinstance(x, dict) for x in section):
            raise ValueError(f"{key!r} must be a list of objects")
    schemas = []
    for e in entities:
        split = None
        if e.get("split"):
            s = e["split"]
            delims = tuple(s.get("delimiters", DEFAULT_DELIMITERS))
            split = SplitConfig(source_column=s["source_column"], delimiters=delims)
        schemas.append(
            EntitySchema(
                entity_type=e["entity_type"],
                id_columns=list(e.get("id_columns", [])),
                attr_columns=list(e.get("attr_columns", [])),
                split=split,
                namespace=e.get("namespace"),
            )
        )
    rules = []
    for r in relationships:
        rules.append(
            RelationshipRule(
                rel_type=r["rel_type"],
                source_type=r["source_type"],
                target_type=r["target_type"],
                match_mode=r["match_mode"],
                group_columns=list(r.get("group_columns", [])),
                expr=_expr_from_json(r.get("expr")),
            )
        )
    return schemas, rules


def config_to_json(schemas: Sequence[EntitySchema], rules: Sequence[RelationshipRule]) -> str:
    doc = {
        "entities": [
            {
                "entity_type": s.entity_type,
                "id_columns": list(s.id_columns),
                "attr_columns": list(s.attr_columns),
                "split": (
                    {"source_column": s.split.source_column, "delimiters": list(s.split.delimiters)}
                    if s.split
                    else None
                ),
                "namespace": s.namespace,
            }
            for s in schemas
        ],
        "relationships": [
            {
                "rel_type": r.rel_type,
                "source_type": r.source_type,
                "target_type": r.target_type,
                "match_mode": r.match_mode,
                "group_columns": list(r.group_columns),
                "expr": _expr_to_json(r.expr),
            }
            for r in rules
        ],
    }
    return json.dumps(doc, indent=2)

"""Table-to-knowledge-graph construction."""

from .build import (
    MetaInfo,
    SourceTable,
    assemble_attributes,
    build_graph,
    compose_id,
    cosine_similarity,
    discover_cross_row,
    discover_intra_row,
    eval_rule_expr,
    extract_row_entities,
    group_rows,
    make_entity_id,
    merge_entities,
    split_cell,
)
from .config import (
    And,
    AttrCompare,
    EntitySchema,
    Or,
    RelationshipRule,
    RuleExpr,
    Similarity,
    SplitConfig,
    ValidationIssue,
    ValidationReport,
    config_from_json,
    config_to_json,
    validate_config,
)
from .graph import Entity, KnowledgeGraph, Provenance, Relationship
from .suggest import suggest_config

__all__ = [
    "And",
    "AttrCompare",
    "Entity",
    "EntitySchema",
    "KnowledgeGraph",
    "MetaInfo",
    "Or",
    "Provenance",
    "Relationship",
    "RelationshipRule",
    "RuleExpr",
    "Similarity",
    "SourceTable",
    "SplitConfig",
    "ValidationIssue",
    "ValidationReport",
    "assemble_attributes",
    "build_graph",
    "compose_id",
    "config_from_json",
    "config_to_json",
    "cosine_similarity",
    "discover_cross_row",
    "discover_intra_row",
    "eval_rule_expr",
    "extract_row_entities",
    "group_rows",
    "make_entity_id",
    "merge_entities",
    "split_cell",
    "suggest_config",
    "validate_config",
]

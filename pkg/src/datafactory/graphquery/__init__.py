"""Cypher-subset parser and evaluator over the knowledge graph."""

from .ast import (
    AndExpr,
    Comparison,
    CountItem,
    EdgePattern,
    NodePattern,
    NotExpr,
    OrderBy,
    OrExpr,
    PathPattern,
    PropItem,
    PropRef,
    QueryAst,
    VarItem,
    print_item,
    print_query,
)
from .evaluator import eval_query
from .parser import MAX_HOPS, parse_cypher
from .schema import (
    GraphSchema,
    SubgraphEdge,
    SubgraphNode,
    SubgraphView,
    emit_batch_script,
    extract_subgraph,
    introspect,
    read_batch_script,
    render_schema,
)

__all__ = [
    "AndExpr",
    "Comparison",
    "CountItem",
    "EdgePattern",
    "GraphSchema",
    "MAX_HOPS",
    "NodePattern",
    "NotExpr",
    "OrderBy",
    "OrExpr",
    "PathPattern",
    "PropItem",
    "PropRef",
    "QueryAst",
    "SubgraphEdge",
    "SubgraphNode",
    "SubgraphView",
    "VarItem",
    "emit_batch_script",
    "eval_query",
    "extract_subgraph",
    "introspect",
    "parse_cypher",
    "print_item",
    "print_query",
    "read_batch_script",
    "render_schema",
]

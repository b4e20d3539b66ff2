"""Query AST for the Cypher subset, plus its canonical printer.

The printer and parser are inverses: printing an AST and reparsing it
yields an equal AST, which the property tests lean on.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

Literal = Union[str, int, float, bool, None]


@dataclass(frozen=True)
class NodePattern:
    var: Optional[str] = None
    label: Optional[str] = None
    props: tuple[tuple[str, Literal], ...] = ()


@dataclass(frozen=True)
class EdgePattern:
    var: Optional[str] = None
    rel_type: Optional[str] = None
    direction: str = "out"  # "out" | "in" | "any"
    hops: Optional[tuple[int, int]] = None  # None means exactly one edge


@dataclass(frozen=True)
class PathPattern:
    nodes: tuple[NodePattern, ...]
    edges: tuple[EdgePattern, ...]  # len(edges) == len(nodes) - 1


@dataclass(frozen=True)
class PropRef:
    var: str
    prop: str


@dataclass(frozen=True)
class Comparison:
    left: Union[PropRef, Literal]
    op: str  # = <> < > <= >=
    right: Union[PropRef, Literal]


@dataclass(frozen=True)
class NotExpr:
    child: "WhereExpr"


@dataclass(frozen=True)
class AndExpr:
    children: tuple["WhereExpr", ...]


@dataclass(frozen=True)
class OrExpr:
    children: tuple["WhereExpr", ...]


WhereExpr = Union[Comparison, NotExpr, AndExpr, OrExpr]


@dataclass(frozen=True)
class VarItem:
    var: str


@dataclass(frozen=True)
class PropItem:
    var: str
    prop: str


@dataclass(frozen=True)
class CountItem:
    var: Optional[str] = None  # None means count(*)


ReturnItem = Union[VarItem, PropItem, CountItem]


@dataclass(frozen=True)
class OrderBy:
    item: ReturnItem
    descending: bool = False


@dataclass(frozen=True)
class QueryAst:
    paths: tuple[PathPattern, ...]
    where: Optional[WhereExpr] = None
    returns: tuple[ReturnItem, ...] = ()
    order_by: Optional[OrderBy] = None
    limit: Optional[int] = None

    def node_vars(self) -> list[str]:
        out: list[str] = []
        for path in self.paths:
            for node in path.nodes:
                if node.var and node.var not in out:
                    out.append(node.var)
        return out

    def edge_vars(self) -> list[str]:
        out: list[str] = []
        for path in self.paths:
            for edge in path.edges:
                if edge.var and edge.var not in out:
                    out.append(edge.var)
        return out


def print_literal(value: Literal) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return "'" + value.replace("\\", "\\\\").replace("'", "\\'") + "'"
    return repr(value)


def _print_node(node: NodePattern) -> str:
    inner = node.var or ""
    if node.label:
        inner += f":{node.label}"
    if node.props:
        pairs = ", ".join(f"{k}: {print_literal(v)}" for k, v in node.props)
        inner += (" " if inner else "") + "{" + pairs + "}"
    return f"({inner})"


def _print_edge(edge: EdgePattern) -> str:
    inner = edge.var or ""
    if edge.rel_type:
        inner += f":{edge.rel_type}"
    if edge.hops is not None:
        inner += f" *{edge.hops[0]}..{edge.hops[1]}"
    body = f"[{inner.strip()}]" if inner.strip() else "[]"
    if edge.direction == "out":
        return f"-{body}->"
    if edge.direction == "in":
        return f"<-{body}-"
    return f"-{body}-"


def print_item(item: ReturnItem) -> str:
    if isinstance(item, VarItem):
        return item.var
    if isinstance(item, PropItem):
        return f"{item.var}.{item.prop}"
    return f"count({item.var or '*'})"


def _print_where(expr: WhereExpr) -> str:
    if isinstance(expr, Comparison):
        left = f"{expr.left.var}.{expr.left.prop}" if isinstance(expr.left, PropRef) else print_literal(expr.left)
        right = (
            f"{expr.right.var}.{expr.right.prop}" if isinstance(expr.right, PropRef) else print_literal(expr.right)
        )
        return f"{left} {expr.op} {right}"
    if isinstance(expr, NotExpr):
        return f"NOT ({_print_where(expr.child)})"
    if isinstance(expr, AndExpr):
        return "(" + " AND ".join(_print_where(c) for c in expr.children) + ")"
    return "(" + " OR ".join(_print_where(c) for c in expr.children) + ")"


def print_query(ast: QueryAst) -> str:
    """Render the AST back to query text in canonical form."""
    parts = []
    paths = []
    for path in ast.paths:
        text = _print_node(path.nodes[0])
        for edge, node in zip(path.edges, path.nodes[1:]):
            text += _print_edge(edge) + _print_node(node)
        paths.append(text)
    parts.append("MATCH " + ", ".join(paths))
    if ast.where is not None:
        parts.append("WHERE " + _print_where(ast.where))
    parts.append("RETURN " + ", ".join(print_item(i) for i in ast.returns))
    if ast.order_by is not None:
        direction = " DESC" if ast.order_by.descending else " ASC"
        parts.append("ORDER BY " + print_item(ast.order_by.item) + direction)
    if ast.limit is not None:
        parts.append(f"LIMIT {ast.limit}")
    return " ".join(parts)

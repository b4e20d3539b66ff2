"""Pattern evaluator over an in-memory knowledge graph.

Semantics: enumerate every assignment of pattern variables to graph
elements that satisfies labels, property maps, edge patterns, hop ranges
and the WHERE clause, then project, aggregate, order and limit. A
variable-length edge matches once per distinct simple path (no edge
repeats within that traversal), mirroring path-counting semantics.
Rows come out sorted by the binding's entity-id tuple unless ORDER BY
says otherwise, so evaluation is deterministic.
"""

from __future__ import annotations

from typing import Any, Iterator, Optional, Union

from ..kgbuild.graph import Entity, KnowledgeGraph, Relationship
from ..relstore import ResultTable
from .ast import (
    AndExpr,
    Comparison,
    CountItem,
    EdgePattern,
    NodePattern,
    NotExpr,
    OrExpr,
    PropItem,
    PropRef,
    QueryAst,
    ReturnItem,
    VarItem,
    WhereExpr,
    print_item,
)

Binding = dict[str, Any]  # node var -> entity id; edge var -> rel_type or list


class _GraphIndex:
    def __init__(self, graph: KnowledgeGraph) -> None:
        self.graph = graph
        self.out_edges: dict[str, list[tuple[int, Relationship]]] = {}
        self.in_edges: dict[str, list[tuple[int, Relationship]]] = {}
        for idx, edge in enumerate(graph.relationships):
            self.out_edges.setdefault(edge.source_id, []).append((idx, edge))
            self.in_edges.setdefault(edge.target_id, []).append((idx, edge))

    def entity(self, entity_id: str) -> Entity:
        return self.graph.entities[entity_id]


def _node_matches(entity: Entity, pattern: NodePattern) -> bool:
    if pattern.label is not None and entity.type != pattern.label:
        return False
    for prop, literal in pattern.props:
        if entity.attr(prop) != literal:
            return False
    return True


def _candidates(index: _GraphIndex, pattern: NodePattern) -> list[str]:
    return [eid for eid, ent in index.graph.entities.items() if _node_matches(ent, pattern)]


def _step_edges(
    index: _GraphIndex, node_id: str, pattern: EdgePattern
) -> Iterator[tuple[int, Relationship, str]]:
    """Edges leaving node_id in the pattern's direction, with the far node."""
    if pattern.direction in ("out", "any"):
        for idx, edge in index.out_edges.get(node_id, []):
            if pattern.rel_type is None or edge.rel_type == pattern.rel_type:
                yield idx, edge, edge.target_id
    if pattern.direction in ("in", "any"):
        for idx, edge in index.in_edges.get(node_id, []):
            if pattern.rel_type is None or edge.rel_type == pattern.rel_type:
                yield idx, edge, edge.source_id


def _hop_paths(
    index: _GraphIndex, start: str, pattern: EdgePattern
) -> Iterator[tuple[str, tuple[int, ...]]]:
    """All simple edge paths of length min..max from start; yields (end, edges)."""
    assert pattern.hops is not None
    lo, hi = pattern.hops

    def walk(node: str, used: tuple[int, ...]) -> Iterator[tuple[str, tuple[int, ...]]]:
        depth = len(used)
        if lo <= depth:
            yield node, used
        if depth == hi:
            return
        for idx, _, far in _step_edges(index, node, pattern):
            if idx in used:
                continue
            yield from walk(far, used + (idx,))

    yield from walk(start, ())


def _match_path(
    index: _GraphIndex,
    nodes: tuple[NodePattern, ...],
    edges: tuple[EdgePattern, ...],
    pos: int,
    binding: Binding,
) -> Iterator[Binding]:
    if pos == len(edges):
        yield binding
        return
    edge_pat = edges[pos]
    next_pat = nodes[pos + 1]
    current = binding["__nodes__"][-1]

    def extend(far: str, edge_value: Any) -> Iterator[Binding]:
        far_entity = index.entity(far)
        if not _node_matches(far_entity, next_pat):
            return
        if next_pat.var is not None:
            known = binding.get(next_pat.var)
            if known is not None and known != far:
                return
        child = dict(binding)
        child["__nodes__"] = binding["__nodes__"] + [far]
        if next_pat.var is not None:
            child[next_pat.var] = far
        if edge_pat.var is not None:
            child[edge_pat.var] = edge_value
        yield from _match_path(index, nodes, edges, pos + 1, child)

    if edge_pat.hops is None:
        for _, edge, far in _step_edges(index, current, edge_pat):
            yield from extend(far, edge.rel_type)
    else:
        for far, used in _hop_paths(index, current, edge_pat):
            rels = [index.graph.relationships[i].rel_type for i in used]
            yield from extend(far, rels)


def _match_single(index: _GraphIndex, path, binding: Binding) -> Iterator[Binding]:
    first = path.nodes[0]
    if first.var is not None and first.var in binding:
        starts = [binding[first.var]]
        if not _node_matches(index.entity(starts[0]), first):
            return
    else:
        starts = _candidates(index, first)
    for start in starts:
        child = dict(binding)
        child["__nodes__"] = [start]
        if first.var is not None:
            child[first.var] = start
        for result in _match_path(index, path.nodes, path.edges, 0, child):
            final = dict(result)
            final.pop("__nodes__", None)
            yield final


def _enumerate(index: _GraphIndex, ast: QueryAst) -> list[Binding]:
    bindings: list[Binding] = [{}]
    for path in ast.paths:
        bindings = [m for b in bindings for m in _match_single(index, path, b)]
        if not bindings:
            return []
    return bindings


def _compare_values(left: Any, op: str, right: Any) -> bool:
    """Typed comparison: null operands are false, mixed types never
    equal and never order, booleans only support (in)equality."""
    if left is None or right is None:
        return False
    lb, rb = isinstance(left, bool), isinstance(right, bool)
    if lb or rb:
        equal = lb and rb and left == right
        if op == "=":
            return equal
        if op == "<>":
            return not equal
        return False
    comparable = (isinstance(left, (int, float)) and isinstance(right, (int, float))) or (
        isinstance(left, str) and isinstance(right, str)
    )
    if not comparable:
        return op == "<>"
    if op == "=":
        return left == right
    if op == "<>":
        return left != right
    if op == "<":
        return left < right
    if op == ">":
        return left > right
    if op == "<=":
        return left <= right
    return left >= right


def _operand_value(index: _GraphIndex, binding: Binding, operand: Union[PropRef, Any]) -> Any:
    if isinstance(operand, PropRef):
        bound = binding.get(operand.var)
        if isinstance(bound, str) and bound in index.graph.entities:
            return index.entity(bound).attr(operand.prop)
        return None
    return operand


def _eval_where(index: _GraphIndex, binding: Binding, expr: WhereExpr) -> bool:
    if isinstance(expr, Comparison):
        left = _operand_value(index, binding, expr.left)
        right = _operand_value(index, binding, expr.right)
        return _compare_values(left, expr.op, right)
    if isinstance(expr, NotExpr):
        return not _eval_where(index, binding, expr.child)
    if isinstance(expr, AndExpr):
        return all(_eval_where(index, binding, c) for c in expr.children)
    return any(_eval_where(index, binding, c) for c in expr.children)


def _item_value(index: _GraphIndex, binding: Binding, item: ReturnItem) -> Any:
    if isinstance(item, VarItem):
        return binding.get(item.var)
    if isinstance(item, PropItem):
        bound = binding.get(item.var)
        if isinstance(bound, str) and bound in index.graph.entities:
            return index.entity(bound).attr(item.prop)
        return None
    raise AssertionError("count items are handled by aggregation")


def _sort_key(value: Any) -> tuple:
    if value is None:
        return (2, "", "")
    if isinstance(value, bool):
        return (0, "b", value)
    if isinstance(value, (int, float)):
        return (0, "n", value)
    if isinstance(value, list):
        return (1, "l", tuple(str(v) for v in value))
    return (1, "s", str(value))


def _binding_order_key(binding: Binding, var_order: list[str]) -> tuple:
    return tuple(_sort_key(binding.get(var)) for var in var_order)


def eval_query(graph: KnowledgeGraph, ast: QueryAst) -> ResultTable:
    """Evaluate a parsed query; missing properties compare as null (false)."""
    index = _GraphIndex(graph)
    bindings = _enumerate(index, ast)
    if ast.where is not None:
        bindings = [b for b in bindings if _eval_where(index, b, ast.where)]

    var_order = ast.node_vars() + ast.edge_vars()
    bindings.sort(key=lambda b: _binding_order_key(b, var_order))

    columns = [print_item(item) for item in ast.returns]
    aggregated = any(isinstance(item, CountItem) for item in ast.returns)

    if not aggregated:
        rows = [[_item_value(index, b, item) for item in ast.returns] for b in bindings]
    else:
        plain = [item for item in ast.returns if not isinstance(item, CountItem)]
        groups: dict[tuple, dict] = {}
        order: list[tuple] = []
        for b in bindings:
            key_vals = tuple(_item_value(index, b, item) for item in plain)
            key = tuple(_sort_key(v) for v in key_vals)
            if key not in groups:
                groups[key] = {"values": key_vals, "counts": [0] * len(ast.returns)}
                order.append(key)
            for i, item in enumerate(ast.returns):
                if isinstance(item, CountItem):
                    if item.var is None or b.get(item.var) is not None:
                        groups[key]["counts"][i] += 1
        if not plain and not order:
            # count over zero bindings still yields one row of zeros
            groups[()] = {"values": (), "counts": [0] * len(ast.returns)}
            order.append(())
        rows = []
        for key in sorted(order):
            info = groups[key]
            row = []
            plain_iter = iter(info["values"])
            for i, item in enumerate(ast.returns):
                row.append(info["counts"][i] if isinstance(item, CountItem) else next(plain_iter))
            rows.append(row)

    if ast.order_by is not None:
        col = columns.index(print_item(ast.order_by.item))
        rows.sort(key=lambda r: _sort_key(r[col]), reverse=ast.order_by.descending)
    if ast.limit is not None:
        rows = rows[: ast.limit]
    return ResultTable(columns=columns, rows=rows)

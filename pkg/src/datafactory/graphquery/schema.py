"""Graph introspection, subgraph views, and batch-script export."""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Iterable, Optional

from ..errors import FormatError
from ..kgbuild.graph import Entity, KnowledgeGraph, Provenance, Relationship

MAX_SUBGRAPH_RADIUS = 3


@dataclass
class GraphSchema:
    labels: set[str] = field(default_factory=set)
    rel_types: set[str] = field(default_factory=set)
    property_keys: dict[str, set[str]] = field(default_factory=dict)


def introspect(graph: KnowledgeGraph) -> GraphSchema:
    """Exact labels, relationship types, and per-label property keys."""
    schema = GraphSchema()
    for entity in graph.entities.values():
        schema.labels.add(entity.type)
        schema.property_keys.setdefault(entity.type, set()).update(entity.attrs.keys())
    for edge in graph.relationships:
        schema.rel_types.add(edge.rel_type)
    return schema


def render_schema(schema: GraphSchema) -> str:
    """Human-readable schema text for prompts."""
    lines = []
    for label in sorted(schema.labels):
        keys = ", ".join(sorted(schema.property_keys.get(label, ())))
        lines.append(f"(:{label}) properties: {keys}")
    rels = ", ".join(sorted(schema.rel_types)) if schema.rel_types else "none"
    lines.append(f"relationship types: {rels}")
    return "\n".join(lines)


@dataclass
class SubgraphNode:
    id: str
    type: str
    attrs: dict[str, Any]
    highlighted: bool = False


@dataclass
class SubgraphEdge:
    source: str
    target: str
    rel_type: str
    highlighted: bool = False


@dataclass
class SubgraphView:
    nodes: list[SubgraphNode] = field(default_factory=list)
    edges: list[SubgraphEdge] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "nodes": [
                {"id": n.id, "type": n.type, "attrs": n.attrs, "highlighted": n.highlighted}
                for n in self.nodes
            ],
            "edges": [
                {
                    "source": e.source,
                    "target": e.target,
                    "rel_type": e.rel_type,
                    "highlighted": e.highlighted,
                }
                for e in self.edges
            ],
        }


def extract_subgraph(
    graph: KnowledgeGraph, bound_ids: Iterable[str], radius: int = 1
) -> SubgraphView:
    """Induced subgraph within `radius` undirected hops of the bound ids.

    Bound nodes and edges between two bound nodes carry highlight flags.
    Unknown ids are ignored rather than failing the view.
    """
    radius = max(0, min(radius, MAX_SUBGRAPH_RADIUS))
    bound = {i for i in bound_ids if i in graph.entities}
    if not bound:
        return SubgraphView()

    neighbors: dict[str, set[str]] = {}
    for edge in graph.relationships:
        neighbors.setdefault(edge.source_id, set()).add(edge.target_id)
        neighbors.setdefault(edge.target_id, set()).add(edge.source_id)

    included: dict[str, int] = {}
    queue: deque[tuple[str, int]] = deque((i, 0) for i in sorted(bound))
    while queue:
        node, depth = queue.popleft()
        if node in included and included[node] <= depth:
            continue
        included[node] = depth
        if depth == radius:
            continue
        for other in sorted(neighbors.get(node, ())):
            if other not in included:
                queue.append((other, depth + 1))

    nodes = [
        SubgraphNode(eid, ent.type, dict(ent.attrs), highlighted=eid in bound)
        for eid, ent in graph.entities.items()
        if eid in included
    ]
    edges = [
        SubgraphEdge(
            e.source_id,
            e.target_id,
            e.rel_type,
            highlighted=e.source_id in bound and e.target_id in bound,
        )
        for e in graph.relationships
        if e.source_id in included and e.target_id in included
    ]
    return SubgraphView(nodes=nodes, edges=edges)


# --- batch export ---------------------------------------------------------------


def _write_value(value: Any) -> str:
    if isinstance(value, str):
        return "'" + value.replace("\\", "\\\\").replace("'", "\\'") + "'"
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return "null"
    if isinstance(value, (int, float)):
        return repr(value)
    if isinstance(value, list) and all(isinstance(v, (str, int, float, bool)) for v in value):
        return "[" + ", ".join(_write_value(v) for v in value) + "]"
    return _write_value(json.dumps(value, ensure_ascii=False))


def _write_key(key: str) -> str:
    if key.isidentifier():
        return key
    return "`" + key + "`"


def emit_batch_script(graph: KnowledgeGraph) -> str:
    """Deterministic CREATE script: nodes sorted by id, then edges.

    Each node line carries the label and every attribute plus an `id`
    property; edge lines match endpoints by id. Values that are not
    scalars or scalar lists are embedded as JSON strings.
    """
    lines = []
    for eid in sorted(graph.entities):
        entity = graph.entities[eid]
        props = [("id", eid)] + sorted(entity.attrs.items())
        body = ", ".join(f"{_write_key(k)}: {_write_value(v)}" for k, v in props)
        lines.append(f"CREATE (:{entity.type} {{{body}}})")
    for edge in sorted(graph.relationships, key=lambda e: e.key()):
        lines.append(
            "MATCH (a {id: %s}) MATCH (b {id: %s}) CREATE (a)-[:%s]->(b)"
            % (_write_value(edge.source_id), _write_value(edge.target_id), edge.rel_type)
        )
    return "\n".join(lines) + ("\n" if lines else "")


class _LineReader:
    """Minimal reader for the exact shapes emit_batch_script produces."""

    def __init__(self, line: str, lineno: int) -> None:
        self.line = line
        self.lineno = lineno
        self.pos = 0

    def error(self, message: str) -> FormatError:
        return FormatError(f"line {self.lineno}: {message}")

    def skip_ws(self) -> None:
        while self.pos < len(self.line) and self.line[self.pos].isspace():
            self.pos += 1

    def literal(self, text: str) -> None:
        self.skip_ws()
        if not self.line.startswith(text, self.pos):
            raise self.error(f"expected {text!r}")
        self.pos += len(text)

    def ident(self) -> str:
        self.skip_ws()
        if self.pos < len(self.line) and self.line[self.pos] == "`":
            end = self.line.index("`", self.pos + 1)
            out = self.line[self.pos + 1 : end]
            self.pos = end + 1
            return out
        start = self.pos
        while self.pos < len(self.line) and (self.line[self.pos].isalnum() or self.line[self.pos] in "_."):
            self.pos += 1
        if self.pos == start:
            raise self.error("expected identifier")
        return self.line[start : self.pos]

    def value(self) -> Any:
        self.skip_ws()
        ch = self.line[self.pos]
        if ch == "'":
            out = []
            i = self.pos + 1
            while i < len(self.line):
                c = self.line[i]
                if c == "\\" and i + 1 < len(self.line):
                    out.append(self.line[i + 1])
                    i += 2
                    continue
                if c == "'":
                    self.pos = i + 1
                    return "".join(out)
                out.append(c)
                i += 1
            raise self.error("unterminated string")
        if ch == "[":
            self.pos += 1
            items = []
            self.skip_ws()
            if self.line[self.pos] == "]":
                self.pos += 1
                return items
            while True:
                items.append(self.value())
                self.skip_ws()
                if self.line[self.pos] == ",":
                    self.pos += 1
                    continue
                self.literal("]")
                return items
        for word, val in (("true", True), ("false", False), ("null", None)):
            if self.line.startswith(word, self.pos):
                self.pos += len(word)
                return val
        start = self.pos
        while self.pos < len(self.line) and (self.line[self.pos].isdigit() or self.line[self.pos] in "+-.e"):
            self.pos += 1
        raw = self.line[start : self.pos]
        try:
            return int(raw)
        except ValueError:
            try:
                return float(raw)
            except ValueError:
                raise self.error(f"bad literal {raw!r}") from None

    def props(self) -> dict[str, Any]:
        out: dict[str, Any] = {}
        self.literal("{")
        self.skip_ws()
        if self.line[self.pos] == "}":
            self.pos += 1
            return out
        while True:
            key = self.ident()
            self.literal(":")
            out[key] = self.value()
            self.skip_ws()
            if self.line[self.pos] == ",":
                self.pos += 1
                self.skip_ws()
                continue
            self.literal("}")
            return out


def read_batch_script(text: str) -> KnowledgeGraph:
    """Rebuild a graph from an emitted script (round-trip check support)."""
    graph = KnowledgeGraph()
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        reader = _LineReader(line, lineno)
        reader.skip_ws()
        if line.lstrip().startswith("CREATE (:"):
            reader.literal("CREATE (:")
            label = reader.ident()
            props = reader.props()
            reader.literal(")")
            eid = props.pop("id", None)
            if not isinstance(eid, str):
                raise reader.error("node line lacks a string id property")
            graph.entities[eid] = Entity(eid, label, props)
        elif line.lstrip().startswith("MATCH (a {id:"):
            reader.literal("MATCH (a {id:")
            source = reader.value()
            reader.literal("}) MATCH (b {id:")
            target = reader.value()
            reader.literal("}) CREATE (a)-[:")
            rel_type = reader.ident()
            reader.literal("]->(b)")
            if source not in graph.entities or target not in graph.entities:
                raise reader.error("edge references unknown node id")
            graph.relationships.append(
                Relationship(source, target, rel_type, Provenance("import", []))
            )
        else:
            raise reader.error("unrecognized statement")
    return graph

"""Graph value types produced by the build step."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional


@dataclass
class Provenance:
    rule: str
    rows: list[int]


@dataclass
class Entity:
    id: str
    type: str
    attrs: dict[str, Any] = field(default_factory=dict)

    def attr(self, name: str) -> Any:
        """Look up an attribute, trying prefixed variants for bare names.

        Rule expressions refer to attributes by column name; stored keys
        carry a ``core.``/``custom.`` prefix. Bare names resolve in that
        order and return None when nothing matches.
        """
        if name in self.attrs:
            return self.attrs[name]
        if "." not in name:
            for prefix in ("core.", "custom."):
                key = prefix + name
                if key in self.attrs:
                    return self.attrs[key]
        return None


@dataclass
class Relationship:
    source_id: str
    target_id: str
    rel_type: str
    provenance: Provenance

    def key(self) -> tuple[str, str, str]:
        return (self.source_id, self.target_id, self.rel_type)


@dataclass
class KnowledgeGraph:
    entities: dict[str, Entity] = field(default_factory=dict)
    relationships: list[Relationship] = field(default_factory=list)

    def by_type(self, entity_type: str) -> list[Entity]:
        return [e for e in self.entities.values() if e.type == entity_type]

    def entity_types(self) -> list[str]:
        return sorted({e.type for e in self.entities.values()})

    def rel_types(self) -> list[str]:
        return sorted({r.rel_type for r in self.relationships})

    def degree(self, entity_id: str) -> int:
        return sum(
            1
            for r in self.relationships
            if r.source_id == entity_id or r.target_id == entity_id
        )

    def neighbors(self, entity_id: str) -> list[str]:
        out: list[str] = []
        seen: set[str] = set()
        for r in self.relationships:
            other: Optional[str] = None
            if r.source_id == entity_id:
                other = r.target_id
            elif r.target_id == entity_id:
                other = r.source_id
            if other is not None and other not in seen:
                seen.add(other)
                out.append(other)
        return out

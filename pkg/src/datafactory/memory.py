"""Historical-QA memory: embedding port, record store, retrieval.

Every successful query generation is recorded as a QaRecord; later
questions retrieve the nearest records to serve as few-shot
demonstrations. Similarity blends semantic closeness (cosine over a
deterministic bag-of-words embedding) with structural overlap between
query signatures.
"""

from __future__ import annotations

import hashlib
import json
import re
import threading
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Union

import numpy as np

from . import kernels
from .errors import ConfigInvalid, EmptyText, KindMismatch, StorageError

DEFAULT_DIM = 256
DEFAULT_ALPHA = 0.7
DEFAULT_K = 3

_TOKEN_RE = re.compile(r"\w+")


def _stable_hash64(token: str) -> int:
    digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def embed(text: str, dim: int = DEFAULT_DIM) -> np.ndarray:
    """Hashed-token count embedding, L2-normalized.

    Lowercased word tokens hash into ``dim`` buckets; counts are
    normalized to unit length. Deterministic across processes, so a text
    with no word tokens is as empty as the empty string.
    """
    tokens = _TOKEN_RE.findall(text.lower())
    if not tokens:
        raise EmptyText("cannot embed text without word tokens")
    vec = np.zeros(dim, dtype=np.float64)
    for token in tokens:
        vec[_stable_hash64(token) % dim] += 1.0
    return vec / np.linalg.norm(vec)


@dataclass(frozen=True)
class StructSignature:
    """Structural fingerprint of a query: name set plus its kind."""

    kind: str  # "sql" | "cypher"
    names: frozenset[str] = frozenset()


def structural_score(a: StructSignature, b: StructSignature) -> float:
    """Jaccard overlap of the two name sets; both empty scores 0."""
    if a.kind != b.kind:
        raise KindMismatch(f"cannot score {a.kind!r} signature against {b.kind!r}")
    if not a.names and not b.names:
        return 0.0
    union = a.names | b.names
    return len(a.names & b.names) / len(union)


_SQL_KEYWORDS = frozenset(
    """select from where group by having order limit offset join inner left right
    outer cross on as and or not in is null like between distinct union all case
    when then else end count sum avg min max cast asc desc exists""".split()
)


def sql_signature(sql: str) -> StructSignature:
    """Referenced table and column names, lowercased, keywords dropped."""
    names: set[str] = set()
    for ident in re.findall(r"[A-Za-z_][A-Za-z0-9_.]*", sql):
        for part in ident.lower().split("."):
            if part and part not in _SQL_KEYWORDS:
                names.add(part)
    return StructSignature("sql", frozenset(names))


def cypher_signature(query: str) -> StructSignature:
    """Node labels and relationship types appearing in the pattern."""
    names = {m.group(1).lower() for m in re.finditer(r":\s*([A-Za-z_][A-Za-z0-9_]*)", query)}
    return StructSignature("cypher", frozenset(names))


@dataclass
class QaRecord:
    question: str
    query_text: str
    query_kind: str  # "sql" | "cypher"
    result_summary: str
    embedding: list[float]
    signature: StructSignature
    created_at: str = ""
    id: str = ""


def _record_to_json(record: QaRecord) -> str:
    doc = asdict(record)
    doc["signature"] = {"kind": record.signature.kind, "names": sorted(record.signature.names)}
    return json.dumps(doc, ensure_ascii=False)


def _record_from_json(line: str) -> QaRecord:
    doc = json.loads(line)
    sig = doc["signature"]
    return QaRecord(
        question=doc["question"],
        query_text=doc["query_text"],
        query_kind=doc["query_kind"],
        result_summary=doc["result_summary"],
        embedding=list(doc["embedding"]),
        signature=StructSignature(sig["kind"], frozenset(sig["names"])),
        created_at=doc.get("created_at", ""),
        id=doc.get("id", ""),
    )


class QaRecordStore:
    """Append-only QA memory with an in-memory index.

    Records persist to a JSON-lines log when a path is given; the index
    is rebuilt from the log on load. Writes are serialized and become
    visible to retrievals atomically.
    """

    def __init__(
        self,
        path: Optional[Union[str, Path]] = None,
        dim: int = DEFAULT_DIM,
        alpha: float = DEFAULT_ALPHA,
    ) -> None:
        if not (0.0 <= alpha <= 1.0):
            raise ConfigInvalid(f"alpha {alpha} outside [0, 1]")
        self.dim = dim
        self.alpha = alpha
        self.path = Path(path) if path is not None else None
        self._lock = threading.Lock()
        self._records: list[QaRecord] = []
        self._by_id: dict[str, QaRecord] = {}
        if self.path is not None and self.path.exists():
            for line in self.path.read_text(encoding="utf-8").splitlines():
                if line.strip():
                    self._index(_record_from_json(line))

    def _index(self, record: QaRecord) -> None:
        self._records.append(record)
        self._by_id[record.id] = record

    def __len__(self) -> int:
        return len(self._records)

    def record_qa(self, record: QaRecord) -> str:
        if record.query_kind not in ("sql", "cypher"):
            raise StorageError(f"unknown query kind {record.query_kind!r}")
        if len(record.embedding) != self.dim:
            raise StorageError(
                f"embedding has dim {len(record.embedding)}, store expects {self.dim}"
            )
        if record.query_kind != record.signature.kind:
            raise KindMismatch(
                f"record kind {record.query_kind!r} does not match signature kind {record.signature.kind!r}"
            )
        with self._lock:
            if not record.id:
                record.id = f"qa-{len(self._records) + 1:06d}"
            elif record.id in self._by_id:
                raise StorageError(f"duplicate record id {record.id!r}")
            if not record.created_at:
                record.created_at = datetime.now(timezone.utc).isoformat(timespec="seconds")
            if self.path is not None:
                try:
                    with self.path.open("a", encoding="utf-8") as fh:
                        fh.write(_record_to_json(record) + "\n")
                except OSError as exc:
                    raise StorageError(str(exc)) from exc
            self._index(record)
        return record.id

    def get(self, record_id: str) -> Optional[QaRecord]:
        return self._by_id.get(record_id)

    def records(self, kind: Optional[str] = None) -> list[QaRecord]:
        if kind is None:
            return list(self._records)
        return [r for r in self._records if r.query_kind == kind]

    def retrieve_similar(
        self,
        question: str,
        kind: str,
        k: int = DEFAULT_K,
        sig: Optional[StructSignature] = None,
    ) -> list[QaRecord]:
        """Top-k records of the given kind by blended score.

        score = alpha * cosine(question, record) + (1 - alpha) *
        structural overlap; descending, ties broken by recency.
        """
        if k < 1:
            raise ConfigInvalid(f"k must be at least 1, got {k}")
        candidates = [(i, r) for i, r in enumerate(self._records) if r.query_kind == kind]
        if not candidates:
            return []
        query_vec = embed(question, self.dim)
        matrix = np.array([r.embedding for _, r in candidates], dtype=np.float64)
        cosines = kernels.batch_cosine(matrix, query_vec)
        scored = []
        for pos, (seq, record) in enumerate(candidates):
            struct = structural_score(sig, record.signature) if sig is not None else 0.0
            score = self.alpha * float(cosines[pos]) + (1.0 - self.alpha) * struct
            scored.append((score, seq, record))
        scored.sort(key=lambda item: (-item[0], -item[1]))
        return [record for _, _, record in scored[:k]]


def make_record(
    question: str,
    query_text: str,
    query_kind: str,
    result_summary: str,
    dim: int = DEFAULT_DIM,
    created_at: str = "",
) -> QaRecord:
    """Assemble a QaRecord, deriving embedding and signature."""
    signature = sql_signature(query_text) if query_kind == "sql" else cypher_signature(query_text)
    return QaRecord(
        question=question,
        query_text=query_text,
        query_kind=query_kind,
        result_summary=result_summary,
        embedding=[float(x) for x in embed(question, dim)],
        signature=signature,
        created_at=created_at,
    )

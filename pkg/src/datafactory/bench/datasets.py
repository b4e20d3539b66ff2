"""Loaders for the three benchmark layouts.

Each loader consumes the dataset's published on-disk format:

* tabfact: a directory with ``total_examples.json`` (table id mapping to
  ``[statements, labels, caption]``) and ``all_csv/`` holding the
  ``#``-delimited tables.
* wikitq: a root directory with one or more 4-column TSV files
  (``id  utterance  context  targetValue``) whose ``context`` paths are
  relative to the root; multiple gold answers are ``|``-separated.
* fetaqa: a JSONL file (or directory containing one) with ``feta_id``,
  ``table_array``, ``question`` and ``answer`` per record.

Instance order is deterministic: file order for row-per-record formats,
sorted table id then statement index for tabfact.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

from ..errors import FormatError
from ..ingest import RawTable, parse_delimited

DATASET_KINDS = ("tabfact", "wikitq", "fetaqa")

Gold = Union[str, list[str]]


@dataclass
class BenchInstance:
    """One scored unit: a table, a question, and its gold target.

    ``gold`` shape follows the dataset: a label string for tabfact
    (``entailed``/``refuted``), a list of answer strings for wikitq, and
    a single reference text for fetaqa.
    """

    dataset: str
    instance_id: str
    table: RawTable
    question: str
    gold: Gold


def _check_kind(kind: str) -> None:
    if kind not in DATASET_KINDS:
        raise FormatError(f"unknown dataset kind {kind!r}; expected one of {DATASET_KINDS}")


def _load_tabfact(root: Path) -> list[BenchInstance]:
    examples = root / "total_examples.json"
    if not examples.exists():
        candidates = sorted(root.glob("*_examples.json"))
        if not candidates:
            raise FormatError(f"no tabfact examples json under {root}")
        examples = candidates[0]
    try:
        mapping = json.loads(examples.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{examples}: {exc}") from exc
    if not isinstance(mapping, dict):
        raise FormatError(f"{examples}: expected an object keyed by table id")

    instances: list[BenchInstance] = []
    for table_id in sorted(mapping):
        record = mapping[table_id]
        if not isinstance(record, list) or len(record) < 2:
            raise FormatError(f"{examples}: table {table_id!r}: expected [statements, labels, ...]")
        statements, labels = record[0], record[1]
        if len(statements) != len(labels):
            raise FormatError(
                f"{examples}: table {table_id!r}: {len(statements)} statements vs {len(labels)} labels"
            )
        csv_path = root / "all_csv" / table_id
        if not csv_path.exists():
            raise FormatError(f"missing table file {csv_path}")
        table = parse_delimited(
            csv_path.read_text(encoding="utf-8"), table_id, delimiter="#"
        )
        for i, (statement, label) in enumerate(zip(statements, labels)):
            if label not in (0, 1):
                raise FormatError(f"{examples}: table {table_id!r} statement {i}: label {label!r}")
            instances.append(
                BenchInstance(
                    dataset="tabfact",
                    instance_id=f"{table_id}#{i}",
                    table=table,
                    question=str(statement),
                    gold="entailed" if label == 1 else "refuted",
                )
            )
    return instances


def _load_wikitq(root: Path) -> list[BenchInstance]:
    tsvs = sorted(root.glob("*.tsv")) or sorted((root / "data").glob("*.tsv"))
    if not tsvs:
        raise FormatError(f"no .tsv files under {root}")
    instances: list[BenchInstance] = []
    for tsv in tsvs:
        with open(tsv, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh, delimiter="\t")
            header = next(reader, None)
            if header is None:
                raise FormatError(f"{tsv}: empty file")
            for lineno, row in enumerate(reader, start=2):
                if len(row) != 4:
                    raise FormatError(f"{tsv}:{lineno}: expected 4 columns, got {len(row)}")
                instance_id, utterance, context, target = row
                table_path = root / context
                if not table_path.exists():
                    raise FormatError(f"{tsv}:{lineno}: missing table file {table_path}")
                table = parse_delimited(
                    table_path.read_text(encoding="utf-8"), Path(context).stem
                )
                answers = [a.strip() for a in target.split("|") if a.strip()]
                if not answers:
                    raise FormatError(f"{tsv}:{lineno}: empty targetValue")
                instances.append(
                    BenchInstance(
                        dataset="wikitq",
                        instance_id=instance_id,
                        table=table,
                        question=utterance,
                        gold=answers,
                    )
                )
    return instances


def _load_fetaqa(path: Path) -> list[BenchInstance]:
    if path.is_dir():
        candidates = sorted(path.glob("*.jsonl"))
        if not candidates:
            raise FormatError(f"no .jsonl files under {path}")
        path = candidates[0]
    instances: list[BenchInstance] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(f"{path}:{lineno}: {exc}") from exc
            try:
                feta_id = record["feta_id"]
                array = record["table_array"]
                question = record["question"]
                answer = record["answer"]
            except KeyError as exc:
                raise FormatError(f"{path}:{lineno}: missing key {exc}") from exc
            if not isinstance(array, list) or len(array) < 2:
                raise FormatError(f"{path}:{lineno}: table_array needs a header and rows")
            width = len(array[0])
            for row in array[1:]:
                if len(row) != width:
                    raise FormatError(f"{path}:{lineno}: ragged table_array row")
            table = RawTable(
                name=f"feta_{feta_id}",
                headers=[str(h) for h in array[0]],
                rows=[[str(c) for c in row] for row in array[1:]],
            )
            instances.append(
                BenchInstance(
                    dataset="fetaqa",
                    instance_id=str(feta_id),
                    table=table,
                    question=str(question),
                    gold=str(answer),
                )
            )
    return instances


def load_dataset(kind: str, path: str | Path, limit: Optional[int] = None) -> list[BenchInstance]:
    """Load benchmark instances; ``limit`` keeps the first n."""
    _check_kind(kind)
    root = Path(path)
    if not root.exists():
        raise FormatError(f"dataset path does not exist: {root}")
    if kind == "tabfact":
        instances = _load_tabfact(root)
    elif kind == "wikitq":
        instances = _load_wikitq(root)
    else:
        instances = _load_fetaqa(root)
    if limit is not None:
        instances = instances[: max(0, limit)]
    return instances

"""Table ingestion: parse CSV/TSV, infer column types, generate DDL, clean rows.

Inference walks a fixed candidate ladder per column:

    BOOLEAN -> INTEGER -> REAL -> DATE -> TEXT

A column gets the first candidate that every non-null cell satisfies; TEXT
is the absorbing fallback. BOOLEAN is tried first because ``0``/``1`` would
otherwise match INTEGER. All rows are inspected (desk-scale data), so the
result is deterministic and monotone: adding rows can only move a column
down the ladder, never up.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Optional, Protocol

from .errors import EmptyTable

# Candidate order doubles as the type lattice; position = narrowness.
TYPE_LADDER = ("BOOLEAN", "INTEGER", "REAL", "DATE", "TEXT")

_BOOL_TOKENS = {"true", "false", "yes", "no", "0", "1"}
_TRUE_TOKENS = {"true", "yes", "1"}
_INT_RE = re.compile(r"^[+-]?\d+$")
_REAL_RE = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")
_DATE_RE = re.compile(r"^\d{4}-\d{2}-\d{2}$")
_IDENT_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


@dataclass
class RawTable:
    """A parsed but untyped table: header strings plus string cells."""

    name: str
    headers: list[str]
    rows: list[list[str]]


@dataclass
class ColumnSchema:
    name: str
    inferred_type: str
    nullable: bool = False


@dataclass
class TableSchema:
    table_name: str
    columns: list[ColumnSchema]

    def column_names(self) -> list[str]:
        return [c.name for c in self.columns]


@dataclass
class QualityReport:
    row_count: int = 0
    dropped_rows: int = 0
    coerced_cells: int = 0
    null_cells: int = 0
    warnings: list[str] = field(default_factory=list)


@dataclass
class IngestReport:
    schema: TableSchema
    quality: QualityReport
    loaded_rows: int


class LlmPort(Protocol):
    """Anything with a ``complete``; see :mod:`datafactory.llm`."""

    def complete(self, request): ...


def sanitize_identifier(raw: str) -> str:
    """Lowercase, non-alphanumerics to underscore, collapse repeats.

    Empty or digit-leading results get an underscore prefix so the output
    always matches ``[A-Za-z_][A-Za-z0-9_]*``.
    """
    name = raw.strip().lower()
    name = re.sub(r"[^a-z0-9]+", "_", name)
    name = re.sub(r"_+", "_", name).strip("_")
    if not name:
        return "_"
    if name[0].isdigit():
        name = "_" + name
    return name


def _is_null(cell: str) -> bool:
    return cell.strip() == ""


def _satisfies(cell: str, type_name: str) -> bool:
    v = cell.strip()
    if type_name == "BOOLEAN":
        return v.lower() in _BOOL_TOKENS
    if type_name == "INTEGER":
        return bool(_INT_RE.match(v))
    if type_name == "REAL":
        return bool(_REAL_RE.match(v))
    if type_name == "DATE":
        if not _DATE_RE.match(v):
            return False
        try:
            date.fromisoformat(v)
        except ValueError:
            return False
        return True
    return True  # TEXT


def coerce_cell(cell: Optional[str], type_name: str):
    """Coerce one cell to its column type.

    Returns ``(value, coerced)``: *value* is the typed value or ``None``;
    *coerced* is True when a non-empty cell failed to parse and was nulled.
    """
    if cell is None or _is_null(cell):
        return None, False
    v = cell.strip()
    if not _satisfies(v, type_name):
        return None, True
    if type_name == "BOOLEAN":
        return v.lower() in _TRUE_TOKENS, False
    if type_name == "INTEGER":
        return int(v), False
    if type_name == "REAL":
        return float(v), False
    return v, False  # DATE kept as ISO string, TEXT as-is


def _unique_names(names: list[str]) -> list[str]:
    seen: dict[str, int] = {}
    out = []
    for name in names:
        if name not in seen:
            seen[name] = 0
            out.append(name)
        else:
            seen[name] += 1
            candidate = f"{name}_{seen[name]}"
            while candidate in seen:
                seen[name] += 1
                candidate = f"{name}_{seen[name]}"
            seen[candidate] = 0
            out.append(candidate)
    return out


def infer_schema(raw: RawTable, llm_hint: Optional[LlmPort] = None) -> TableSchema:
    """Assign every column the narrowest ladder type all its cells satisfy.

    ``llm_hint`` is advisory-only and off by default: a provided LLM may
    rename or annotate columns but can never change parse behaviour, so
    inference stays deterministic and offline-testable. The current
    implementation does not consult it at all.
    """
    headers = list(raw.headers)
    if not headers:
        if raw.rows and raw.rows[0]:
            headers = [f"col_{i + 1}" for i in range(len(raw.rows[0]))]
        else:
            raise EmptyTable(f"table {raw.name!r} has no columns")

    names = _unique_names([sanitize_identifier(h) for h in headers])

    columns: list[ColumnSchema] = []
    for idx, name in enumerate(names):
        cells = [row[idx] for row in raw.rows if idx < len(row)]
        non_null = [c for c in cells if not _is_null(c)]
        nullable = len(non_null) < len(cells)
        inferred = "TEXT"
        for candidate in TYPE_LADDER:
            if all(_satisfies(c, candidate) for c in non_null):
                inferred = candidate
                break
        if not non_null:
            inferred = "TEXT"
            nullable = True
        columns.append(ColumnSchema(name=name, inferred_type=inferred, nullable=nullable))

    return TableSchema(table_name=sanitize_identifier(raw.name), columns=columns)


def generate_ddl(schema: TableSchema) -> str:
    """One CREATE TABLE statement, columns in declaration order."""
    cols = ", ".join(f"{c.name} {c.inferred_type}" for c in schema.columns)
    return f"CREATE TABLE {schema.table_name} ({cols});"


def clean_rows(raw: RawTable, schema: TableSchema) -> tuple[list[list], QualityReport]:
    """Coerce cells to schema types; total (never raises on data).

    Whitespace is trimmed, empty strings become null, uncoercible cells
    become null and count as coerced. Rows that end up entirely null are
    dropped. Cleaning is idempotent: rendering the output back to strings
    and cleaning again is a no-op.
    """
    report = QualityReport(row_count=len(raw.rows))
    width = len(schema.columns)
    cleaned: list[list] = []
    for row in raw.rows:
        out_row = []
        for idx, col in enumerate(schema.columns):
            cell = row[idx] if idx < len(row) else None
            value, coerced = coerce_cell(cell, col.inferred_type)
            if coerced:
                report.coerced_cells += 1
            out_row.append(value)
        if all(v is None for v in out_row):
            report.dropped_rows += 1
            continue
        report.null_cells += sum(1 for v in out_row if v is None)
        cleaned.append(out_row)

    if report.dropped_rows:
        report.warnings.append(f"dropped {report.dropped_rows} empty row(s)")
    if report.coerced_cells:
        report.warnings.append(
            f"nulled {report.coerced_cells} cell(s) that did not parse as their column type"
        )
    assert width == len(schema.columns)
    return cleaned, report


def ingest_table(raw: RawTable, store) -> IngestReport:
    """Infer, create, clean, load. No silent overwrite on name collision."""
    schema = infer_schema(raw)
    ddl = generate_ddl(schema)
    rows, quality = clean_rows(raw, schema)
    store.create_table(ddl)
    store.load_rows(schema.table_name, rows)
    return IngestReport(schema=schema, quality=quality, loaded_rows=len(rows))


def read_delimited(path: str | Path, table_name: Optional[str] = None) -> RawTable:
    """Read a CSV (RFC 4180, UTF-8, first row = header) or TSV file."""
    path = Path(path)
    delimiter = "\t" if path.suffix.lower() in (".tsv", ".tab") else ","
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return parse_delimited(fh.read(), table_name or path.stem, delimiter)


def parse_delimited(text: str, table_name: str, delimiter: str = ",") -> RawTable:
    reader = csv.reader(io.StringIO(text), delimiter=delimiter)
    records = [row for row in reader if row]
    if not records:
        raise EmptyTable(f"no rows in {table_name!r}")
    headers = records[0]
    width = len(headers)
    rows = [(row + [""] * width)[:width] for row in records[1:]]
    return RawTable(name=table_name, headers=headers, rows=rows)

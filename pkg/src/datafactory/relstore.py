"""Read-mostly relational port backed by an embedded SQLite engine.

The port exposes exactly three query-surface operations (create_table,
run_select, schema_ddl) plus a row loader. Conformance is defined by the
subset tests, not by the SQLite dialect: single-table SELECT with
projections, aggregates, DISTINCT, WHERE, GROUP BY, HAVING, ORDER BY and
LIMIT. ORDER BY terms are rewritten with ``NULLS LAST`` so ascending sorts
put nulls last (SQLite's native default is nulls-first under ASC).
"""

from __future__ import annotations

import re
import sqlite3
import threading
from dataclasses import dataclass, field

from .errors import NameCollision, NonSelectRejected, SqlSyntaxError, UnknownRelation

_CREATE_RE = re.compile(r"^\s*CREATE\s+TABLE\s+([A-Za-z_][A-Za-z0-9_]*)\s*\(", re.IGNORECASE)


@dataclass
class ResultTable:
    columns: list[str]
    rows: list[list] = field(default_factory=list)

    def __post_init__(self):
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ValueError("row width does not match column count")


def _strip_comments(sql: str) -> str:
    out = []
    i, n = 0, len(sql)
    while i < n:
        ch = sql[i]
        if ch == "'":
            j = i + 1
            while j < n:
                if sql[j] == "'" and not (j + 1 < n and sql[j + 1] == "'"):
                    break
                j += 1
            out.append(sql[i : j + 1])
            i = j + 1
        elif sql.startswith("--", i):
            while i < n and sql[i] != "\n":
                i += 1
        elif sql.startswith("/*", i):
            end = sql.find("*/", i + 2)
            i = n if end == -1 else end + 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def _first_keyword(sql: str) -> str:
    m = re.match(r"\s*([A-Za-z]+)", sql)
    return m.group(1).upper() if m else ""


def _word_at(sql: str, upper: str, i: int, word: str) -> bool:
    if not upper.startswith(word, i):
        return False
    before_ok = i == 0 or not (sql[i - 1].isalnum() or sql[i - 1] == "_")
    after = i + len(word)
    after_ok = after >= len(sql) or not (sql[after].isalnum() or sql[after] == "_")
    return before_ok and after_ok


def _append_nulls_last(sql: str) -> str:
    """Rewrite top-level ORDER BY terms to sort nulls last.

    ASC terms (explicit or implied) get ``NULLS LAST``; DESC already puts
    nulls last in SQLite. Terms inside parentheses or strings are left
    alone, as are terms that spell out their own NULLS handling.
    """
    upper = sql.upper()
    depth = 0
    order_at = -1
    i = 0
    while i < len(sql):
        ch = sql[i]
        if ch == "'":
            j = i + 1
            while j < len(sql) and sql[j] != "'":
                j += 1
            i = j + 1
            continue
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif depth == 0 and _word_at(sql, upper, i, "ORDER") and re.match(r"ORDER\s+BY\b", upper[i:]):
            order_at = i
        i += 1
    if order_at == -1:
        return sql

    clause_start = order_at + len(re.match(r"ORDER\s+BY\s*", upper[order_at:]).group(0))
    # Clause runs to a depth-0 LIMIT or the end of the statement.
    depth = 0
    clause_end = len(sql)
    i = clause_start
    while i < len(sql):
        ch = sql[i]
        if ch == "'":
            j = i + 1
            while j < len(sql) and sql[j] != "'":
                j += 1
            i = j + 1
            continue
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif depth == 0 and _word_at(sql, upper, i, "LIMIT"):
            clause_end = i
            break
        i += 1

    clause = sql[clause_start:clause_end]
    terms, buf, depth = [], [], 0
    for ch in clause:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            terms.append("".join(buf))
            buf = []
        else:
            buf.append(ch)
    terms.append("".join(buf))

    rewritten = []
    for term in terms:
        t = term.strip()
        if not t or re.search(r"\bNULLS\b", t, re.IGNORECASE):
            rewritten.append(t)
        elif re.search(r"\bDESC\s*$", t, re.IGNORECASE):
            rewritten.append(t)
        else:
            rewritten.append(t.rstrip(" ;") + " NULLS LAST")
    tail = sql[clause_end:]
    semicolon = ";" if clause.rstrip().endswith(";") and not tail.strip() else ""
    return sql[:clause_start] + ", ".join(rewritten) + semicolon + (" " + tail.lstrip() if tail.strip() else tail)


class RelStore:
    """In-process SQLite store; one writer, locked shared reads."""

    def __init__(self, path: str = ":memory:"):
        self._conn = sqlite3.connect(path, check_same_thread=False)
        self._lock = threading.Lock()

    # -- schema ---------------------------------------------------------

    def create_table(self, ddl: str) -> None:
        ddl = _strip_comments(ddl).strip()
        match = _CREATE_RE.match(ddl)
        if not match:
            raise SqlSyntaxError(f"expected a single CREATE TABLE statement, got: {ddl[:80]!r}")
        name = match.group(1)
        with self._lock:
            if self._table_exists(name):
                raise NameCollision(f"table {name!r} already exists")
            try:
                self._conn.execute(ddl.rstrip(";"))
                self._conn.commit()
            except (sqlite3.Error, sqlite3.Warning) as exc:
                raise SqlSyntaxError(str(exc)) from exc

    def _table_exists(self, name: str) -> bool:
        cur = self._conn.execute(
            "SELECT 1 FROM sqlite_master WHERE type='table' AND lower(name)=lower(?)", (name,)
        )
        return cur.fetchone() is not None

    def load_rows(self, table: str, rows: list[list]) -> int:
        with self._lock:
            if not self._table_exists(table):
                raise UnknownRelation(f"no such table: {table}")
            if not rows:
                return 0
            placeholders = ", ".join("?" * len(rows[0]))
            try:
                self._conn.executemany(f"INSERT INTO {table} VALUES ({placeholders})", rows)
                self._conn.commit()
            except sqlite3.Error as exc:
                raise SqlSyntaxError(str(exc)) from exc
            return len(rows)

    def tables(self) -> list[str]:
        with self._lock:
            cur = self._conn.execute(
                "SELECT name FROM sqlite_master WHERE type='table' ORDER BY name"
            )
            return [r[0] for r in cur.fetchall()]

    def table_schema(self, table: str) -> list[tuple[str, str]]:
        """(column, declared type) pairs in declaration order."""
        with self._lock:
            cur = self._conn.execute(f"PRAGMA table_info({table})")
            info = cur.fetchall()
        if not info:
            raise UnknownRelation(f"no such table: {table}")
        return [(row[1], row[2]) for row in info]

    def schema_ddl(self) -> list[str]:
        """One canonical CREATE TABLE per table, sorted by table name."""
        out = []
        for table in self.tables():
            cols = ", ".join(f"{name} {ctype}" for name, ctype in self.table_schema(table))
            out.append(f"CREATE TABLE {table} ({cols});")
        return out

    # -- querying ----------------------------------------------------------

    def run_select(self, sql: str) -> ResultTable:
        """Execute one SELECT; anything else is rejected before the engine.

        Engine error text is preserved verbatim in the raised message so
        agents can feed it back to the LLM for query repair.
        """
        bare = _strip_comments(sql)
        if _first_keyword(bare) != "SELECT":
            raise NonSelectRejected(
                f"only SELECT statements are accepted, got {_first_keyword(bare) or 'empty input'!r}"
            )
        rewritten = _append_nulls_last(bare)
        with self._lock:
            try:
                cur = self._conn.execute(rewritten.rstrip().rstrip(";"))
                rows = [list(r) for r in cur.fetchall()]
                columns = [d[0] for d in cur.description] if cur.description else []
            except sqlite3.Warning as exc:
                raise NonSelectRejected(str(exc)) from exc
            except sqlite3.Error as exc:
                message = str(exc)
                if "no such table" in message:
                    raise UnknownRelation(message) from exc
                raise SqlSyntaxError(message) from exc
        return ResultTable(columns=columns, rows=rows)

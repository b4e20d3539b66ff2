"""Shared fixtures: a small staff table and the graph built from it."""

from __future__ import annotations

import pytest

from datafactory.ingest import clean_rows, generate_ddl, infer_schema, parse_delimited
from datafactory.kgbuild.build import SourceTable, build_graph
from datafactory.kgbuild.config import EntitySchema, RelationshipRule, SplitConfig
from datafactory.relstore import RelStore

STAFF_CSV = """name,city,dept,skills,age
Ada,Paris,R&D,"python,sql",35
Bo,Lyon,R&D,go,28
Ada,Paris,Sales,excel,35
Dee,Paris,,python,41
"""

FIXED_TIME = "2026-01-05T00:00:00+00:00"


@pytest.fixture
def staff_raw():
    return parse_delimited(STAFF_CSV, "staff")


@pytest.fixture
def staff_store(staff_raw):
    store = RelStore()
    schema = infer_schema(staff_raw)
    rows, _ = clean_rows(staff_raw, schema)
    store.create_table(generate_ddl(schema))
    store.load_rows(schema.table_name, rows)
    return store


def staff_kg_config():
    schemas = [
        EntitySchema("person", id_columns=["name"], attr_columns=["name", "city", "age"]),
        EntitySchema("city", id_columns=["city"], attr_columns=["city"]),
        EntitySchema("skill", split=SplitConfig(source_column="skills")),
    ]
    rules = [
        RelationshipRule("lives_in", "person", "city", "intra_row"),
        RelationshipRule("has_skill", "person", "skill", "intra_row"),
        RelationshipRule("colleague", "person", "person", "cross_row", group_columns=["dept"]),
    ]
    return schemas, rules


@pytest.fixture
def staff_source(staff_raw):
    schema = infer_schema(staff_raw)
    rows, _ = clean_rows(staff_raw, schema)
    return SourceTable(name="staff", columns=schema.column_names(), rows=rows)


@pytest.fixture
def staff_graph(staff_source):
    schemas, rules = staff_kg_config()
    return build_graph(staff_source, schemas, rules, created_at=FIXED_TIME)

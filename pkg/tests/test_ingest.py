import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from datafactory.errors import EmptyTable
from datafactory.ingest import (
    RawTable,
    clean_rows,
    coerce_cell,
    generate_ddl,
    infer_schema,
    ingest_table,
    parse_delimited,
    read_delimited,
    sanitize_identifier,
)
from datafactory.relstore import RelStore


class TestSanitizeIdentifier:
    @pytest.mark.parametrize(
        "raw,expected",
        [
            ("Name", "name"),
            ("Unit Price ($)", "unit_price"),
            ("  spaced  out  ", "spaced_out"),
            ("2024 sales", "_2024_sales"),
            ("___", "_"),
            ("", "_"),
            ("already_fine", "already_fine"),
        ],
    )
    def test_cases(self, raw, expected):
        assert sanitize_identifier(raw) == expected

    @settings(max_examples=200, deadline=None)
    @given(st.text(max_size=30))
    def test_always_valid_identifier(self, raw):
        name = sanitize_identifier(raw)
        assert name[0].isalpha() or name[0] == "_"
        assert all(c.isalnum() or c == "_" for c in name)


class TestParseDelimited:
    def test_quoted_commas_survive(self):
        raw = parse_delimited('a,b\n"x, y",2\n', "t")
        assert raw.rows == [["x, y", "2"]]

    def test_ragged_rows_are_padded_and_clipped(self):
        raw = parse_delimited("a,b\n1\n1,2,3\n", "t")
        assert raw.rows == [["1", ""], ["1", "2"]]

    def test_empty_input_rejected(self):
        with pytest.raises(EmptyTable):
            parse_delimited("", "t")

    def test_tsv_suffix_switches_delimiter(self, tmp_path):
        path = tmp_path / "data.tsv"
        path.write_text("a\tb\n1\t2\n", encoding="utf-8")
        raw = read_delimited(path)
        assert raw.name == "data"
        assert raw.rows == [["1", "2"]]


class TestInferSchema:
    def test_ladder_types(self):
        raw = RawTable(
            "t",
            ["flag", "n", "x", "day", "label"],
            [
                ["true", "3", "1.5", "2024-01-31", "hi"],
                ["no", "-2", "2e3", "2023-12-01", "4x"],
            ],
        )
        types = [c.inferred_type for c in infer_schema(raw).columns]
        assert types == ["BOOLEAN", "INTEGER", "REAL", "DATE", "TEXT"]

    def test_zero_one_column_is_boolean_not_integer(self):
        raw = RawTable("t", ["bit"], [["0"], ["1"]])
        assert infer_schema(raw).columns[0].inferred_type == "BOOLEAN"

    def test_one_bad_cell_demotes_the_column(self):
        raw = RawTable("t", ["n"], [["1"], ["2"], ["2.5"]])
        assert infer_schema(raw).columns[0].inferred_type == "REAL"

    def test_invalid_calendar_date_is_text(self):
        raw = RawTable("t", ["day"], [["2024-02-30"]])
        assert infer_schema(raw).columns[0].inferred_type == "TEXT"

    def test_nulls_do_not_affect_type_but_set_nullable(self):
        raw = RawTable("t", ["n"], [["1"], [""], ["3"]])
        col = infer_schema(raw).columns[0]
        assert col.inferred_type == "INTEGER"
        assert col.nullable

    def test_all_null_column_is_nullable_text(self):
        raw = RawTable("t", ["v"], [[""], ["  "]])
        col = infer_schema(raw).columns[0]
        assert col.inferred_type == "TEXT"
        assert col.nullable

    def test_duplicate_headers_deduplicated(self):
        raw = RawTable("t", ["a", "A", "a"], [["1", "2", "3"]])
        assert infer_schema(raw).column_names() == ["a", "a_1", "a_2"]

    def test_missing_headers_synthesized(self):
        raw = RawTable("t", [], [["1", "2"]])
        assert infer_schema(raw).column_names() == ["col_1", "col_2"]

    def test_no_columns_rejected(self):
        with pytest.raises(EmptyTable):
            infer_schema(RawTable("t", [], []))

    def test_adding_rows_only_widens(self):
        # monotonicity: extra data can only move a column down the ladder
        ladder = ["BOOLEAN", "INTEGER", "REAL", "DATE", "TEXT"]
        base = RawTable("t", ["v"], [["1"]])
        wider = RawTable("t", ["v"], [["1"], ["2.5"]])
        i = ladder.index(infer_schema(base).columns[0].inferred_type)
        j = ladder.index(infer_schema(wider).columns[0].inferred_type)
        assert j >= i


class TestCoerceCell:
    @pytest.mark.parametrize(
        "cell,type_name,expected",
        [
            ("yes", "BOOLEAN", True),
            ("0", "BOOLEAN", False),
            (" 42 ", "INTEGER", 42),
            ("2e2", "REAL", 200.0),
            ("2024-05-06", "DATE", "2024-05-06"),
            ("plain", "TEXT", "plain"),
        ],
    )
    def test_valid_cells(self, cell, type_name, expected):
        assert coerce_cell(cell, type_name) == (expected, False)

    def test_null_cell_is_not_coercion(self):
        assert coerce_cell("   ", "INTEGER") == (None, False)
        assert coerce_cell(None, "INTEGER") == (None, False)

    def test_unparseable_cell_nulled_and_flagged(self):
        assert coerce_cell("abc", "INTEGER") == (None, True)


class TestCleanRows:
    def test_quality_report_counts(self):
        raw = RawTable("t", ["n", "s"], [["1", "x"], ["bad", ""], ["", ""]])
        schema = infer_schema(RawTable("t", ["n", "s"], [["1", "x"]]))
        rows, report = clean_rows(raw, schema)
        assert rows == [[1, "x"]]
        assert report.row_count == 3
        assert report.dropped_rows == 2  # "bad" nulled, leaving both rows empty
        assert report.coerced_cells == 1
        assert len(report.warnings) == 2

    def test_cleaning_is_idempotent(self):
        raw = RawTable("t", ["n", "s"], [[" 1 ", " pad "], ["2", ""]])
        schema = infer_schema(raw)
        rows, _ = clean_rows(raw, schema)
        rendered = [["" if v is None else str(v) for v in row] for row in rows]
        again, report = clean_rows(RawTable("t", ["n", "s"], rendered), schema)
        assert again == rows
        assert report.coerced_cells == 0


class TestIngestTable:
    def test_end_to_end_load(self):
        raw = parse_delimited("name,age\nAda,35\nBo,28\n", "people")
        store = RelStore()
        report = ingest_table(raw, store)
        assert report.loaded_rows == 2
        assert generate_ddl(report.schema) == "CREATE TABLE people (name TEXT, age INTEGER);"
        result = store.run_select("SELECT name FROM people ORDER BY age")
        assert result.rows == [["Bo"], ["Ada"]]

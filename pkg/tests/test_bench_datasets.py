import json

import pytest

from datafactory.bench.datasets import BenchInstance, load_dataset
from datafactory.errors import FormatError


def write_tabfact(root, mapping=None, tables=None):
    mapping = mapping if mapping is not None else {
        "2-100.html.csv": [["paris is the largest", "lyon is the largest"], [1, 0], "cities"],
        "1-50.html.csv": [["ada is 35"], [1], "staff"],
    }
    tables = tables if tables is not None else {
        "2-100.html.csv": "city#pop\nparis#9\nlyon#2\n",
        "1-50.html.csv": "name#age\nada#35\n",
    }
    (root / "all_csv").mkdir(parents=True)
    (root / "total_examples.json").write_text(json.dumps(mapping), encoding="utf-8")
    for name, text in tables.items():
        (root / "all_csv" / name).write_text(text, encoding="utf-8")


def write_wikitq(root):
    (root / "csv").mkdir(parents=True)
    (root / "csv" / "t1.csv").write_text("name,age\nada,35\nbo,28\n", encoding="utf-8")
    lines = [
        "id\tutterance\tcontext\ttargetValue",
        "nt-1\thow old is ada?\tcsv/t1.csv\t35",
        "nt-2\twho is listed?\tcsv/t1.csv\tada|bo",
    ]
    (root / "pristine.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_fetaqa(path):
    records = [
        {
            "feta_id": 101,
            "table_array": [["name", "age"], ["ada", "35"]],
            "question": "how old is ada?",
            "answer": "Ada is 35 years old.",
        },
        {
            "feta_id": 102,
            "table_array": [["city"], ["paris"], ["lyon"]],
            "question": "which cities?",
            "answer": "Paris and Lyon are listed.",
        },
    ]
    path.write_text("\n".join(json.dumps(r) for r in records) + "\n", encoding="utf-8")


class TestTabfact:
    def test_golden_parse(self, tmp_path):
        write_tabfact(tmp_path)
        instances = load_dataset("tabfact", tmp_path)
        # sorted by table id, then statement index
        assert [i.instance_id for i in instances] == [
            "1-50.html.csv#0",
            "2-100.html.csv#0",
            "2-100.html.csv#1",
        ]
        first = instances[0]
        assert isinstance(first, BenchInstance)
        assert first.dataset == "tabfact"
        assert first.question == "ada is 35"
        assert first.gold == "entailed"
        assert first.table.headers == ["name", "age"]
        assert first.table.rows == [["ada", "35"]]
        assert instances[2].gold == "refuted"

    def test_split_examples_file_accepted(self, tmp_path):
        write_tabfact(tmp_path)
        (tmp_path / "total_examples.json").rename(tmp_path / "test_examples.json")
        assert len(load_dataset("tabfact", tmp_path)) == 3

    def test_missing_table_file(self, tmp_path):
        write_tabfact(tmp_path)
        (tmp_path / "all_csv" / "1-50.html.csv").unlink()
        with pytest.raises(FormatError, match="missing table file"):
            load_dataset("tabfact", tmp_path)

    def test_label_statement_mismatch(self, tmp_path):
        mapping = {"1-50.html.csv": [["a", "b"], [1], "cap"]}
        write_tabfact(tmp_path, mapping=mapping, tables={"1-50.html.csv": "x#y\n1#2\n"})
        with pytest.raises(FormatError, match="statements vs"):
            load_dataset("tabfact", tmp_path)

    def test_non_binary_label(self, tmp_path):
        mapping = {"1-50.html.csv": [["a"], [2], "cap"]}
        write_tabfact(tmp_path, mapping=mapping, tables={"1-50.html.csv": "x#y\n1#2\n"})
        with pytest.raises(FormatError, match="label"):
            load_dataset("tabfact", tmp_path)

    def test_empty_directory(self, tmp_path):
        with pytest.raises(FormatError, match="no tabfact examples json"):
            load_dataset("tabfact", tmp_path)


class TestWikitq:
    def test_golden_parse(self, tmp_path):
        write_wikitq(tmp_path)
        instances = load_dataset("wikitq", tmp_path)
        assert [i.instance_id for i in instances] == ["nt-1", "nt-2"]
        assert instances[0].gold == ["35"]
        assert instances[1].gold == ["ada", "bo"]
        assert instances[0].table.name == "t1"
        assert instances[0].table.rows == [["ada", "35"], ["bo", "28"]]

    def test_tsvs_found_under_data_subdir(self, tmp_path):
        write_wikitq(tmp_path)
        (tmp_path / "data").mkdir()
        (tmp_path / "pristine.tsv").rename(tmp_path / "data" / "pristine.tsv")
        assert len(load_dataset("wikitq", tmp_path)) == 2

    def test_ragged_row_rejected_with_location(self, tmp_path):
        write_wikitq(tmp_path)
        with open(tmp_path / "pristine.tsv", "a", encoding="utf-8") as fh:
            fh.write("nt-3\tonly three\tcsv/t1.csv\n")
        with pytest.raises(FormatError, match=r"pristine\.tsv:4: expected 4 columns"):
            load_dataset("wikitq", tmp_path)

    def test_missing_context_table(self, tmp_path):
        write_wikitq(tmp_path)
        (tmp_path / "csv" / "t1.csv").unlink()
        with pytest.raises(FormatError, match="missing table file"):
            load_dataset("wikitq", tmp_path)

    def test_empty_target_rejected(self, tmp_path):
        write_wikitq(tmp_path)
        lines = [
            "id\tutterance\tcontext\ttargetValue",
            "nt-1\tq\tcsv/t1.csv\t ",
        ]
        (tmp_path / "pristine.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")
        with pytest.raises(FormatError, match="empty targetValue"):
            load_dataset("wikitq", tmp_path)

    def test_no_tsvs(self, tmp_path):
        with pytest.raises(FormatError, match="no .tsv files"):
            load_dataset("wikitq", tmp_path)


class TestFetaqa:
    def test_golden_parse(self, tmp_path):
        path = tmp_path / "test.jsonl"
        write_fetaqa(path)
        instances = load_dataset("fetaqa", path)
        assert [i.instance_id for i in instances] == ["101", "102"]
        assert instances[0].gold == "Ada is 35 years old."
        assert instances[0].table.name == "feta_101"
        assert instances[1].table.headers == ["city"]
        assert instances[1].table.rows == [["paris"], ["lyon"]]

    def test_directory_resolves_to_first_jsonl(self, tmp_path):
        write_fetaqa(tmp_path / "a.jsonl")
        assert len(load_dataset("fetaqa", tmp_path)) == 2

    def test_blank_lines_skipped(self, tmp_path):
        path = tmp_path / "test.jsonl"
        write_fetaqa(path)
        path.write_text(path.read_text(encoding="utf-8") + "\n\n", encoding="utf-8")
        assert len(load_dataset("fetaqa", path)) == 2

    def test_bad_json_line_located(self, tmp_path):
        path = tmp_path / "test.jsonl"
        path.write_text('{"feta_id": 1}\nnot json\n', encoding="utf-8")
        with pytest.raises(FormatError, match=r"test\.jsonl:1: missing key"):
            load_dataset("fetaqa", path)

    def test_json_decode_error_located(self, tmp_path):
        path = tmp_path / "test.jsonl"
        path.write_text("not json\n", encoding="utf-8")
        with pytest.raises(FormatError, match=r"test\.jsonl:1"):
            load_dataset("fetaqa", path)

    def test_ragged_table_array_rejected(self, tmp_path):
        path = tmp_path / "test.jsonl"
        record = {
            "feta_id": 1,
            "table_array": [["a", "b"], ["only one"]],
            "question": "q",
            "answer": "a",
        }
        path.write_text(json.dumps(record) + "\n", encoding="utf-8")
        with pytest.raises(FormatError, match="ragged"):
            load_dataset("fetaqa", path)

    def test_header_only_table_rejected(self, tmp_path):
        path = tmp_path / "test.jsonl"
        record = {"feta_id": 1, "table_array": [["a"]], "question": "q", "answer": "a"}
        path.write_text(json.dumps(record) + "\n", encoding="utf-8")
        with pytest.raises(FormatError, match="header and rows"):
            load_dataset("fetaqa", path)


class TestLoadDataset:
    def test_unknown_kind(self, tmp_path):
        with pytest.raises(FormatError, match="unknown dataset kind"):
            load_dataset("squad", tmp_path)

    def test_missing_path(self, tmp_path):
        with pytest.raises(FormatError, match="does not exist"):
            load_dataset("tabfact", tmp_path / "ghost")

    def test_limit_keeps_prefix(self, tmp_path):
        write_tabfact(tmp_path)
        instances = load_dataset("tabfact", tmp_path, limit=2)
        assert [i.instance_id for i in instances] == ["1-50.html.csv#0", "2-100.html.csv#0"]

    def test_limit_zero(self, tmp_path):
        write_tabfact(tmp_path)
        assert load_dataset("tabfact", tmp_path, limit=0) == []

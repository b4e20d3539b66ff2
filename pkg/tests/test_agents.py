import pytest

from conftest import staff_kg_config
from datafactory.agents import (
    ChartSpec,
    DatabaseTeam,
    KnowledgeGraphTeam,
    analyze_result,
    assemble_context,
    generate_cypher,
    generate_sql,
    make_chart_spec,
    parse_chart_spec,
    result_digest,
)
from datafactory.errors import GenerationFailed, ProviderError
from datafactory.kgbuild.build import build_graph
from datafactory.llm import ReplayLlm
from datafactory.memory import QaRecordStore
from datafactory.relstore import ResultTable
from datafactory.textutil import extract_fenced, truncate


def fenced(lang, body):
    return f"Here you go:\n```{lang}\n{body}\n```"


class TestExtractFenced:
    def test_prefers_matching_language(self):
        text = "```text\nnope\n```\n```sql\nSELECT 1\n```"
        assert extract_fenced(text, ("sql",)) == "SELECT 1"

    def test_untagged_block_is_fallback(self):
        assert extract_fenced("```\nSELECT 2\n```", ("sql",)) == "SELECT 2"

    def test_no_block_returns_none(self):
        assert extract_fenced("just prose", ("sql",)) is None

    def test_without_language_filter_first_block_wins(self):
        text = "```python\na\n```\n```sql\nb\n```"
        assert extract_fenced(text) == "a"

    def test_truncate(self):
        assert truncate("abcdef", 6) == "abcdef"
        assert truncate("abcdefg", 6) == "abc..."


class TestResultDigest:
    def test_rows_and_columns_summarized(self):
        table = ResultTable(["a", "b"], [[1, None], [2, "x"]])
        assert result_digest(table) == "2 rows [a, b]: (1, null); (2, x)"

    def test_limit_caps_preview(self):
        table = ResultTable(["n"], [[i] for i in range(10)])
        assert result_digest(table, limit=2) == "10 rows [n]: (0); (1)"

    def test_empty_result(self):
        assert result_digest(ResultTable(["n"], [])) == "0 rows [n]"

    def test_singular_row(self):
        assert result_digest(ResultTable(["n"], [[5]])) == "1 row [n]: (5)"


class TestAssembleContext:
    def test_sql_context_includes_ddl(self, staff_store):
        mem = QaRecordStore()
        ctx = assemble_context("who?", "sql", staff_store, None, mem)
        assert "CREATE TABLE staff" in ctx.schema_text
        assert ctx.shots == []

    def test_shots_come_from_memory(self, staff_store):
        mem = QaRecordStore()
        llm = ReplayLlm([fenced("sql", "SELECT name FROM staff"), "fine", fenced("sql", "SELECT age FROM staff"), "fine"])
        ctx = assemble_context("names", "sql", staff_store, None, mem)
        generate_sql(ctx, llm, staff_store, mem)
        ctx2 = assemble_context("ages", "sql", staff_store, None, mem)
        assert ctx2.shots == [("names", "SELECT name FROM staff")]

    def test_cypher_context_renders_graph_schema(self, staff_graph):
        mem = QaRecordStore()
        ctx = assemble_context("who?", "cypher", None, staff_graph, mem)
        assert "person" in ctx.schema_text
        assert "lives_in" in ctx.schema_text


class TestGenerateSql:
    def test_valid_query_returned_and_recorded(self, staff_store):
        mem = QaRecordStore()
        llm = ReplayLlm([fenced("sql", "SELECT name FROM staff ORDER BY name")])
        ctx = assemble_context("names", "sql", staff_store, None, mem)
        sql = generate_sql(ctx, llm, staff_store, mem)
        assert sql == "SELECT name FROM staff ORDER BY name"
        assert [r.query_kind for r in mem.records()] == ["sql"]

    def test_repair_round_fixes_bad_sql(self, staff_store):
        mem = QaRecordStore()
        llm = ReplayLlm([fenced("sql", "SELECT nope FROM staff"), fenced("sql", "SELECT name FROM staff")])
        ctx = assemble_context("names", "sql", staff_store, None, mem)
        assert generate_sql(ctx, llm, staff_store, mem) == "SELECT name FROM staff"
        # the repair turn must carry the engine error back to the model
        repair_messages = llm.calls[1].messages
        assert len(repair_messages) == 3
        assert "failed" in repair_messages[2].content

    def test_missing_fence_triggers_repair(self, staff_store):
        mem = QaRecordStore()
        llm = ReplayLlm(["SELECT name FROM staff", fenced("sql", "SELECT name FROM staff")])
        ctx = assemble_context("names", "sql", staff_store, None, mem)
        assert generate_sql(ctx, llm, staff_store, mem) == "SELECT name FROM staff"
        assert "no fenced query block" in llm.calls[1].messages[2].content

    def test_budget_exhaustion_raises(self, staff_store):
        mem = QaRecordStore()
        llm = ReplayLlm([fenced("sql", "SELECT nope FROM staff"), fenced("sql", "DROP TABLE staff")])
        ctx = assemble_context("names", "sql", staff_store, None, mem)
        with pytest.raises(GenerationFailed):
            generate_sql(ctx, llm, staff_store, mem)
        assert len(mem) == 0


class TestGenerateCypher:
    def test_valid_query_recorded(self, staff_graph):
        mem = QaRecordStore()
        llm = ReplayLlm([fenced("cypher", "MATCH (p:person) RETURN p")])
        ctx = assemble_context("people", "cypher", None, staff_graph, mem)
        query = generate_cypher(ctx, llm, staff_graph, mem)
        assert query == "MATCH (p:person) RETURN p"
        assert [r.query_kind for r in mem.records()] == ["cypher"]

    def test_parse_error_repaired(self, staff_graph):
        mem = QaRecordStore()
        llm = ReplayLlm([fenced("cypher", "MATCH (p:person RETURN p"), fenced("cypher", "MATCH (p:person) RETURN p")])
        ctx = assemble_context("people", "cypher", None, staff_graph, mem)
        assert generate_cypher(ctx, llm, staff_graph, mem) == "MATCH (p:person) RETURN p"


class TestAnalyzeResult:
    def test_result_rows_reach_the_prompt(self):
        llm = ReplayLlm(["two people"])
        table = ResultTable(["name"], [["Ada"], ["Bo"]])
        assert analyze_result("who?", table, llm, query="SELECT name FROM staff") == "two people"
        prompt = llm.calls[0].messages[0].content
        assert "Ada" in prompt and "Bo" in prompt
        assert "SELECT name FROM staff" in prompt

    def test_row_cap_truncates(self):
        llm = ReplayLlm(["big"])
        table = ResultTable(["n"], [[i] for i in range(60)])
        analyze_result("count?", table, llm)
        prompt = llm.calls[0].messages[0].content
        assert "... truncated, 10 more rows omitted" in prompt
        assert "59" not in prompt

    def test_custom_cap(self):
        llm = ReplayLlm(["big"])
        table = ResultTable(["n"], [[i] for i in range(5)])
        analyze_result("count?", table, llm, row_cap=2)
        assert "... truncated, 3 more rows omitted" in llm.calls[0].messages[0].content

    def test_empty_result_gets_directive(self):
        llm = ReplayLlm(["nothing found"])
        analyze_result("who?", ResultTable(["n"], []), llm)
        prompt = llm.calls[0].messages[0].content
        assert "no matching data" in prompt
        assert "(no rows)" in prompt


class TestParseChartSpec:
    COLUMNS = ["city", "total"]

    def test_fenced_json(self):
        text = fenced("json", '{"kind": "bar", "x": "city", "y": "total", "title": "t"}')
        spec = parse_chart_spec(text, self.COLUMNS)
        assert spec == ChartSpec(kind="bar", x="city", y="total", title="t")

    def test_bare_json(self):
        spec = parse_chart_spec('{"kind": "pie", "x": "city", "y": "total"}', self.COLUMNS)
        assert spec is not None and spec.kind == "pie"

    def test_series_must_be_a_column(self):
        doc = '{"kind": "line", "x": "city", "y": "total", "series": "ghost"}'
        assert parse_chart_spec(doc, self.COLUMNS) is None

    def test_valid_series(self):
        doc = '{"kind": "line", "x": "city", "y": "total", "series": "city"}'
        spec = parse_chart_spec(doc, self.COLUMNS)
        assert spec is not None and spec.series == "city"

    @pytest.mark.parametrize(
        "doc",
        [
            "not json at all",
            '{"kind": "sunburst", "x": "city", "y": "total"}',
            '{"kind": "bar", "x": "ghost", "y": "total"}',
            '{"kind": "bar", "x": "city", "y": "ghost"}',
            '{"kind": "bar", "x": "city"}',
            '[1, 2]',
        ],
    )
    def test_invalid_specs_rejected(self, doc):
        assert parse_chart_spec(doc, self.COLUMNS) is None


class TestMakeChartSpec:
    def test_happy_path(self):
        llm = ReplayLlm([fenced("json", '{"kind": "bar", "x": "city", "y": "total"}')])
        table = ResultTable(["city", "total"], [["Paris", 3], ["Lyon", 1]])
        spec = make_chart_spec("by city?", table, llm)
        assert spec == ChartSpec(kind="bar", x="city", y="total")

    def test_single_column_skipped(self):
        llm = ReplayLlm([])
        assert make_chart_spec("q", ResultTable(["n"], [[1]]), llm) is None
        assert llm.calls == []

    def test_empty_result_skipped(self):
        llm = ReplayLlm([])
        assert make_chart_spec("q", ResultTable(["a", "b"], []), llm) is None

    def test_llm_failure_degrades_to_none(self):
        class FailingLlm:
            total_usage = None

            def complete(self, request):
                raise ProviderError(500, "down")

        table = ResultTable(["a", "b"], [[1, 2]])
        assert make_chart_spec("q", table, FailingLlm()) is None

    def test_bad_spec_degrades_to_none(self):
        llm = ReplayLlm(["no chart makes sense here"])
        table = ResultTable(["a", "b"], [[1, 2]])
        assert make_chart_spec("q", table, llm) is None


class TestDatabaseTeam:
    def test_run_produces_full_result(self, staff_store):
        llm = ReplayLlm(
            [
                fenced("sql", "SELECT city, COUNT(*) AS total FROM staff GROUP BY city ORDER BY city"),
                "Paris dominates.",
                fenced("json", '{"kind": "bar", "x": "city", "y": "total"}'),
            ]
        )
        team = DatabaseTeam(staff_store, QaRecordStore(), llm)
        out = team.run("staff per city?")
        assert out.result.rows == [["Lyon", 1], ["Paris", 3]]
        assert out.analysis == "Paris dominates."
        assert out.chart == ChartSpec(kind="bar", x="city", y="total")
        assert out.bound_ids == []

    def test_memory_grows_after_run(self, staff_store):
        mem = QaRecordStore()
        llm = ReplayLlm([fenced("sql", "SELECT name FROM staff"), "ok", "not a chart"])
        DatabaseTeam(staff_store, mem, llm).run("names?")
        assert len(mem.records("sql")) == 1


class TestKnowledgeGraphTeam:
    def test_run_collects_bound_entity_ids(self, staff_graph):
        llm = ReplayLlm(
            [
                fenced("cypher", "MATCH (p:person)-[:lives_in]->(c:city) RETURN p, c"),
                "Everyone lives in Paris or Lyon.",
            ]
        )
        team = KnowledgeGraphTeam(staff_graph, QaRecordStore(), llm)
        out = team.run("who lives where?")
        assert out.chart is None
        assert "person:Ada" in out.bound_ids
        assert "city:Paris" in out.bound_ids
        # deduped, order of first appearance
        assert len(out.bound_ids) == len(set(out.bound_ids))

    def test_non_entity_values_not_bound(self, staff_source):
        schemas, rules = staff_kg_config()
        graph = build_graph(staff_source, schemas, rules)
        llm = ReplayLlm([fenced("cypher", "MATCH (p:person) RETURN p.age"), "ages listed"])
        out = KnowledgeGraphTeam(graph, QaRecordStore(), llm).run("ages?")
        assert out.bound_ids == []

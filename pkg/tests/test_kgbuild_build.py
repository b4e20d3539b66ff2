import random

import pytest

from datafactory.errors import ConfigInvalid, IdMismatch, MissingIdValue
from datafactory.kgbuild.build import (
    SourceTable,
    build_graph,
    compose_id,
    eval_rule_expr,
    group_rows,
    make_entity_id,
    merge_entities,
    split_cell,
)
from datafactory.kgbuild.config import (
    And,
    AttrCompare,
    EntitySchema,
    Or,
    RelationshipRule,
    Similarity,
    SplitConfig,
)
from datafactory.kgbuild.graph import Entity

from conftest import FIXED_TIME, staff_kg_config
from kg_oracle import (
    graphs_equal,
    merge_law_violations,
    oracle_build,
    random_case,
    random_entity_pair,
    toy_embed,
)


class TestEntityIds:
    @pytest.mark.parametrize(
        "values,expected",
        [
            (["Ada"], "person:Ada"),
            (["  Ada  "], "person:Ada"),
            ([True], "person:true"),
            ([3], "person:3"),
            ([2.5], "person:2.5"),
            (["Ada", 35], "person:Ada:35"),
        ],
    )
    def test_compose_id(self, values, expected):
        assert compose_id("person", values) == expected

    def test_namespace_prefixes(self):
        assert compose_id("person", ["Ada"], namespace="hr") == "hr:person:Ada"

    @pytest.mark.parametrize("values", [[None], [""], ["   "], []])
    def test_missing_identity_raises(self, values):
        with pytest.raises(MissingIdValue):
            compose_id("person", values)

    def test_make_entity_id_rejects_split_schema(self):
        schema = EntitySchema("skill", split=SplitConfig("skills"))
        with pytest.raises(MissingIdValue):
            make_entity_id({"skills": "a"}, schema)


class TestSplitCell:
    @pytest.mark.parametrize(
        "cell,expected",
        [
            ("a,b", ["a", "b"]),
            ("a, b ;c", ["a", "b", "c"]),
            ("a,,b", ["a", "b"]),
            ("  ", []),
            ("a|a", ["a", "a"]),
        ],
    )
    def test_cases(self, cell, expected):
        assert split_cell(cell, (",", ";", "|")) == expected


class TestMergeEntities:
    def base(self, attrs, rows=(0,)):
        full = dict(attrs)
        full.update(
            {
                "meta.source_table": "t",
                "meta.source_rows": list(rows),
                "meta.created_at": FIXED_TIME,
            }
        )
        return Entity("p:1", "p", full)

    def test_non_null_overrides_null(self):
        a = self.base({"custom.city": None})
        b = self.base({"custom.city": "Paris"}, rows=(1,))
        merged, conflicts = merge_entities(a, b)
        assert merged.attrs["custom.city"] == "Paris"
        assert conflicts == []

    def test_first_occurrence_wins_and_conflict_logged(self):
        a = self.base({"custom.city": "Paris"})
        b = self.base({"custom.city": "Lyon"}, rows=(2,))
        merged, conflicts = merge_entities(a, b)
        assert merged.attrs["custom.city"] == "Paris"
        assert conflicts == [{"attr": "custom.city", "kept": "Paris", "dropped": "Lyon"}]
        assert merged.attrs["meta.conflicts"] == conflicts
        assert merged.attrs["meta.source_rows"] == [0, 2]

    def test_self_merge_is_a_no_op(self):
        a = self.base({"custom.city": "Paris", "custom.age": 35})
        merged, conflicts = merge_entities(a, a)
        assert conflicts == []
        assert merged.attrs["custom.city"] == "Paris"
        assert "meta.conflicts" not in merged.attrs

    def test_conflict_logs_accumulate_across_merges(self):
        a = self.base({"custom.city": "Paris"})
        b = self.base({"custom.city": "Lyon"}, rows=(1,))
        c = self.base({"custom.city": "Nice"}, rows=(2,))
        ab, _ = merge_entities(a, b)
        abc, _ = merge_entities(ab, c)
        assert [d["dropped"] for d in abc.attrs["meta.conflicts"]] == ["Lyon", "Nice"]
        assert abc.attrs["meta.source_rows"] == [0, 1, 2]

    @pytest.mark.parametrize(
        "other",
        [Entity("p:2", "p", {}), Entity("p:1", "q", {})],
    )
    def test_identity_mismatch_rejected(self, other):
        with pytest.raises(IdMismatch):
            merge_entities(self.base({}), other)

    def test_documented_laws_on_random_pairs(self):
        rng = random.Random(99)
        for _ in range(200):
            a, b = random_entity_pair(rng)
            assert merge_law_violations(a, b) == []


class TestRuleExpressions:
    def ent(self, **attrs):
        return Entity("p:x", "p", {f"custom.{k}": v for k, v in attrs.items()})

    def test_missing_expression_is_true(self):
        assert eval_rule_expr(None, self.ent(), self.ent())

    def test_empty_and_true_empty_or_false(self):
        assert eval_rule_expr(And(()), self.ent(), self.ent())
        assert not eval_rule_expr(Or(()), self.ent(), self.ent())

    @pytest.mark.parametrize(
        "a,op,b,expected",
        [
            (3, "=", 3.0, True),
            ("3", "=", 3, True),  # numeric coercion from text
            (2, "<", 10, True),
            ("2", "<", "10", True),
            ("b", ">", "a", True),
            ("x", "=", "y", False),
            (True, "=", 1, True),
            (None, "=", None, False),
            ("apple", "<", 5, False),  # mixed falls back to text: "apple" > "5"
        ],
    )
    def test_attr_compare(self, a, op, b, expected):
        src, tgt = self.ent(v=a), self.ent(v=b)
        assert eval_rule_expr(AttrCompare("v", op, "v"), src, tgt) is expected

    def test_bare_names_resolve_through_prefixes(self):
        src = Entity("p:x", "p", {"core.name": "Ada"})
        tgt = Entity("p:y", "p", {"custom.name": "Ada"})
        assert eval_rule_expr(AttrCompare("name", "=", "name"), src, tgt)

    def test_similarity_requires_non_empty_strings(self):
        src, tgt = self.ent(v="abc"), self.ent(v="abc")
        assert eval_rule_expr(Similarity("v", "v", 0.99), src, tgt, embed=toy_embed)
        for bad in (None, 7, "   "):
            assert not eval_rule_expr(
                Similarity("v", "v", 0.1), self.ent(v=bad), tgt, embed=toy_embed
            )

    def test_similarity_threshold_splits_pairs(self):
        # "ab"/"ba" share a letter histogram under toy_embed; "ab"/"cd" are disjoint
        near, far = self.ent(v="ba"), self.ent(v="cd")
        src = self.ent(v="ab")
        assert eval_rule_expr(Similarity("v", "v", 0.99), src, near, embed=toy_embed)
        assert not eval_rule_expr(Similarity("v", "v", 0.99), src, far, embed=toy_embed)

    def test_nested_boolean_structure(self):
        src, tgt = self.ent(a=1, b="x"), self.ent(a=1, b="y")
        expr = And((AttrCompare("a", "=", "a"), Or((AttrCompare("b", "=", "b"),))))
        assert not eval_rule_expr(expr, src, tgt)


class TestGroupRows:
    def test_null_group_value_joins_no_group(self):
        rows = [{"d": "x"}, {"d": None}, {"d": "x"}, {"d": "y"}]
        assert group_rows(rows, ["d"]) == {("x",): [0, 2], ("y",): [3]}

    def test_multi_column_keys(self):
        rows = [{"a": 1, "b": 2}, {"a": 1, "b": 2}, {"a": 1, "b": 3}]
        assert group_rows(rows, ["a", "b"]) == {(1, 2): [0, 1], (1, 3): [2]}


class TestBuildGraph:
    def test_staff_graph_shape(self, staff_graph):
        assert sorted(staff_graph.entities) == [
            "city:Lyon",
            "city:Paris",
            "person:Ada",
            "person:Bo",
            "person:Dee",
            "skill:excel",
            "skill:go",
            "skill:python",
            "skill:sql",
        ]
        assert staff_graph.rel_types() == ["colleague", "has_skill", "lives_in"]
        assert len(staff_graph.relationships) == 10

    def test_merged_entity_attributes(self, staff_graph):
        ada = staff_graph.entities["person:Ada"]
        assert ada.attrs["core.name"] == "Ada"
        assert ada.attrs["custom.city"] == "Paris"
        assert ada.attrs["custom.age"] == 35
        assert ada.attrs["meta.source_rows"] == [0, 2]
        assert "meta.conflicts" not in ada.attrs

    def test_duplicate_edges_union_provenance(self, staff_graph):
        lives = {
            (r.source_id, r.target_id): r.provenance.rows
            for r in staff_graph.relationships
            if r.rel_type == "lives_in"
        }
        assert lives == {
            ("person:Ada", "city:Paris"): [0, 2],
            ("person:Bo", "city:Lyon"): [1],
            ("person:Dee", "city:Paris"): [3],
        }

    def test_cross_row_needs_a_group(self, staff_graph):
        colleagues = sorted(
            (r.source_id, r.target_id)
            for r in staff_graph.relationships
            if r.rel_type == "colleague"
        )
        # Dee's dept is null, so row 3 joins no group
        assert colleagues == [("person:Ada", "person:Bo"), ("person:Bo", "person:Ada")]

    def test_null_id_row_skipped_for_that_schema(self):
        table = SourceTable("t", ["name", "city"], [["Ada", "Paris"], [None, "Lyon"]])
        schemas = [
            EntitySchema("person", id_columns=["name"]),
            EntitySchema("city", id_columns=["city"]),
        ]
        graph = build_graph(table, schemas, [], created_at=FIXED_TIME)
        assert sorted(graph.entities) == ["city:Lyon", "city:Paris", "person:Ada"]

    def test_invalid_config_aborts(self):
        table = SourceTable("t", ["name"], [["Ada"]])
        with pytest.raises(ConfigInvalid):
            build_graph(table, [EntitySchema("p")], [], created_at=FIXED_TIME)

    def test_build_is_deterministic(self, staff_source):
        schemas, rules = staff_kg_config()
        a = build_graph(staff_source, schemas, rules, created_at=FIXED_TIME)
        b = build_graph(staff_source, schemas, rules, created_at=FIXED_TIME)
        assert a == b

    def test_matches_reference_on_random_cases(self):
        rng = random.Random(7)
        for _ in range(50):
            table, schemas, rules = random_case(rng)
            graph = build_graph(table, schemas, rules, embed=toy_embed, created_at=FIXED_TIME)
            entities, edges = oracle_build(table, schemas, rules, toy_embed, FIXED_TIME)
            assert graphs_equal(graph, entities, edges) == []

import dataclasses

import pytest

from datafactory.agents import DatabaseTeam, KnowledgeGraphTeam
from datafactory.errors import ReActParseError
from datafactory.leader import (
    ClarificationRequest,
    FinalAnswer,
    LeaderConfig,
    ReActStep,
    Teams,
    TimeoutAnswer,
    _render_history,
    dispatch,
    parse_react_block,
    run_session,
)
from datafactory.llm import ChatResponse, ReplayLlm, Usage
from datafactory.memory import QaRecordStore


class ConstantLlm:
    """Always answers the same text; used for adversarial loops."""

    def __init__(self, text):
        self.text = text
        self.calls = 0

    def complete(self, request):
        self.calls += 1
        return ChatResponse(self.text, Usage(1, 1))


def fenced(lang, body):
    return f"```{lang}\n{body}\n```"


class TestParseReactBlock:
    def test_plain_step(self):
        step = parse_react_block(
            "Thought: need the table\nAction: database_team\nAction Input: count rows"
        )
        assert isinstance(step, ReActStep)
        assert (step.thought, step.action, step.action_input) == (
            "need the table",
            "database_team",
            "count rows",
        )

    def test_labels_are_case_insensitive(self):
        step = parse_react_block("THOUGHT: t\nACTION: Knowledge_Graph_Team\naction input: x")
        assert step.action == "knowledge_graph_team"

    def test_multiline_input_is_joined(self):
        step = parse_react_block("Action: database_team\nAction Input: SELECT *\nFROM staff")
        assert step.action_input == "SELECT *\nFROM staff"

    def test_final_answer(self):
        final = parse_react_block("Thought: done\nFinal Answer: 42")
        assert final == FinalAnswer("42")

    def test_final_answer_before_action_wins(self):
        final = parse_react_block("Final Answer: yes\nAction: database_team\nAction Input: x")
        assert isinstance(final, FinalAnswer)
        assert final.text == "yes"

    def test_action_before_final_answer_wins(self):
        step = parse_react_block("Action: database_team\nAction Input: x\nFinal Answer: later")
        assert isinstance(step, ReActStep)
        assert step.action == "database_team"

    def test_final_answer_action_returns_input(self):
        final = parse_react_block("Action: final_answer\nAction Input: Paris")
        assert final == FinalAnswer("Paris")

    def test_trailing_words_after_action_ignored(self):
        step = parse_react_block("Action: database_team (the SQL one)\nAction Input: q")
        assert step.action == "database_team"

    def test_arbitrate_is_accepted(self):
        step = parse_react_block("Action: arbitrate\nAction Input: compare")
        assert step.action == "arbitrate"

    @pytest.mark.parametrize(
        "text",
        [
            "just rambling with no labels",
            "Thought: thinking only",
            "Action: launch_missiles\nAction Input: now",
            "Action:\nAction Input: no action word",
        ],
    )
    def test_unparseable_replies_raise(self, text):
        with pytest.raises(ReActParseError):
            parse_react_block(text)


class TestDispatch:
    def test_missing_team_is_an_error_observation(self):
        step = ReActStep(1, "", "database_team", "anything")
        obs, result = dispatch(step, Teams())
        assert obs.startswith("ERROR:") and "not available" in obs
        assert result is None

    def test_empty_instruction_is_an_error_observation(self, staff_store):
        team = DatabaseTeam(staff_store, QaRecordStore(), ReplayLlm([]))
        step = ReActStep(1, "", "database_team", "   ")
        obs, result = dispatch(step, Teams(database=team))
        assert obs.startswith("ERROR:") and result is None

    def test_team_failure_is_an_error_observation(self, staff_store):
        # both replies are invalid SQL, so the repair budget runs out
        llm = ReplayLlm([fenced("sql", "SELECT nope FROM staff")] * 2)
        team = DatabaseTeam(staff_store, QaRecordStore(), llm)
        step = ReActStep(1, "", "database_team", "names")
        obs, result = dispatch(step, Teams(database=team))
        assert obs.startswith("ERROR: GenerationFailed")
        assert result is None

    def test_success_carries_analysis_and_digest(self, staff_store):
        llm = ReplayLlm([fenced("sql", "SELECT name FROM staff ORDER BY name"), "four names", "none"])
        team = DatabaseTeam(staff_store, QaRecordStore(), llm)
        obs, result = dispatch(ReActStep(1, "", "database_team", "names"), Teams(database=team))
        assert obs.startswith("four names\nresult: 4 rows [name]")
        assert result is not None and len(result.result.rows) == 4


class TestHistoryRendering:
    def test_empty_history(self):
        assert _render_history([]) == "No steps taken yet."

    def test_old_observations_are_digested(self):
        long_obs = "x" * 400
        steps = [
            ReActStep(i, f"t{i}", "database_team", f"q{i}", observation=long_obs)
            for i in range(1, 8)
        ]
        text = _render_history(steps)
        blocks = text.split("\n\n")[1:]
        assert len(blocks) == 7
        # first two fall outside the recent window of five
        for block in blocks[:2]:
            obs_line = [l for l in block.splitlines() if l.startswith("Observation:")][0]
            assert obs_line.endswith("...") and len(obs_line) <= len("Observation: ") + 160
        for block in blocks[2:]:
            assert "x" * 400 in block


def make_db_team(staff_store, llm):
    return Teams(database=DatabaseTeam(staff_store, QaRecordStore(), llm))


class TestRunSession:
    def happy_responses(self):
        return [
            "Thought: check the table\nAction: database_team\nAction Input: staff per city",
            fenced("sql", "SELECT city, COUNT(*) AS total FROM staff GROUP BY city ORDER BY city"),
            "Paris has the most staff.",
            "none",
            "Final Answer: Paris",
        ]

    def test_happy_path(self, staff_store):
        llm = ReplayLlm(self.happy_responses())
        trace = run_session("which city has most staff?", make_db_team(staff_store, llm), llm)
        assert trace.final == FinalAnswer("Paris")
        assert [s.action for s in trace.steps] == ["database_team", "final_answer"]
        assert trace.steps[0].observation.startswith("Paris has the most staff.")
        assert trace.team_call_counts == {"database_team": 1, "knowledge_graph_team": 0}
        assert trace.usage.input_tokens > 0 and trace.usage.output_tokens > 0
        assert llm.remaining() == 0

    def test_identical_runs_are_bit_identical(self, staff_store):
        traces = []
        for _ in range(2):
            llm = ReplayLlm(self.happy_responses())
            traces.append(
                run_session("which city has most staff?", make_db_team(staff_store, llm), llm)
            )
        assert traces[0] == traces[1]
        assert repr(traces[0]) == repr(traces[1])

    def test_never_final_hits_step_budget(self):
        llm = ConstantLlm("Thought: again\nAction: database_team\nAction Input: anything")
        trace = run_session("q", Teams(), llm, LeaderConfig(max_steps=7))
        assert isinstance(trace.final, TimeoutAnswer)
        assert len(trace.steps) == 7
        assert trace.final.evidence == "no usable evidence was gathered"

    def test_malformed_replies_become_parse_errors(self):
        llm = ConstantLlm("no labels whatsoever")
        trace = run_session("q", Teams(), llm, LeaderConfig(max_steps=4))
        assert isinstance(trace.final, TimeoutAnswer)
        assert [s.action for s in trace.steps] == ["parse_error"] * 4
        assert all(s.observation.startswith("ERROR:") for s in trace.steps)

    def test_default_budget_is_twenty(self):
        llm = ConstantLlm("gibberish")
        trace = run_session("q", Teams(), llm)
        assert len(trace.steps) == 20

    def test_replay_exhaustion_terminates_gracefully(self):
        llm = ReplayLlm(["Thought: t\nAction: database_team\nAction Input: x"])
        trace = run_session("q", Teams(), llm)
        assert isinstance(trace.final, TimeoutAnswer)
        assert "ReplayExhausted" in trace.final.text
        assert len(trace.steps) == 1

    def test_timeout_carries_recent_evidence(self, staff_store):
        responses = self.happy_responses()[:4] * 1
        llm = ReplayLlm(responses)
        trace = run_session("q", make_db_team(staff_store, llm), llm, LeaderConfig(max_steps=2))
        assert isinstance(trace.final, TimeoutAnswer)
        assert "Paris has the most staff." in trace.final.evidence

    def test_on_step_streams_every_step(self, staff_store):
        llm = ReplayLlm(self.happy_responses())
        seen = []
        run_session("q", make_db_team(staff_store, llm), llm, on_step=seen.append)
        assert [s.index for s in seen] == [1, 2]

    def test_max_steps_validation(self):
        with pytest.raises(ValueError):
            LeaderConfig(max_steps=0)


class TestClarification:
    def test_clarify_ends_the_session(self):
        llm = ReplayLlm(["Thought: unclear\nAction: clarify_user\nAction Input: Which year?"])
        trace = run_session("totals?", Teams(), llm)
        assert trace.final == ClarificationRequest("Which year?")
        assert trace.steps[-1].action == "clarify_user"

    def test_disabled_clarification_pushes_back(self):
        llm = ReplayLlm(
            [
                "Action: clarify_user\nAction Input: Which year?",
                "Final Answer: latest year assumed",
            ]
        )
        config = LeaderConfig(clarification_enabled=False)
        trace = run_session("totals?", Teams(), llm, config)
        assert trace.final == FinalAnswer("latest year assumed")
        assert trace.steps[0].observation.startswith("ERROR: clarification is disabled")


class TestArbitration:
    def arbitration_responses(self):
        return [
            "Thought: ask the db\nAction: database_team\nAction Input: staff per city",
            fenced("sql", "SELECT city, COUNT(*) AS total FROM staff GROUP BY city ORDER BY city"),
            "DB says Paris.",
            "none",
            "Thought: ask the graph\nAction: knowledge_graph_team\nAction Input: who lives where",
            fenced("cypher", "MATCH (p:person)-[:lives_in]->(c:city) RETURN c"),
            "KG says Paris too.",
            "Thought: they disagree on counts\nAction: arbitrate\nAction Input: which is right",
            "Resolution: A\nRationale: row counts agree\nResolved Observation: Paris confirmed",
            "Final Answer: Paris",
        ]

    def test_arbitration_resolves_two_observations(self, staff_store, staff_graph):
        llm = ReplayLlm(self.arbitration_responses())
        teams = Teams(
            database=DatabaseTeam(staff_store, QaRecordStore(), llm),
            knowledge_graph=KnowledgeGraphTeam(staff_graph, QaRecordStore(), llm),
        )
        trace = run_session("city?", teams, llm)
        assert trace.final == FinalAnswer("Paris")
        arb = trace.steps[2]
        assert arb.action == "arbitrate"
        assert arb.observation == "arbitration picked A: row counts agree\nParis confirmed"
        assert trace.team_call_counts == {"database_team": 1, "knowledge_graph_team": 1}

    def test_arbitration_needs_two_observations(self):
        llm = ReplayLlm(
            ["Action: arbitrate\nAction Input: compare", "Final Answer: moving on"]
        )
        trace = run_session("q", Teams(), llm)
        assert trace.steps[0].observation == "ERROR: arbitration needs two prior team observations"

    def test_disabled_arbitration_defers_to_the_model(self):
        llm = ReplayLlm(
            ["Action: arbitrate\nAction Input: compare", "Final Answer: done"]
        )
        config = LeaderConfig(arbitration_enabled=False)
        trace = run_session("q", Teams(), llm, config)
        assert "arbitration is disabled" in trace.steps[0].observation


class TestTraceShape:
    def test_steps_are_indexed_from_one(self, staff_store):
        llm = ReplayLlm(
            [
                "gibberish",
                "Thought: retry\nAction: database_team\nAction Input: names",
                fenced("sql", "SELECT name FROM staff"),  # one column, so no chart round
                "names listed",
                "Final Answer: done",
            ]
        )
        trace = run_session("q", make_db_team(staff_store, llm), llm)
        assert [s.index for s in trace.steps] == [1, 2, 3]
        assert dataclasses.asdict(trace)["question"] == "q"

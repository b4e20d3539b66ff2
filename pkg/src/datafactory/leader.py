"""ReAct Data Leader: parse, dispatch, observe, arbitrate, stop.

The leader loops over reasoning turns: render the prompt with full step
history, ask the model, parse its thought/action block, dispatch to a
team, and append the observation. Team failures and parse failures both
come back as error observations so the loop never aborts early; the
step budget is the only hard stop, and hitting it yields a timeout
answer carrying the evidence gathered so far instead of nothing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Union

from .agents import DatabaseTeam, KnowledgeGraphTeam, TeamResult, result_digest
from .errors import DataFactoryError, ReActParseError
from .llm import ChatRequest, LlmPort, Message, Usage
from .prompts import load_prompt, render
from .textutil import truncate

DEFAULT_MAX_STEPS = 20
RECENT_TURNS_FULL = 5
DIGEST_CHARS = 160

TEAM_ACTIONS = ("database_team", "knowledge_graph_team")
ACTIONS = TEAM_ACTIONS + ("clarify_user", "final_answer")
# arbitrate is accepted from the model but handled as a reasoning turn,
# never dispatched; parse_error marks turns that failed to parse.
STEP_MARKERS = ACTIONS + ("arbitrate", "parse_error")


@dataclass
class ReActStep:
    index: int
    thought: str
    action: str
    action_input: str
    observation: Optional[str] = None


@dataclass
class FinalAnswer:
    text: str


@dataclass
class TimeoutAnswer:
    text: str
    evidence: str = ""


@dataclass
class ClarificationRequest:
    text: str


Final = Union[FinalAnswer, TimeoutAnswer, ClarificationRequest]


@dataclass
class LeaderConfig:
    max_steps: int = DEFAULT_MAX_STEPS
    clarification_enabled: bool = True
    arbitration_enabled: bool = True

    def __post_init__(self) -> None:
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")


@dataclass
class SessionTrace:
    question: str
    steps: list[ReActStep] = field(default_factory=list)
    final: Optional[Final] = None
    usage: Usage = field(default_factory=Usage)
    team_call_counts: dict[str, int] = field(
        default_factory=lambda: {t: 0 for t in TEAM_ACTIONS}
    )


@dataclass
class Resolution:
    choice: str  # "A" | "B" | "reconciled"
    rationale: str
    observation: str


def parse_react_block(text: str) -> Union[ReActStep, FinalAnswer]:
    """Parse one model reply into a step or a final answer.

    Line-oriented: `Final Answer:` wins if it appears before `Action:`;
    otherwise `Thought:` / `Action:` / `Action Input:` labels are
    collected (labels matched case-insensitively at line starts).
    """
    lines = text.splitlines()
    sections: dict[str, list[str]] = {}
    current: Optional[str] = None
    order: list[str] = []
    labels = (
        ("final answer:", "final"),
        ("action input:", "input"),
        ("action:", "action"),
        ("thought:", "thought"),
    )
    for line in lines:
        stripped = line.strip()
        lowered = stripped.lower()
        matched = False
        for label, key in labels:
            if lowered.startswith(label):
                sections[key] = [stripped[len(label) :].strip()]
                current = key
                order.append(key)
                matched = True
                break
        if not matched and current is not None:
            sections[current].append(line.rstrip())

    def text_of(key: str) -> str:
        return "\n".join(sections.get(key, [])).strip()

    if "final" in sections and ("action" not in sections or order.index("final") < order.index("action")):
        return FinalAnswer(text_of("final"))
    if "action" not in sections:
        raise ReActParseError("reply has no Action or Final Answer line")
    action = text_of("action").split()[0].lower() if text_of("action") else ""
    if action not in ACTIONS + ("arbitrate",):
        raise ReActParseError(
            f"unknown action {action!r}; valid actions: {', '.join(ACTIONS)}"
        )
    if action == "final_answer":
        return FinalAnswer(text_of("input"))
    return ReActStep(
        index=0,
        thought=text_of("thought"),
        action=action,
        action_input=text_of("input"),
    )


@dataclass
class Teams:
    database: Optional[DatabaseTeam] = None
    knowledge_graph: Optional[KnowledgeGraphTeam] = None

    def get(self, action: str):
        return self.database if action == "database_team" else self.knowledge_graph


def dispatch(step: ReActStep, teams: Teams) -> tuple[str, Optional[TeamResult]]:
    """Run a team action; failures become error observations."""
    team = teams.get(step.action)
    if team is None:
        return (f"ERROR: {step.action} is not available (no data loaded for it)", None)
    instruction = step.action_input.strip()
    if not instruction:
        return ("ERROR: empty instruction; restate what the team should do", None)
    try:
        result = team.run(instruction)
    except DataFactoryError as exc:
        return (f"ERROR: {type(exc).__name__}: {exc}", None)
    observation = f"{result.analysis}\nresult: {result_digest(result.result)}"
    return observation, result


def _render_history(steps: list[ReActStep]) -> str:
    if not steps:
        return "No steps taken yet."
    recent_cutoff = max(0, len(steps) - RECENT_TURNS_FULL)
    blocks = []
    for i, step in enumerate(steps):
        lines = []
        if step.thought:
            lines.append(f"Thought: {step.thought}")
        lines.append(f"Action: {step.action}")
        lines.append(f"Action Input: {truncate(step.action_input, 500)}")
        if step.observation is not None:
            obs = step.observation
            if i < recent_cutoff:
                obs = truncate(obs, DIGEST_CHARS)
            lines.append(f"Observation: {obs}")
        blocks.append("\n".join(lines))
    return "Previous steps:\n\n" + "\n\n".join(blocks)


def arbitrate(
    question: str,
    obs_a: tuple[str, str, int, str],
    obs_b: tuple[str, str, int, str],
    llm: LlmPort,
) -> Resolution:
    """Resolve two conflicting observations; each is (team, query, size, text)."""
    team_a, query_a, size_a, text_a = obs_a
    team_b, query_b, size_b, text_b = obs_b
    prompt = render(
        load_prompt("arbitrate"),
        question=question,
        team_a=team_a,
        query_a=query_a or "unknown query",
        size_a=str(size_a),
        obs_a=text_a,
        team_b=team_b,
        query_b=query_b or "unknown query",
        size_b=str(size_b),
        obs_b=text_b,
    )
    response = llm.complete(ChatRequest(messages=[Message("user", prompt)]))
    choice, rationale, observation = "reconciled", "", response.text.strip()
    for line in response.text.splitlines():
        lowered = line.strip().lower()
        if lowered.startswith("resolution:"):
            choice = line.strip()[len("resolution:") :].strip() or "reconciled"
        elif lowered.startswith("rationale:"):
            rationale = line.strip()[len("rationale:") :].strip()
        elif lowered.startswith("resolved observation:"):
            observation = line.strip()[len("resolved observation:") :].strip()
    return Resolution(choice=choice, rationale=rationale, observation=observation)


def _evidence_digest(steps: list[ReActStep]) -> str:
    observations = [s.observation for s in steps if s.observation and not s.observation.startswith("ERROR")]
    if not observations:
        return "no usable evidence was gathered"
    return " / ".join(truncate(o, DIGEST_CHARS) for o in observations[-3:])


def run_session(
    question: str,
    teams: Teams,
    llm: LlmPort,
    config: Optional[LeaderConfig] = None,
    overview: str = "",
    on_step: Optional[Callable[[ReActStep], None]] = None,
) -> SessionTrace:
    """Drive the ReAct loop to a final answer, clarification, or timeout.

    ``on_step`` fires after each step lands in the trace, letting a
    caller stream progress without waiting for the session to finish.
    """
    config = config or LeaderConfig()
    trace = SessionTrace(question=question)

    def push(step: ReActStep) -> None:
        trace.steps.append(step)
        if on_step is not None:
            on_step(step)
    template = load_prompt("leader")
    usage = Usage()
    last_team_obs: list[tuple[str, str, int, str]] = []

    for index in range(1, config.max_steps + 1):
        prompt = render(
            template,
            question=question,
            overview=overview or "(no overview provided)",
            history=_render_history(trace.steps),
        )
        try:
            response = llm.complete(ChatRequest(messages=[Message("user", prompt)]))
        except DataFactoryError as exc:
            # A dead model port (exhausted replay, provider outage) must
            # still terminate the session instead of crashing it.
            evidence = _evidence_digest(trace.steps)
            trace.final = TimeoutAnswer(
                text=f"The model stopped responding ({type(exc).__name__}). Evidence so far: {evidence}",
                evidence=evidence,
            )
            break
        usage = usage + response.usage

        try:
            parsed = parse_react_block(response.text)
        except ReActParseError as exc:
            push(
                ReActStep(
                    index=index,
                    thought="",
                    action="parse_error",
                    action_input=truncate(response.text, 500),
                    observation=f"ERROR: {exc}",
                )
            )
            continue

        if isinstance(parsed, FinalAnswer):
            push(
                ReActStep(index=index, thought="", action="final_answer", action_input=parsed.text)
            )
            trace.final = parsed
            break

        step = ReActStep(
            index=index,
            thought=parsed.thought,
            action=parsed.action,
            action_input=parsed.action_input,
        )

        if step.action == "clarify_user":
            if config.clarification_enabled:
                push(step)
                trace.final = ClarificationRequest(step.action_input)
                break
            step.observation = "ERROR: clarification is disabled; continue with the available data"
            push(step)
            continue

        if step.action == "arbitrate":
            if config.arbitration_enabled and len(last_team_obs) >= 2:
                resolution = arbitrate(question, last_team_obs[-2], last_team_obs[-1], llm)
                step.observation = (
                    f"arbitration picked {resolution.choice}: {resolution.rationale}\n"
                    f"{resolution.observation}"
                )
            elif not config.arbitration_enabled:
                step.observation = "arbitration is disabled; weigh the conflicting observations yourself"
            else:
                step.observation = "ERROR: arbitration needs two prior team observations"
            push(step)
            continue

        observation, result = dispatch(step, teams)
        step.observation = observation
        push(step)
        trace.team_call_counts[step.action] += 1
        if result is not None:
            last_team_obs.append(
                (step.action, result.query, len(result.result.rows), observation)
            )

    if trace.final is None:
        evidence = _evidence_digest(trace.steps)
        trace.final = TimeoutAnswer(
            text=f"Reached the step limit without a final answer. Evidence so far: {evidence}",
            evidence=evidence,
        )
    trace.usage = usage
    return trace

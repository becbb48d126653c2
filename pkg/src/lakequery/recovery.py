"""Error analysis and backtracking.

When planning, mapping or execution fails, the error is sent back to the
model as a structured questionnaire. The Yes/No answers to questions (3) and
(4) decide whether to re-enter the planning phase (discarding the logical
plan and every relation it produced) or to retry only the failing step's
mapping. The model's free-form answers to (1) and (2) are carried along as
hints and injected, together with the verbatim error message, into the prompt
that is retried.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import TYPE_CHECKING

from . import prompts
from .llm import ChatMessage, ChatRequest

if TYPE_CHECKING:  # pragma: no cover
    from .executor import ExecutionState


@dataclass(frozen=True)
class ErrorReport:
    phase: str  # planning | mapping | execution
    step_index: int
    message: str
    operator: str | None = None

    def __post_init__(self) -> None:
        if not self.message:
            raise ValueError("error report message must be nonempty")
        if self.phase not in ("planning", "mapping", "execution"):
            raise ValueError(f"unknown phase {self.phase!r}")


@dataclass(frozen=True)
class RecoveryDecision:
    flaw_in_plan: bool  # question (3)
    alternative_plan: bool  # question (4)
    different_tool: bool  # question (5)
    update_args: bool  # question (6)
    hints: str
    defaulted: bool = False  # answers missing after reprompt; conservative fallback
    q3_q4_disagree: bool = False

    @property
    def backtrack_to_planning(self) -> bool:
        return self.flaw_in_plan or self.alternative_plan


_ANSWER_LINE = re.compile(
    r"^\s*ANSWER\s*\(\s*(\d)\s*\)\s*:\s*(.*?)\s*$", re.IGNORECASE | re.MULTILINE
)


def _parse_answers(response: str) -> dict[int, str]:
    answers: dict[int, str] = {}
    matches = list(_ANSWER_LINE.finditer(response))
    for i, match in enumerate(matches):
        k = int(match.group(1))
        if 1 <= k <= 6 and k not in answers:
            if k in (1, 2):
                # Free-form answers run until the next ANSWER line.
                end = matches[i + 1].start() if i + 1 < len(matches) else len(response)
                answers[k] = response[match.start(2) : end].strip()
            else:
                answers[k] = match.group(2).strip()
    return answers


def _parse_yes_no(text: str | None) -> bool | None:
    if text is None:
        return None
    head = text.strip().strip(".!").lower()
    if head.startswith("yes"):
        return True
    if head.startswith("no"):
        return False
    return None


def analyze_error(report: ErrorReport, state: "ExecutionState", llm) -> RecoveryDecision:
    """Run the six-question error prompt and parse the decision.

    Missing or ambiguous Yes/No answers after one reprompt default to a full
    planning backtrack, flagged on the decision.
    """
    messages = prompts.build_error_prompt(report, state.plan, state.history)
    request = ChatRequest(
        messages=tuple(messages),
        tag="recovery",
        template_hash=prompts.template_hash("recovery"),
    )
    for attempt in range(2):
        response = llm.complete(request)
        state.record_llm(request, response)
        answers = _parse_answers(response)
        parsed = {k: _parse_yes_no(answers.get(k)) for k in (3, 4, 5, 6)}
        if all(v is not None for v in parsed.values()):
            hints = "\n".join(filter(None, (answers.get(1, ""), answers.get(2, ""))))
            return RecoveryDecision(
                flaw_in_plan=parsed[3],
                alternative_plan=parsed[4],
                different_tool=parsed[5],
                update_args=parsed[6],
                hints=hints,
                q3_q4_disagree=(parsed[3] != parsed[4]),
            )
        if attempt == 0:
            retry_text = (
                messages[-1].content
                + "\n\nYour previous reply was missing some `ANSWER (k):` lines. "
                "Answer all six questions again; questions (3) to (6) strictly Yes or No."
            )
            request = ChatRequest(
                messages=tuple(messages[:-1]) + (ChatMessage("user", retry_text),),
                tag="recovery",
                template_hash=prompts.template_hash("recovery"),
            )
    return RecoveryDecision(
        flaw_in_plan=True,
        alternative_plan=False,
        different_tool=False,
        update_args=False,
        hints="",
        defaulted=True,
    )


def apply_recovery(state: "ExecutionState", decision: RecoveryDecision, report: ErrorReport) -> "ExecutionState":
    """Backtrack the state per the decision and spend one retry.

    Planning backtrack drops the plan, the physical history and every derived
    relation; mapping retry keeps everything and re-prompts the failing step
    with the error and hints attached.
    """
    if state.retries_left <= 0:
        raise RuntimeError("apply_recovery called with no retry budget left")
    state.retries_left -= 1
    feedback_parts = [f"Error message:\n{report.message}"]
    if decision.hints:
        feedback_parts.append(f"Hints:\n{decision.hints}")
    feedback = "\n\n".join(feedback_parts)
    target = "planning" if decision.backtrack_to_planning else "mapping"
    state.trace.append(
        {
            "event": "recovery",
            "target": target,
            "answers": {
                "flaw_in_plan": decision.flaw_in_plan,
                "alternative_plan": decision.alternative_plan,
                "different_tool": decision.different_tool,
                "update_args": decision.update_args,
            },
            "hints": decision.hints,
            "defaulted": decision.defaulted,
            "q3_q4_disagree": decision.q3_q4_disagree,
            "attempt": state.max_retries - state.retries_left,
            "error": report.message,
        }
    )
    if target == "planning":
        state.plan = None
        state.history = []
        state.env = dict(state.base_env)
        state.cursor = 1
        state.plot_result = None
        state.planning_feedback.append(feedback)
        state.mapping_feedback = []
    else:
        state.mapping_feedback.append(feedback)
    state.error = None
    return state

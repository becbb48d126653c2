"""Error analysis, backtracking targets, retry budget, hint injection."""

import json

import pytest

from lakequery.executor import ExecutorConfig, QueryFailureError, run_query
from lakequery.llm import ScriptedBackend
from lakequery.recovery import ErrorReport, _parse_answers


def _fenced(operator: str, args: dict) -> str:
    return "```json\n" + json.dumps({"operator": operator, "args": args}) + "\n```"


def _answers(q3, q4, q5="No", q6="No", hint1="cause text", hint2="fix text"):
    return (
        f"ANSWER (1): {hint1}\n"
        f"ANSWER (2): {hint2}\n"
        f"ANSWER (3): {q3}\n"
        f"ANSWER (4): {q4}\n"
        f"ANSWER (5): {q5}\n"
        f"ANSWER (6): {q6}"
    )


NO_PRUNE = ExecutorConfig(prune=False)


class TestAnswerParsing:
    def test_dedicated_lines(self):
        parsed = _parse_answers(_answers("No", "No", "Yes", "Yes"))
        assert parsed[3] == "No" and parsed[5] == "Yes"
        assert parsed[1] == "cause text"

    def test_multiline_free_answers(self):
        text = "ANSWER (1): line one\nmore detail\nANSWER (2): fix\nANSWER (3): Yes\nANSWER (4): No\nANSWER (5): No\nANSWER (6): No"
        parsed = _parse_answers(text)
        assert "more detail" in parsed[1]
        assert parsed[3] == "Yes"

    def test_report_requires_message(self):
        with pytest.raises(ValueError):
            ErrorReport(phase="mapping", step_index=1, message="")


class TestMappingRetry:
    def test_wrong_column_recovers_on_mapping_retry(self, rotowire_catalog):
        """Q3/Q4 No: only the failing step's mapping is redone, with the error text."""
        seen = []

        class Spy:
            def __init__(self, inner):
                self.inner = inner

            def complete(self, request):
                seen.append(request)
                return self.inner.complete(request)

        backend = Spy(
            ScriptedBackend(
                {
                    "planning": ["Step 1: List the team names as a table."],
                    "mapping": [
                        _fenced("sql", {"query": "SELECT centruy FROM teams"}),
                        _fenced("sql", {"query": "SELECT name FROM teams"}),
                    ],
                    "recovery": [_answers("No", "No", "No", "Yes")],
                }
            )
        )
        result = run_query("team names", rotowire_catalog, backend, NO_PRUNE)
        assert result.kind == "table"
        # The retried mapping prompt carries the original error verbatim.
        retried = [r for r in seen if r.tag == "mapping"][1]
        assert "centruy" in retried.messages[1].content
        # Only one plan was generated: no planning backtrack happened.
        assert len([r for r in seen if r.tag == "planning"]) == 1
        recovery_events = [e for e in result.trace if e["event"] == "recovery"]
        assert len(recovery_events) == 1
        assert recovery_events[0]["target"] == "mapping"

    def test_wrong_operator_recovers(self, rotowire_catalog):
        backend = ScriptedBackend(
            {
                "planning": ["Step 1: List the team names as a table."],
                "mapping": [
                    _fenced("pandas", {"query": "whatever"}),
                    _fenced("sql", {"query": "SELECT name FROM teams"}),
                ],
                "recovery": [_answers("No", "No", "Yes", "No")],
            }
        )
        result = run_query("team names", rotowire_catalog, backend, NO_PRUNE)
        assert result.kind == "table"
        error_event = next(e for e in result.trace if e["event"] == "error")
        assert "unknown operator" in error_event["message"]


class TestPlanningBacktrack:
    def test_flawed_plan_answer_triggers_full_backtrack(self, rotowire_catalog):
        seen = []

        class Spy:
            def __init__(self, inner):
                self.inner = inner

            def complete(self, request):
                seen.append(request)
                return self.inner.complete(request)

        backend = Spy(
            ScriptedBackend(
                {
                    "planning": [
                        "Step 1: List the colors of the teams as a table.",
                        "Step 1: List the team names as a table.",
                    ],
                    "mapping": [
                        _fenced("sql", {"query": "SELECT color FROM teams"}),
                        _fenced("sql", {"query": "SELECT name FROM teams"}),
                    ],
                    "recovery": [_answers("Yes", "No")],
                }
            )
        )
        result = run_query("team names", rotowire_catalog, backend, NO_PRUNE)
        assert result.kind == "table"
        plannings = [r for r in seen if r.tag == "planning"]
        assert len(plannings) == 2
        # The second planning prompt carries the error message verbatim.
        assert "color" in plannings[1].messages[0].content
        recovery_events = [e for e in result.trace if e["event"] == "recovery"]
        assert recovery_events[0]["target"] == "planning"

    def test_backtrack_resets_environment_to_base(self, artwork_catalog):
        """Relations produced by the abandoned plan are unreachable after backtrack."""
        backend = ScriptedBackend(
            {
                "planning": [
                    "Step 1: List titles.\nStep 2: Filter by a bad column.",
                    "Step 1: Count the paintings as a single value.",
                ],
                "mapping": [
                    _fenced("sql", {"query": "SELECT title FROM paintings"}),
                    _fenced("sql", {"query": "SELECT nope FROM r1"}),
                    # After replanning, r1 from the abandoned plan must be gone.
                    _fenced("sql", {"query": "SELECT COUNT(*) AS n FROM r1"}),
                    _fenced("sql", {"query": "SELECT COUNT(*) AS n FROM paintings"}),
                ],
                "recovery": [
                    _answers("Yes", "Yes"),
                    _answers("No", "No", "No", "Yes"),
                ],
            }
        )
        result = run_query("count paintings", artwork_catalog, backend, ExecutorConfig(prune=False))
        assert result.kind == "value"
        assert result.value == 12
        # The stale-r1 mapping choice after the backtrack had to fail validation.
        errors = [e for e in result.trace if e["event"] == "error"]
        assert any("unknown table 'r1'" in e["message"] for e in errors)

    def test_unparseable_plan_backtracks_to_planning(self, rotowire_catalog):
        backend = ScriptedBackend(
            {
                "planning": ["No steps here at all.", "Step 1: List the team names as a table."],
                "mapping": [_fenced("sql", {"query": "SELECT name FROM teams"})],
                "recovery": [_answers("Yes", "No")],
            }
        )
        result = run_query("team names", rotowire_catalog, backend, NO_PRUNE)
        assert result.kind == "table"

    def test_q3_q4_disagreement_is_flagged_and_goes_to_planning(self, rotowire_catalog):
        backend = ScriptedBackend(
            {
                "planning": [
                    "Step 1: List the colors of the teams as a table.",
                    "Step 1: List the team names as a table.",
                ],
                "mapping": [
                    _fenced("sql", {"query": "SELECT color FROM teams"}),
                    _fenced("sql", {"query": "SELECT name FROM teams"}),
                ],
                "recovery": [_answers("No", "Yes")],
            }
        )
        result = run_query("team names", rotowire_catalog, backend, NO_PRUNE)
        recovery_event = next(e for e in result.trace if e["event"] == "recovery")
        assert recovery_event["target"] == "planning"
        assert recovery_event["q3_q4_disagree"] is True


class TestFallbacksAndBudget:
    def test_missing_answer_lines_default_to_planning_backtrack(self, rotowire_catalog):
        backend = ScriptedBackend(
            {
                "planning": [
                    "Step 1: List the colors of the teams as a table.",
                    "Step 1: List the team names as a table.",
                ],
                "mapping": [
                    _fenced("sql", {"query": "SELECT color FROM teams"}),
                    _fenced("sql", {"query": "SELECT name FROM teams"}),
                ],
                "recovery": ["I cannot answer in that format.", "Still refusing."],
            }
        )
        result = run_query("team names", rotowire_catalog, backend, NO_PRUNE)
        assert result.kind == "table"
        recovery_event = next(e for e in result.trace if e["event"] == "recovery")
        assert recovery_event["defaulted"] is True
        assert recovery_event["target"] == "planning"

    def test_zero_budget_fails_without_recovery_prompt(self, rotowire_catalog):
        calls = []

        class Spy:
            def __init__(self, inner):
                self.inner = inner

            def complete(self, request):
                calls.append(request.tag)
                return self.inner.complete(request)

        backend = Spy(
            ScriptedBackend(
                {
                    "planning": ["Step 1: List the colors as a table."],
                    "mapping": [_fenced("sql", {"query": "SELECT color FROM teams"})],
                }
            )
        )
        with pytest.raises(QueryFailureError):
            run_query("q", rotowire_catalog, backend, ExecutorConfig(prune=False, max_retries=0))
        assert "recovery" not in calls

    def test_budget_exhaustion_is_terminal_with_trace(self, rotowire_catalog):
        backend = ScriptedBackend(
            {
                "planning": ["Step 1: List the colors as a table."],
                "mapping": [_fenced("sql", {"query": "SELECT color FROM teams"})] * 4,
                "recovery": [_answers("No", "No", "No", "Yes")] * 3,
            }
        )
        with pytest.raises(QueryFailureError) as err:
            run_query("q", rotowire_catalog, backend, ExecutorConfig(prune=False, max_retries=3))
        recoveries = [e for e in err.value.trace if e["event"] == "recovery"]
        assert len(recoveries) == 3
        assert [r["attempt"] for r in recoveries] == [1, 2, 3]

    def test_llm_call_count_is_bounded(self, rotowire_catalog):
        calls = []

        class Spy:
            def __init__(self, inner):
                self.inner = inner

            def complete(self, request):
                calls.append(request.tag)
                return self.inner.complete(request)

        backend = Spy(
            ScriptedBackend(
                {
                    "planning": ["Step 1: List the colors as a table."] * 4,
                    "mapping": [_fenced("sql", {"query": "SELECT color FROM teams"})] * 4,
                    "recovery": [_answers("Yes", "No")] * 3,
                }
            )
        )
        with pytest.raises(QueryFailureError):
            run_query("q", rotowire_catalog, backend, ExecutorConfig(prune=False, max_retries=3))
        # Clean run (planning+mapping = 2 calls) plus 3 backtracks of at most
        # (recovery + planning + mapping) = 3 calls each.
        assert len(calls) <= 2 + 3 * 3

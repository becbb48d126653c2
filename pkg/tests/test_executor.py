"""End-to-end orchestration with scripted backends."""

import json

import pytest

from lakequery.executor import (
    ExecutorConfig,
    QueryFailureError,
    prepare_state,
    run_query,
    step_once,
)
from lakequery.llm import ScriptedBackend
from lakequery.planir import parse_logical_plan


def _fenced(operator: str, args: dict) -> str:
    return "```json\n" + json.dumps({"operator": operator, "args": args}) + "\n```"


NO_PRUNE = ExecutorConfig(prune=False)


class TestRunQuery:
    def test_single_step_table_query(self, rotowire_catalog):
        backend = ScriptedBackend(
            {
                "planning": ["Step 1: List the East conference team names as a table."],
                "mapping": [
                    _fenced("sql", {"query": "SELECT name FROM teams WHERE conference = 'East'"})
                ],
            }
        )
        result = run_query("Which teams are in the East?", rotowire_catalog, backend, NO_PRUNE)
        assert result.kind == "table"
        assert result.relation.columns == ("name",)
        assert len(result.relation) == 3

    def test_single_cell_result_becomes_value(self, rotowire_catalog):
        backend = ScriptedBackend(
            {
                "planning": ["Step 1: Count the teams as a single value."],
                "mapping": [_fenced("sql", {"query": "SELECT COUNT(*) AS n FROM teams"})],
            }
        )
        result = run_query("How many teams?", rotowire_catalog, backend, NO_PRUNE)
        assert result.kind == "value"
        assert result.value == 6

    def test_plot_result(self, rotowire_catalog):
        backend = ScriptedBackend(
            {
                "planning": [
                    "Step 1: Count the teams per conference.\n"
                    "Step 2: Plot the counts as a bar chart."
                ],
                "mapping": [
                    _fenced("sql", {"query": "SELECT conference, COUNT(*) AS n FROM teams GROUP BY conference"}),
                    _fenced("plot", {"input": "r1", "kind": "bar", "x": "conference", "y": "n", "title": "T"}),
                ],
            }
        )
        result = run_query("Plot teams per conference", rotowire_catalog, backend, NO_PRUNE)
        assert result.kind == "plot"
        assert result.plot_spec.data == (("East", 3), ("West", 3))
        assert result.svg.startswith("<svg")

    def test_empty_catalog_rejected(self, rotowire_catalog):
        from lakequery.catalog import Catalog

        with pytest.raises(ValueError, match="empty"):
            run_query("q", Catalog(()), ScriptedBackend({}), NO_PRUNE)

    def test_mapping_prompt_sees_previous_step_values(self, artwork_catalog):
        """After a visual QA step the env summary must expose the yes/no values."""
        recorded = []

        class SpyBackend:
            def __init__(self, inner):
                self.inner = inner

            def complete(self, request):
                recorded.append(request)
                return self.inner.complete(request)

        backend = SpyBackend(
            ScriptedBackend(
                {
                    "planning": [
                        "Step 1: Determine for each painting image whether it depicts Madonna and Child.\n"
                        "Step 2: Count the rows where the answer is yes as a single value."
                    ],
                    "mapping": [
                        _fenced(
                            "visual_qa",
                            {
                                "input": "painting_images",
                                "image_column": "image",
                                "question": "Does this painting depict Madonna and Child?",
                                "out_column": "depicts",
                            },
                        ),
                        _fenced("sql", {"query": "SELECT COUNT(*) AS n FROM r1 WHERE depicts = 'yes'"}),
                    ],
                }
            )
        )
        result = run_query("How many Madonnas?", artwork_catalog, backend, NO_PRUNE)
        assert result.kind == "value"
        second_mapping = [r for r in recorded if r.tag == "mapping"][1]
        user_text = second_mapping.messages[1].content
        assert 'depicts' in user_text and '"yes"' in user_text and '"no"' in user_text

    def test_trace_has_every_llm_call_and_step(self, rotowire_catalog):
        backend = ScriptedBackend(
            {
                "planning": ["Step 1: Count the teams as a single value."],
                "mapping": [_fenced("sql", {"query": "SELECT COUNT(*) AS n FROM teams"})],
            }
        )
        result = run_query("How many teams?", rotowire_catalog, backend, NO_PRUNE)
        events = [e["event"] for e in result.trace]
        assert events.count("llm") == 2  # one planning, one mapping
        assert "discovery" in events
        assert "plan" in events
        assert "step" in events
        step = next(e for e in result.trace if e["event"] == "step")
        assert step["operator"] == "sql"
        assert step["args"]["query"].startswith("SELECT")
        assert step["schema"] == [["n", "NUMBER"]]

    def test_fresh_relation_ids_by_position(self, rotowire_catalog):
        backend = ScriptedBackend(
            {
                "planning": [
                    "Step 1: List the team names.\nStep 2: Count those rows as a single value."
                ],
                "mapping": [
                    _fenced("sql", {"query": "SELECT name FROM teams"}),
                    _fenced("sql", {"query": "SELECT COUNT(*) AS n FROM r1"}),
                ],
            }
        )
        result = run_query("count", rotowire_catalog, backend, NO_PRUNE)
        steps = [e for e in result.trace if e["event"] == "step"]
        assert [s["output"] for s in steps] == ["r1", "r2"]
        assert result.value == 6

    def test_unparseable_plan_without_recovery_budget_fails(self, rotowire_catalog):
        backend = ScriptedBackend({"planning": ["I have no plan."]})
        config = ExecutorConfig(prune=False, max_retries=0)
        with pytest.raises(QueryFailureError) as err:
            run_query("anything", rotowire_catalog, backend, config)
        assert err.value.report.phase == "planning"
        assert any(e["event"] == "error" for e in err.value.trace)


class TestStepOnce:
    def _state(self, catalog, backend, plan_text):
        config = NO_PRUNE
        state = prepare_state("q", catalog, backend, config)
        state.plan = parse_logical_plan(plan_text, query="q")
        return state, config

    def test_advances_cursor_and_stores_output(self, rotowire_catalog):
        backend = ScriptedBackend(
            {"mapping": [_fenced("sql", {"query": "SELECT name FROM teams"})]}
        )
        state, config = self._state(rotowire_catalog, backend, "Step 1: list teams")
        state = step_once(state, backend, config)
        assert state.error is None
        assert state.cursor == 2
        assert "r1" in state.env
        assert state.history[0].operator == "sql"

    def test_validation_failure_tags_state_without_advancing(self, rotowire_catalog):
        backend = ScriptedBackend(
            {"mapping": [_fenced("sql", {"query": "SELECT centruy FROM teams"})]}
        )
        state, config = self._state(rotowire_catalog, backend, "Step 1: bad column")
        state = step_once(state, backend, config)
        assert state.error is not None
        assert state.error.phase == "mapping"
        assert "centruy" in state.error.message
        assert state.cursor == 1
        assert "r1" not in state.env

    def test_environment_only_grows(self, rotowire_catalog):
        backend = ScriptedBackend(
            {
                "mapping": [
                    _fenced("sql", {"query": "SELECT name FROM teams"}),
                    _fenced("sql", {"query": "SELECT COUNT(*) AS n FROM r1"}),
                ]
            }
        )
        state, config = self._state(
            rotowire_catalog, backend, "Step 1: list\nStep 2: count"
        )
        before = set(state.env)
        state = step_once(state, backend, config)
        middle = set(state.env)
        state = step_once(state, backend, config)
        after = set(state.env)
        assert before < middle < after


def test_concurrent_queries_share_the_catalog(rotowire_catalog):
    """Independent queries with their own backends may run in parallel."""
    import threading

    results = {}

    def worker(name: str, query: str, sql: str):
        backend = ScriptedBackend(
            {
                "planning": [f"Step 1: {query}"],
                "mapping": [_fenced("sql", {"query": sql})],
            }
        )
        results[name] = run_query(query, rotowire_catalog, backend, NO_PRUNE)

    threads = [
        threading.Thread(
            target=worker,
            args=("count", "Count the teams as a single value.", "SELECT COUNT(*) AS n FROM teams"),
        ),
        threading.Thread(
            target=worker,
            args=("names", "List the team names as a table.", "SELECT name FROM teams"),
        ),
    ]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert results["count"].value == 6
    assert len(results["names"].relation) == 6


class TestReplayDeterminism:
    def test_recorded_run_replays_to_identical_result(self, rotowire_catalog, tmp_path):
        from lakequery.llm import (
            RecordingClient,
            ReplayBackend,
            Transcript,
            load_transcript,
            save_transcript,
        )

        script = {
            "planning": ["Step 1: Count the teams as a single value."],
            "mapping": [_fenced("sql", {"query": "SELECT COUNT(*) AS n FROM teams"})],
        }
        transcript = Transcript()
        recorder = RecordingClient(ScriptedBackend(script), transcript)
        first = run_query("How many teams?", rotowire_catalog, recorder, NO_PRUNE)
        save_transcript(transcript, tmp_path / "run.jsonl")

        replayed = run_query(
            "How many teams?",
            rotowire_catalog,
            ReplayBackend(load_transcript(tmp_path / "run.jsonl")),
            NO_PRUNE,
        )
        assert json.dumps(first.to_json_dict(), sort_keys=True) == json.dumps(
            replayed.to_json_dict(), sort_keys=True
        )
        assert [e for e in first.trace] == [e for e in replayed.trace]

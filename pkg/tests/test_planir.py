"""Plan IR: logical plan parsing, operator choice parsing, step validation."""

import pytest

from lakequery.operators import DEFAULT_REGISTRY
from lakequery.planir import (
    LogicalPlan,
    PhysicalStep,
    PlanParseError,
    parse_logical_plan,
    parse_operator_choice,
    render_logical_plan,
    render_physical_plan,
    validate_step,
)
from lakequery.relation import Relation


class TestLogicalPlanParsing:
    def test_two_steps(self):
        plan = parse_logical_plan(
            "Step 1: Join the teams with the game reports.\n"
            "Step 2: Extract points from the reports."
        )
        assert len(plan.steps) == 2
        assert plan.steps[0].description == "Join the teams with the game reports."

    def test_lowercase_and_no_period(self):
        plan = parse_logical_plan("step 1: do X")
        assert plan.steps[0].description == "do X"

    def test_no_steps_is_a_parse_error_carrying_raw(self):
        with pytest.raises(PlanParseError) as err:
            parse_logical_plan("Here is the plan. No steps.")
        assert err.value.raw == "Here is the plan. No steps."

    def test_renumbers_noncontiguous_steps(self):
        plan = parse_logical_plan("Step 2: first\nStep 7: second")
        assert [s.index for s in plan.steps] == [1, 2]

    def test_tolerates_surrounding_prose_and_fences(self):
        plan = parse_logical_plan(
            "Sure! Here is my plan:\n```\nStep 1: scan the table\n```\nHope this helps."
        )
        assert len(plan.steps) == 1

    def test_round_trip_on_canonical_rendering(self):
        plan = parse_logical_plan("Step 1: Join the teams with the game_reports.\nStep 2: Plot it.")
        again = parse_logical_plan(render_logical_plan(plan))
        assert again.steps == plan.steps

    def test_referenced_datasets_extraction(self):
        plan = parse_logical_plan("Step 1: Join game_reports with painting_images.")
        assert plan.steps[0].referenced_datasets == ("game_reports", "painting_images")

    def test_empty_plan_rejected(self):
        with pytest.raises(PlanParseError):
            LogicalPlan(query="q", steps=())


class TestOperatorChoiceParsing:
    def test_fenced_choice(self):
        operator, args = parse_operator_choice(
            '```json\n{"operator":"visual_qa","args":{"image_column":"image",'
            '"question":"How many swords are depicted?"}}\n```'
        )
        assert operator == "visual_qa"
        assert args["question"] == "How many swords are depicted?"

    def test_missing_args_field(self):
        with pytest.raises(PlanParseError, match="args"):
            parse_operator_choice('```json\n{"operator":"sql"}\n```')

    def test_prose_before_fenced_object(self):
        operator, args = parse_operator_choice(
            'I will use SQL for this step.\n```json\n{"operator":"sql","args":{"query":"SELECT 1 FROM t"}}\n```'
        )
        assert operator == "sql"

    def test_unfenced_object_still_found(self):
        operator, args = parse_operator_choice(
            'Use {"operator": "sql", "args": {"query": "SELECT 1 FROM t"}} please'
        )
        assert operator == "sql"

    def test_non_string_scalars_coerced(self):
        _, args = parse_operator_choice(
            '```json\n{"operator":"plot","args":{"kind":"bar","limit":5}}\n```'
        )
        assert args["limit"] == "5"

    def test_list_args_pass_through(self):
        _, args = parse_operator_choice(
            '```json\n{"operator":"sql","args":{"cols":["a","b"],"query":"x"}}\n```'
        )
        assert args["cols"] == ["a", "b"]

    def test_no_json_at_all(self):
        with pytest.raises(PlanParseError):
            parse_operator_choice("no structured content here")


@pytest.fixture()
def env():
    return {
        "teams": Relation.build([("name", "TEXT"), ("points", "NUMBER")], [("Heat", 10)]),
        "shots": Relation.build(
            [("img_path", "TEXT"), ("image", "IMAGE")], []
        ),
    }


class TestValidateStep:
    def test_unknown_column_violation(self, env):
        step = PhysicalStep(
            operator="sql",
            args={"query": "SELECT centruy FROM teams"},
            inputs=("teams",),
            output="r1",
        )
        result = validate_step(step, env, DEFAULT_REGISTRY)
        assert not result.ok
        assert "centruy" in result.violations[0]

    def test_well_formed_join_is_ok(self, env):
        step = PhysicalStep(
            operator="sql",
            args={"query": "SELECT name, img_path FROM teams JOIN shots ON teams.name = shots.img_path"},
            inputs=("teams", "shots"),
            output="r1",
        )
        assert validate_step(step, env, DEFAULT_REGISTRY).ok

    def test_unknown_operator(self, env):
        step = PhysicalStep(operator="pandas", args={}, inputs=(), output="r1")
        result = validate_step(step, env, DEFAULT_REGISTRY)
        assert not result.ok
        assert "unknown operator" in result.violations[0]

    def test_unknown_relation(self, env):
        step = PhysicalStep(
            operator="visual_qa",
            args={"input": "ghost", "image_column": "image", "question": "q?", "out_column": "a"},
            inputs=("ghost",),
            output="r1",
        )
        result = validate_step(step, env, DEFAULT_REGISTRY)
        assert any("unknown relation 'ghost'" in v for v in result.violations)

    def test_missing_required_argument(self, env):
        step = PhysicalStep(operator="visual_qa", args={"input": "shots"}, inputs=("shots",), output="r1")
        result = validate_step(step, env, DEFAULT_REGISTRY)
        assert any("missing required argument" in v for v in result.violations)

    def test_wrong_typed_column(self, env):
        step = PhysicalStep(
            operator="visual_qa",
            args={"input": "teams", "image_column": "name", "question": "q?", "out_column": "a"},
            inputs=("teams",),
            output="r1",
        )
        result = validate_step(step, env, DEFAULT_REGISTRY)
        assert any("IMAGE" in v for v in result.violations)

    def test_out_column_collision(self, env):
        step = PhysicalStep(
            operator="visual_qa",
            args={"input": "shots", "image_column": "image", "question": "q?", "out_column": "img_path"},
            inputs=("shots",),
            output="r1",
        )
        result = validate_step(step, env, DEFAULT_REGISTRY)
        assert any("already exists" in v for v in result.violations)

    def test_plot_needs_numeric_y(self, env):
        step = PhysicalStep(
            operator="plot",
            args={"input": "teams", "kind": "bar", "x": "name", "y": "name", "title": "t"},
            inputs=("teams",),
            output="r1",
        )
        result = validate_step(step, env, DEFAULT_REGISTRY)
        assert any("NUMBER" in v for v in result.violations)

    def test_validated_step_executes_without_binding_error(self, env):
        from lakequery.operators import ExecContext, FixtureQaBackend, execute_step

        step = PhysicalStep(
            operator="sql",
            args={"query": "SELECT name FROM teams WHERE points > 5"},
            inputs=("teams",),
            output="r1",
        )
        assert validate_step(step, env, DEFAULT_REGISTRY).ok
        result = execute_step(step, env, ExecContext(qa_backend=FixtureQaBackend()))
        assert result.columns == ("name",)


def test_render_physical_plan_is_stable():
    steps = [
        PhysicalStep("sql", {"query": "SELECT 1 FROM t"}, ("t",), "r1"),
        PhysicalStep("plot", {"kind": "bar", "input": "r1", "x": "a", "y": "b", "title": "T"}, ("r1",), "r2"),
    ]
    text = render_physical_plan(steps)
    assert text.splitlines()[0] == "r1 = sql"
    assert "    reads: r1" in text
    assert render_physical_plan(steps) == text

"""Physical operators and their registry.

Six operators cover the engine's plans: a SELECT-only SQL step, three QA
operators backed by a pluggable question-answering backend (visual QA, text
QA with per-row question templates, image selection), a generated row
expression, and plot emission. Each registry entry carries the prompt-facing
description, the argument schema, a static validator, and the executor.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Sequence

import requests

from . import expr as exprlang
from . import sqlengine
from .llm import ChatRequest
from .planir import PhysicalStep
from .plotspec import PLOT_KINDS, PlotSpec, render_svg
from .relation import (
    BOOLEAN,
    DOCUMENT,
    IMAGE,
    NUMBER,
    TEXT,
    Cell,
    Relation,
    render_cell,
)

logger = logging.getLogger(__name__)


class OperatorError(Exception):
    """Operator failed; message feeds the recovery prompt."""


class BindingError(OperatorError):
    """Arguments do not bind to the input relation (wrong column/type)."""


# --- QA backends ---------------------------------------------------------------

UNKNOWN_ANSWER = "unknown"


class FixtureQaBackend:
    """Answers from an annotations.json file next to the referenced item.

    The file maps item file names to {question: answer}. Unknown pairs answer
    "unknown" rather than failing, mirroring model fallibility without
    nondeterminism.
    """

    def __init__(self) -> None:
        self._cache: dict[str, dict] = {}

    def _annotations(self, directory: str) -> dict:
        if directory not in self._cache:
            path = Path(directory) / "annotations.json"
            if path.exists():
                self._cache[directory] = json.loads(path.read_text(encoding="utf-8"))
            else:
                self._cache[directory] = {}
        return self._cache[directory]

    def answer(self, item_ref: str, question: str) -> str:
        path = Path(item_ref)
        annotations = self._annotations(str(path.parent))
        entry = annotations.get(path.name, {})
        return str(entry.get(question, UNKNOWN_ANSWER))


class HttpQaBackend:
    """Delegates (item, question) pairs to an external QA service."""

    def __init__(self, base_url: str, timeout: float = 60.0):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout

    def answer(self, item_ref: str, question: str) -> str:
        response = requests.post(
            self.base_url,
            json={"item_uri": item_ref, "question": question},
            timeout=self.timeout,
        )
        response.raise_for_status()
        return str(response.json()["answer"])


# --- operator implementations ---------------------------------------------------

def visual_qa(
    input_relation: Relation,
    image_column: str,
    question: str,
    out_column: str,
    backend,
) -> Relation:
    """Ask the same question about every image; append answers as TEXT."""
    if not input_relation.has_column(image_column):
        raise BindingError(f"unknown column {image_column!r}")
    if input_relation.column_type(image_column) != IMAGE:
        raise BindingError(
            f"column {image_column!r} has type {input_relation.column_type(image_column)}, "
            f"visual_qa needs an IMAGE column"
        )
    idx = input_relation.column_index(image_column)
    answers = []
    for row in input_relation.rows:
        ref = row[idx]
        answers.append(None if ref is None else backend.answer(ref.resolve(), question))
    return input_relation.with_column(out_column, TEXT, answers)


_PLACEHOLDER = re.compile(r"\{(\w+)\}")


def text_qa(
    input_relation: Relation,
    text_column: str,
    question_template: str,
    out_column: str,
    backend,
) -> Relation:
    """Instantiate the template per row and ask it against the row's document."""
    if not input_relation.has_column(text_column):
        raise BindingError(f"unknown column {text_column!r}")
    if input_relation.column_type(text_column) != DOCUMENT:
        raise BindingError(
            f"column {text_column!r} has type {input_relation.column_type(text_column)}, "
            f"text_qa needs a DOCUMENT column"
        )
    placeholders = _PLACEHOLDER.findall(question_template)
    for name in placeholders:
        if not input_relation.has_column(name):
            raise BindingError(
                f"question template placeholder {{{name}}} names no input column "
                f"(columns: {', '.join(input_relation.columns)})"
            )
    doc_idx = input_relation.column_index(text_column)
    answers = []
    for row in input_relation.rows:
        ref = row[doc_idx]
        if ref is None:
            answers.append(None)
            continue
        question = question_template
        for name in placeholders:
            value = row[input_relation.column_index(name)]
            question = question.replace("{" + name + "}", _render_for_template(value))
        answers.append(backend.answer(ref.resolve(), question))
    return input_relation.with_column(out_column, TEXT, answers)


def _render_for_template(value: Cell) -> str:
    return render_cell(value)


def image_select(
    input_relation: Relation,
    image_column: str,
    description: str,
    backend,
) -> Relation:
    """Keep the rows whose image matches the description (backend says yes)."""
    if not input_relation.has_column(image_column):
        raise BindingError(f"unknown column {image_column!r}")
    if input_relation.column_type(image_column) != IMAGE:
        raise BindingError(
            f"column {image_column!r} has type {input_relation.column_type(image_column)}, "
            f"image_select needs an IMAGE column"
        )
    idx = input_relation.column_index(image_column)
    question = f"Does this image show: {description}?"
    keep = []
    for i, row in enumerate(input_relation.rows):
        ref = row[idx]
        if ref is not None and backend.answer(ref.resolve(), question) == "yes":
            keep.append(i)
    return input_relation.take_rows(keep)


def udf_transform(
    input_relation: Relation,
    description: str,
    out_column: str,
    llm,
) -> Relation:
    """Generate a row expression from the description and apply it per row.

    One automatic reprompt with the parse/type error appended; rows whose
    evaluation misbehaves get null.
    """
    from . import prompts

    schema = {name: stype for name, stype in input_relation.schema}
    feedback: list[str] = []
    compiled = None
    inferred = None
    for _ in range(2):
        messages = prompts.build_udf_prompt(description, input_relation, feedback=feedback)
        request = ChatRequest(
            messages=tuple(messages), tag="udf", template_hash=prompts.template_hash("udf")
        )
        response = llm.complete(request)
        source = _extract_expression(response)
        if source is None:
            feedback = ["The reply did not contain a fenced code block with an expression."]
            continue
        try:
            compiled = exprlang.parse_expr(source)
            inferred = exprlang.typecheck(compiled, schema)
            break
        except exprlang.ExprError as exc:
            feedback = [f"The expression `{source}` was rejected: {exc}"]
            compiled = None
    if compiled is None:
        raise OperatorError(
            f"could not obtain a valid expression for: {description} "
            f"(last problem: {feedback[0] if feedback else 'none'})"
        )
    out_type = {"NUMBER": NUMBER, "TEXT": TEXT, "BOOLEAN": BOOLEAN}.get(inferred.base, TEXT)
    values = []
    for row in input_relation.rows:
        cells = {name: row[i] for i, name in enumerate(input_relation.columns)}
        try:
            values.append(exprlang.eval_expr(compiled, cells))
        except Exception as exc:  # totality net: a bad row must not abort the plan
            logger.warning("udf_transform: row evaluation failed (%s); writing null", exc)
            values.append(None)
    return input_relation.with_column(out_column, out_type, values)


def _extract_expression(response: str) -> str | None:
    fenced = re.findall(r"```[a-zA-Z]*\n?(.*?)```", response, re.DOTALL)
    for block in fenced:
        text = block.strip()
        if text:
            return text.splitlines()[0].strip() if "\n" in text else text
    return None


def plot_relation(
    input_relation: Relation,
    kind: str,
    x: str,
    y: str,
    title: str,
) -> tuple[PlotSpec, str]:
    """Build a PlotSpec (data sorted by x ascending) and render its SVG."""
    if kind not in PLOT_KINDS:
        raise BindingError(f"unknown plot kind {kind!r} (one of: {', '.join(PLOT_KINDS)})")
    for column in (x, y):
        if not input_relation.has_column(column):
            raise BindingError(
                f"unknown column {column!r} (columns: {', '.join(input_relation.columns)})"
            )
    if input_relation.column_type(y) != NUMBER:
        raise BindingError(f"plot needs a NUMBER y column, {y!r} is {input_relation.column_type(y)}")
    xi = input_relation.column_index(x)
    yi = input_relation.column_index(y)
    pairs = [(row[xi], row[yi]) for row in input_relation.rows]
    pairs.sort(key=lambda p: (0, 0) if p[0] is None else (1, p[0]))
    spec = PlotSpec(kind=kind, x=x, y=y, title=title, data=tuple(pairs))
    return spec, render_svg(spec)


# --- registry --------------------------------------------------------------------

@dataclass(frozen=True)
class ArgSpec:
    kind: str  # string | string-list | relation-ref | column-ref
    of: str | None = None  # for column-ref: name of the relation-ref argument


@dataclass(frozen=True)
class OperatorSpec:
    name: str
    description: str
    args: Mapping[str, ArgSpec]
    output: str  # "relation" | "plot"
    validate_fn: Callable[[Mapping[str, object], Mapping[str, Relation]], list[str]]
    execute_fn: Callable[[Mapping[str, object], Mapping[str, Relation], "ExecContext"], object]

    def validate(self, args: Mapping[str, object], env: Mapping[str, Relation]) -> list[str]:
        return self.validate_fn(args, env)


@dataclass
class ExecContext:
    qa_backend: object
    llm: object = None


class OperatorRegistry:
    def __init__(self, specs: Sequence[OperatorSpec]):
        self._specs: dict[str, OperatorSpec] = {}
        for spec in specs:
            if spec.name in self._specs:
                raise ValueError(f"duplicate operator {spec.name!r}")
            self._specs[spec.name] = spec

    def get(self, name: str) -> OperatorSpec | None:
        return self._specs.get(name)

    def names(self) -> tuple[str, ...]:
        return tuple(self._specs)

    def specs(self) -> tuple[OperatorSpec, ...]:
        return tuple(self._specs.values())


def _no_collision(env: Mapping[str, Relation], args: Mapping[str, object]) -> list[str]:
    relation = env.get(str(args.get("input", "")))
    out_column = str(args.get("out_column", ""))
    if relation is not None and relation.has_column(out_column):
        return [f"output column {out_column!r} already exists in the input relation"]
    return []


def _validate_sql_args(args: Mapping[str, object], env: Mapping[str, Relation]) -> list[str]:
    schemas = {name: rel.schema for name, rel in env.items()}
    return sqlengine.validate_sql(str(args["query"]), schemas)


def _validate_visual_qa(args, env) -> list[str]:
    violations = _no_collision(env, args)
    relation = env.get(str(args["input"]))
    if relation is not None and relation.column_type(str(args["image_column"])) != IMAGE:
        violations.append(
            f"column {args['image_column']!r} is not an IMAGE column"
        )
    return violations


def _validate_text_qa(args, env) -> list[str]:
    violations = _no_collision(env, args)
    relation = env.get(str(args["input"]))
    if relation is None:
        return violations
    if relation.column_type(str(args["text_column"])) != DOCUMENT:
        violations.append(f"column {args['text_column']!r} is not a DOCUMENT column")
    for name in _PLACEHOLDER.findall(str(args["question_template"])):
        if not relation.has_column(name):
            violations.append(
                f"question template placeholder {{{name}}} names no input column "
                f"(columns: {', '.join(relation.columns)})"
            )
    return violations


def _validate_image_select(args, env) -> list[str]:
    relation = env.get(str(args["input"]))
    if relation is not None and relation.column_type(str(args["image_column"])) != IMAGE:
        return [f"column {args['image_column']!r} is not an IMAGE column"]
    return []


def _validate_plot(args, env) -> list[str]:
    violations: list[str] = []
    kind = str(args["kind"])
    if kind not in PLOT_KINDS:
        violations.append(f"unknown plot kind {kind!r} (one of: {', '.join(PLOT_KINDS)})")
    relation = env.get(str(args["input"]))
    if relation is not None and not violations:
        if relation.column_type(str(args["y"])) != NUMBER:
            violations.append(
                f"plot needs a NUMBER y column, {args['y']!r} is "
                f"{relation.column_type(str(args['y']))}"
            )
    return violations


def build_registry() -> OperatorRegistry:
    return OperatorRegistry(
        (
            OperatorSpec(
                name="sql",
                description=(
                    "Run one SELECT statement over the live relations: filtering, "
                    "equi-joins (JOIN ... ON a = b), cross products (FROM t1, t2), "
                    "GROUP BY with MIN/MAX/SUM/AVG/COUNT, ORDER BY and LIMIT. "
                    "Answers produced by the question-answering operators are text; "
                    "add `+ 0` to such a column to compare or aggregate it numerically "
                    "(non-numeric answers like 'unknown' then become null and are ignored "
                    "by aggregates). Only SELECT is allowed; statements that modify data "
                    "are rejected."
                ),
                args={"query": ArgSpec("string")},
                output="relation",
                validate_fn=_validate_sql_args,
                execute_fn=lambda args, env, ctx: sqlengine.execute_sql(str(args["query"]), env),
            ),
            OperatorSpec(
                name="visual_qa",
                description=(
                    "Ask one question about every image in an IMAGE column and append "
                    "the answers as a new TEXT column."
                ),
                args={
                    "input": ArgSpec("relation-ref"),
                    "image_column": ArgSpec("column-ref", of="input"),
                    "question": ArgSpec("string"),
                    "out_column": ArgSpec("string"),
                },
                output="relation",
                validate_fn=_validate_visual_qa,
                execute_fn=lambda args, env, ctx: visual_qa(
                    env[str(args["input"])],
                    str(args["image_column"]),
                    str(args["question"]),
                    str(args["out_column"]),
                    ctx.qa_backend,
                ),
            ),
            OperatorSpec(
                name="text_qa",
                description=(
                    "Ask a question about every document in a DOCUMENT column and append "
                    "the answers as a new TEXT column. The question is a template: "
                    "placeholders like {name} are replaced with that row's value of the "
                    "named column, so a joined table can ask a different question per row."
                ),
                args={
                    "input": ArgSpec("relation-ref"),
                    "text_column": ArgSpec("column-ref", of="input"),
                    "question_template": ArgSpec("string"),
                    "out_column": ArgSpec("string"),
                },
                output="relation",
                validate_fn=_validate_text_qa,
                execute_fn=lambda args, env, ctx: text_qa(
                    env[str(args["input"])],
                    str(args["text_column"]),
                    str(args["question_template"]),
                    str(args["out_column"]),
                    ctx.qa_backend,
                ),
            ),
            OperatorSpec(
                name="image_select",
                description=(
                    "Keep only the rows whose image matches a description; the schema "
                    "is unchanged."
                ),
                args={
                    "input": ArgSpec("relation-ref"),
                    "image_column": ArgSpec("column-ref", of="input"),
                    "description": ArgSpec("string"),
                },
                output="relation",
                validate_fn=_validate_image_select,
                execute_fn=lambda args, env, ctx: image_select(
                    env[str(args["input"])],
                    str(args["image_column"]),
                    str(args["description"]),
                    ctx.qa_backend,
                ),
            ),
            OperatorSpec(
                name="udf_transform",
                description=(
                    "Compute a new column from the existing columns of a relation. "
                    "Describe the computation in plain language (e.g. 'extract the "
                    "century from the inception year'); a small expression is generated "
                    "and applied to every row."
                ),
                args={
                    "input": ArgSpec("relation-ref"),
                    "description": ArgSpec("string"),
                    "out_column": ArgSpec("string"),
                },
                output="relation",
                validate_fn=lambda args, env: _no_collision(env, args),
                execute_fn=lambda args, env, ctx: udf_transform(
                    env[str(args["input"])],
                    str(args["description"]),
                    str(args["out_column"]),
                    ctx.llm,
                ),
            ),
            OperatorSpec(
                name="plot",
                description=(
                    "Render a bar, line or scatter plot from two columns of a relation "
                    "(x: categories or numbers, y: numbers). This is always the final "
                    "step of a plan that asks for a plot."
                ),
                args={
                    "input": ArgSpec("relation-ref"),
                    "kind": ArgSpec("string"),
                    "x": ArgSpec("column-ref", of="input"),
                    "y": ArgSpec("column-ref", of="input"),
                    "title": ArgSpec("string"),
                },
                output="plot",
                validate_fn=_validate_plot,
                execute_fn=lambda args, env, ctx: plot_relation(
                    env[str(args["input"])],
                    str(args["kind"]),
                    str(args["x"]),
                    str(args["y"]),
                    str(args["title"]),
                ),
            ),
        )
    )


DEFAULT_REGISTRY = build_registry()


def execute_step(
    step: PhysicalStep,
    env: Mapping[str, Relation],
    ctx: ExecContext,
    registry: OperatorRegistry = DEFAULT_REGISTRY,
):
    """Run a validated step; returns a Relation or a (PlotSpec, svg) pair."""
    spec = registry.get(step.operator)
    if spec is None:
        raise OperatorError(f"unknown operator {step.operator!r}")
    known = {k: v for k, v in step.args.items() if k in spec.args}
    try:
        return spec.execute_fn(known, env, ctx)
    except (OperatorError, sqlengine.SqlError, exprlang.ExprError):
        raise
    except Exception as exc:
        raise OperatorError(f"{step.operator} failed: {exc}") from exc

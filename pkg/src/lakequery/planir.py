"""Logical and physical plan model plus parsers for structured LLM output.

A logical plan is an ordered list of natural-language steps; a physical step
is one concrete operator invocation. Parsers are tolerant of surrounding
prose and code fences but fail loudly (feeding recovery) when nothing
matches.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import TYPE_CHECKING, Mapping

from .relation import Relation

if TYPE_CHECKING:  # pragma: no cover
    from .operators import OperatorRegistry


class PlanParseError(Exception):
    """LLM output did not contain a parseable plan/choice; carries the raw text."""

    def __init__(self, message: str, raw: str = ""):
        super().__init__(message)
        self.raw = raw


@dataclass(frozen=True)
class LogicalStep:
    index: int  # 1-based
    description: str
    referenced_datasets: tuple[str, ...] = ()


@dataclass(frozen=True)
class LogicalPlan:
    query: str
    steps: tuple[LogicalStep, ...]

    def __post_init__(self) -> None:
        if not self.steps:
            raise PlanParseError("a logical plan needs at least one step")
        for position, step in enumerate(self.steps, start=1):
            if step.index != position:
                raise PlanParseError("logical step indices must be contiguous from 1")
            if not step.description:
                raise PlanParseError("logical step descriptions must be nonempty")


@dataclass(frozen=True)
class PhysicalStep:
    operator: str
    args: Mapping[str, object]  # str -> str | list[str]
    inputs: tuple[str, ...]
    output: str


@dataclass(frozen=True)
class ValidationResult:
    violations: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations


_STEP_LINE = re.compile(r"^[\s>*\-#]*step\s+(\d+)\s*[:.]\s*(.+?)\s*$", re.IGNORECASE)
_IDENTIFIER = re.compile(r"\b[a-zA-Z][a-zA-Z0-9]*(?:_[a-zA-Z0-9]+)+\b")


def extract_identifiers(text: str) -> tuple[str, ...]:
    """Snake_case tokens in free text; best-effort dataset/column references."""
    seen: list[str] = []
    for match in _IDENTIFIER.findall(text):
        if match not in seen:
            seen.append(match)
    return tuple(seen)


def parse_logical_plan(response: str, query: str = "") -> LogicalPlan:
    """Extract `Step <i>: <text>` lines and renumber them contiguously."""
    steps: list[LogicalStep] = []
    for line in response.splitlines():
        match = _STEP_LINE.match(line)
        if match:
            description = match.group(2).strip()
            steps.append(
                LogicalStep(
                    index=len(steps) + 1,
                    description=description,
                    referenced_datasets=extract_identifiers(description),
                )
            )
    if not steps:
        raise PlanParseError("no `Step <i>: ...` lines found in planning response", raw=response)
    return LogicalPlan(query=query, steps=tuple(steps))


def render_logical_plan(plan: LogicalPlan) -> str:
    return "\n".join(f"Step {s.index}: {s.description}" for s in plan.steps)


_FENCE = re.compile(r"```[a-zA-Z]*\n?(.*?)```", re.DOTALL)


def parse_operator_choice(response: str) -> tuple[str, dict[str, object]]:
    """First fenced JSON object with {"operator": str, "args": object} wins."""
    candidates = [block.strip() for block in _FENCE.findall(response)]
    if not candidates:
        candidate = _first_json_object(response)
        if candidate is not None:
            candidates = [candidate]
    last_error = "no fenced JSON object found in mapping response"
    for block in candidates:
        try:
            data = json.loads(block)
        except json.JSONDecodeError:
            inner = _first_json_object(block)
            if inner is None:
                continue
            try:
                data = json.loads(inner)
            except json.JSONDecodeError:
                continue
        if not isinstance(data, dict):
            continue
        if "operator" not in data:
            last_error = "JSON object is missing the 'operator' field"
            continue
        if "args" not in data:
            last_error = "JSON object is missing the 'args' field"
            continue
        operator = data["operator"]
        args = data["args"]
        if not isinstance(operator, str) or not isinstance(args, dict):
            last_error = "'operator' must be a string and 'args' an object"
            continue
        return operator, {str(k): _normalize_arg(v) for k, v in args.items()}
    raise PlanParseError(last_error, raw=response)


def _normalize_arg(value: object) -> object:
    if isinstance(value, str):
        return value
    if isinstance(value, list):
        return [v if isinstance(v, str) else json.dumps(v) for v in value]
    return json.dumps(value)


def _first_json_object(text: str) -> str | None:
    start = text.find("{")
    while start >= 0:
        depth = 0
        in_string = False
        escape = False
        for i in range(start, len(text)):
            c = text[i]
            if in_string:
                if escape:
                    escape = False
                elif c == "\\":
                    escape = True
                elif c == '"':
                    in_string = False
                continue
            if c == '"':
                in_string = True
            elif c == "{":
                depth += 1
            elif c == "}":
                depth -= 1
                if depth == 0:
                    return text[start : i + 1]
        start = text.find("{", start + 1)
    return None


def validate_step(
    step: PhysicalStep,
    env: Mapping[str, Relation],
    registry: "OperatorRegistry",
) -> ValidationResult:
    """Static checks before execution; violations feed the recovery prompt."""
    spec = registry.get(step.operator)
    if spec is None:
        return ValidationResult(
            (
                f"unknown operator {step.operator!r} (available: "
                f"{', '.join(registry.names())})",
            )
        )
    violations: list[str] = []
    resolved: dict[str, object] = {}
    for arg_name, arg_spec in spec.args.items():
        if arg_name not in step.args:
            violations.append(f"{step.operator}: missing required argument {arg_name!r}")
            continue
        value = step.args[arg_name]
        if arg_spec.kind == "string-list":
            if not isinstance(value, list):
                violations.append(f"{step.operator}: argument {arg_name!r} must be a list")
                continue
        elif not isinstance(value, str):
            violations.append(f"{step.operator}: argument {arg_name!r} must be a string")
            continue
        resolved[arg_name] = value
        if arg_spec.kind == "relation-ref":
            if value not in env:
                violations.append(
                    f"unknown relation {value!r} (live relations: {', '.join(env) or 'none'})"
                )
    if violations:
        return ValidationResult(tuple(violations))
    for arg_name, arg_spec in spec.args.items():
        if arg_spec.kind == "column-ref":
            rel_name = str(step.args.get(arg_spec.of, ""))
            relation = env.get(rel_name)
            if relation is None:
                continue
            column = str(step.args[arg_name])
            if not relation.has_column(column):
                violations.append(
                    f"unknown column {column!r} in relation {rel_name!r} "
                    f"(columns: {', '.join(relation.columns)})"
                )
    if violations:
        return ValidationResult(tuple(violations))
    violations.extend(spec.validate(step.args, env))
    return ValidationResult(tuple(violations))


def render_physical_plan(steps: list[PhysicalStep] | tuple[PhysicalStep, ...]) -> str:
    """Indented operator tree with args, stable ordering, for `explain`."""
    lines = []
    for step in steps:
        lines.append(f"{step.output} = {step.operator}")
        for key in sorted(step.args):
            value = step.args[key]
            rendered = value if isinstance(value, str) else json.dumps(value)
            lines.append(f"    {key} = {rendered}")
        if step.inputs:
            lines.append(f"    reads: {', '.join(step.inputs)}")
    return "\n".join(lines)

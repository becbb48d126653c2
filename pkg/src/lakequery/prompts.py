"""Phase prompt construction: planning, mapping, recovery, UDF, pruning.

Every builder is a pure function of its inputs, so a replayed run produces
byte-identical prompts and therefore matching request digests. Templates live
as versioned text files next to this module; a per-phase template hash is
attached to requests so replay misses can name a template change.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from string import Template
from typing import TYPE_CHECKING, Mapping, Sequence

from .llm import ChatMessage
from .relation import Relation, render_cell

if TYPE_CHECKING:  # pragma: no cover
    from .catalog import DatasetDescriptor
    from .planir import LogicalPlan, LogicalStep, PhysicalStep
    from .recovery import ErrorReport

ENV_RELATION_BUDGET = 5
VALUE_BUDGET = 5

_PHASE_TEMPLATES = {
    "planning": ("planning_system.txt", "planning_user.txt"),
    "mapping": ("mapping_system.txt", "mapping_user.txt"),
    "recovery": ("recovery_system.txt", "recovery_user.txt"),
    "udf": ("udf_system.txt", "udf_user.txt", "udf_language.txt"),
    "discovery": ("pruning_system.txt", "pruning_user.txt"),
}


@lru_cache(maxsize=None)
def _template_text(name: str) -> str:
    return resources.files("lakequery.templates").joinpath(name).read_text(encoding="utf-8")


@lru_cache(maxsize=None)
def template_hash(phase: str) -> str:
    names = _PHASE_TEMPLATES[phase]
    digest = hashlib.sha256()
    for name in names:
        digest.update(_template_text(name).encode("utf-8"))
    return digest.hexdigest()[:16]


def _render(name: str, **fields: str) -> str:
    # Substituted content must survive byte-for-byte (error messages are
    # quoted verbatim), so protect it with sentinels while collapsing the
    # newline gaps that empty optional blocks leave behind.
    sentinels: dict[str, str] = {}
    safe: dict[str, str] = {}
    for key, value in fields.items():
        if value:
            token = f"\x00{key}\x00"
            sentinels[token] = value
            safe[key] = token
        else:
            safe[key] = ""
    text = Template(_template_text(name)).substitute(**safe)
    text = re.sub(r"\n{3,}", "\n\n", text)
    for token, value in sentinels.items():
        text = text.replace(token, value)
    return text.strip() + "\n"


@dataclass(frozen=True)
class FewShotExample:
    domain: str
    query: str
    plan_text: str  # must parse under parse_logical_plan


@dataclass(frozen=True)
class OperatorSummary:
    name: str
    description: str
    args_doc: str


DEFAULT_FEWSHOT: tuple[FewShotExample, ...] = (
    FewShotExample(
        domain="music library",
        query="Which composer wrote the most symphonies?",
        plan_text=(
            "Step 1: Count the symphonies per composer in the works table.\n"
            "Step 2: Select the composer with the highest count as a single value."
        ),
    ),
    FewShotExample(
        domain="hospital records",
        query="Plot the number of scans per month that show a fracture.",
        plan_text=(
            "Step 1: Determine for each scan image whether it shows a fracture.\n"
            "Step 2: Join the scan results with the scan metadata table.\n"
            "Step 3: Count the scans showing a fracture per month.\n"
            "Step 4: Plot the monthly counts as a bar chart."
        ),
    ),
    FewShotExample(
        domain="weather stations",
        query="For every station, what was the coldest temperature mentioned in its maintenance reports?",
        plan_text=(
            "Step 1: Join the stations table with the maintenance reports.\n"
            "Step 2: Extract the coldest temperature mentioned in each report for each station.\n"
            "Step 3: Compute the minimum extracted temperature per station as a table."
        ),
    ),
)

DEFAULT_CAPABILITIES: tuple[str, ...] = (
    "Filter, join, aggregate, sort and count rows of tables using SELECT-only SQL.",
    "Answer a question about every image in an IMAGE column (visual question answering).",
    "Keep only the images that match a description (image selection).",
    "Answer a question template about every document in a DOCUMENT column; "
    "the template may insert values from other columns of the same row.",
    "Compute a new column from existing columns with a small generated expression "
    "(e.g. extract the century from a year string).",
    "Render a bar, line or scatter plot from two columns of a table.",
)


# --- data descriptions -------------------------------------------------------

def describe_dataset(descriptor: "DatasetDescriptor") -> str:
    if descriptor.kind == "table":
        head = f"Dataset {descriptor.name} (table):"
    else:
        noun = "image collection" if descriptor.kind == "image_collection" else "text collection"
        head = f"Dataset {descriptor.name} ({noun}, presented as a two-column table):"
    lines = [head]
    for column in descriptor.columns:
        rendered = ", ".join(_quote_sample(s) for s in column.samples)
        suffix = f" (e.g. {rendered})" if rendered else ""
        lines.append(f"  {column.name}: {column.semantic_type}{suffix}")
    return "\n".join(lines)


def _quote_sample(sample: str) -> str:
    return '"' + sample.replace('"', '\\"') + '"'


def describe_datasets(descriptors: Sequence["DatasetDescriptor"]) -> str:
    return "\n\n".join(describe_dataset(d) for d in descriptors)


# --- relation summaries ------------------------------------------------------

def _render_value(value: object) -> str:
    if isinstance(value, str):
        return _quote_sample(value)
    return render_cell(value)


def summarize_relation(relation: Relation, budget: int = VALUE_BUDGET) -> str:
    """Schema line plus up to `budget` distinct values per column."""
    schema_line = "columns: " + ", ".join(f"{n} ({t})" for n, t in relation.schema)
    if not relation.rows:
        return schema_line + "\n(no rows)"
    lines = [schema_line]
    for idx, (name, _) in enumerate(relation.schema):
        distinct: list[object] = []
        seen: set = set()
        extra = 0
        for row in relation.rows:
            value = row[idx]
            key = render_cell(value)
            if key in seen:
                continue
            seen.add(key)
            if len(distinct) < budget:
                distinct.append(value)
            else:
                extra += 1
        rendered = ",".join(_render_value(v) for v in distinct)
        tail = f" … ({extra} more)" if extra else ""
        lines.append(f"{name}: {{{rendered}}}{tail}")
    return "\n".join(lines)


def summarize_env(
    env: Mapping[str, Relation],
    relation_budget: int = ENV_RELATION_BUDGET,
    value_budget: int = VALUE_BUDGET,
) -> str:
    """Most recently produced relations first-to-last, truncated to a budget."""
    names = list(env)
    omitted = names[:-relation_budget] if len(names) > relation_budget else []
    shown = names[-relation_budget:] if len(names) > relation_budget else names
    blocks = []
    if omitted:
        blocks.append(f"({len(omitted)} older relations omitted: {', '.join(omitted)})")
    for name in shown:
        relation = env[name]
        body = summarize_relation(relation, value_budget)
        indented = "\n".join("  " + line for line in body.splitlines())
        blocks.append(f"{name} ({len(relation)} rows):\n{indented}")
    return "\n\n".join(blocks)


# --- prompt builders ---------------------------------------------------------

def build_planning_prompt(
    query: str,
    descriptors: Sequence["DatasetDescriptor"],
    capabilities: Sequence[str] = DEFAULT_CAPABILITIES,
    fewshot: Sequence[FewShotExample] = DEFAULT_FEWSHOT,
    feedback: Sequence[str] = (),
) -> list[ChatMessage]:
    if not descriptors:
        raise ValueError("planning prompt needs at least one dataset")
    fewshot_block = ""
    if fewshot:
        examples = []
        for example in fewshot:
            examples.append(
                f"Example ({example.domain}):\n"
                f"Request: {example.query}\n"
                f"{example.plan_text}"
            )
        fewshot_block = "\nExample plans from other domains:\n\n" + "\n\n".join(examples) + "\n"
    feedback_block = _feedback_block(feedback)
    system = _render(
        "planning_system.txt",
        fewshot_block=fewshot_block,
        data_description=describe_datasets(descriptors),
        capabilities="\n".join(f"- {c}" for c in capabilities),
        feedback_block=feedback_block,
    )
    user = _render("planning_user.txt", query=query)
    return [ChatMessage("system", system), ChatMessage("user", user)]


def build_mapping_prompt(
    step: "LogicalStep",
    operators: Sequence[OperatorSummary],
    env_summary: str,
    history: Sequence["PhysicalStep"] = (),
    feedback: Sequence[str] = (),
) -> list[ChatMessage]:
    summaries = []
    for op in operators:
        summaries.append(f"{op.name}: {op.description}\n  arguments: {op.args_doc}")
    history_block = ""
    if history:
        lines = [_render_history_step(s) for s in history]
        history_block = "\nSteps already executed:\n" + "\n".join(lines) + "\n"
    system = _render("mapping_system.txt", operator_summaries="\n\n".join(summaries))
    user = _render(
        "mapping_user.txt",
        step_description=f"Step {step.index}: {step.description}",
        history_block=history_block,
        env_summary=env_summary,
        feedback_block=_feedback_block(feedback),
    )
    return [ChatMessage("system", system), ChatMessage("user", user)]


def _render_history_step(step: "PhysicalStep") -> str:
    args = ", ".join(
        f"{k}={v!r}".replace("\n", " ") for k, v in sorted(step.args.items())
    )
    return f"{step.output} = {step.operator}({args})"


def build_error_prompt(
    error: "ErrorReport",
    plan: "LogicalPlan | None",
    history: Sequence["PhysicalStep"] = (),
) -> list[ChatMessage]:
    from .planir import render_physical_plan

    context_lines = []
    if error.phase == "planning":
        context_lines.append("The error occurred while generating the logical plan.")
    else:
        context_lines.append(
            f"The error occurred during the {error.phase} phase, at step "
            f"{error.step_index} (marked with >>> below)."
        )
    if error.operator:
        context_lines.append(f"The operator involved was: {error.operator}.")
    if plan is not None:
        context_lines.append("")
        context_lines.append("The logical plan was:")
        for s in plan.steps:
            marker = ">>> " if error.phase != "planning" and s.index == error.step_index else ""
            context_lines.append(f"{marker}Step {s.index}: {s.description}")
    if history:
        context_lines.append("")
        context_lines.append("Steps executed so far:")
        context_lines.append(render_physical_plan(tuple(history)))
    system = _render("recovery_system.txt")
    user = _render(
        "recovery_user.txt",
        context_block="\n".join(context_lines),
        error_message=error.message,
    )
    return [ChatMessage("system", system), ChatMessage("user", user)]


def build_udf_prompt(
    description: str,
    relation: Relation,
    sample_rows: int = 3,
    feedback: Sequence[str] = (),
) -> list[ChatMessage]:
    schema_block = "\n".join(f"  {n}: {t}" for n, t in relation.schema)
    samples = []
    for row in relation.rows[:sample_rows]:
        rendered = ", ".join(
            f"{name}={_render_value(value)}" for (name, _), value in zip(relation.schema, row)
        )
        samples.append(f"  {rendered}")
    samples_block = "\n".join(samples) if samples else "  (no rows)"
    system = _render("udf_system.txt", language_reference=_template_text("udf_language.txt").strip())
    user = _render(
        "udf_user.txt",
        description=description,
        schema_block=schema_block,
        samples_block=samples_block,
        feedback_block=_feedback_block(feedback),
    )
    return [ChatMessage("system", system), ChatMessage("user", user)]


def build_pruning_prompt(query: str, descriptor: "DatasetDescriptor") -> list[ChatMessage]:
    columns_block = "\n".join(
        f"  {c.name}: {c.semantic_type}"
        + (f" (e.g. {', '.join(_quote_sample(s) for s in c.samples)})" if c.samples else "")
        for c in descriptor.columns
    )
    system = _render("pruning_system.txt")
    user = _render(
        "pruning_user.txt",
        query=query,
        dataset_name=descriptor.name,
        columns_block=columns_block,
    )
    return [ChatMessage("system", system), ChatMessage("user", user)]


def _feedback_block(feedback: Sequence[str]) -> str:
    if not feedback:
        return ""
    blocks = []
    for item in feedback:
        blocks.append(f"A previous attempt failed. Take this into account:\n{item}")
    return "\n" + "\n\n".join(blocks) + "\n"


def operator_summaries(registry) -> list[OperatorSummary]:
    """One summary per registered operator, in registry order."""
    out = []
    for spec in registry.specs():
        args_doc = ", ".join(
            f"{name} ({arg.kind}{'' if arg.of is None else ' into ' + arg.of})"
            for name, arg in spec.args.items()
        )
        out.append(OperatorSummary(spec.name, spec.description, args_doc or "(none)"))
    return out

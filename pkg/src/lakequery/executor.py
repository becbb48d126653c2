"""Query orchestration: discovery, planning, then interleaved mapping/execution.

One step at a time: the mapping prompt (fed with summaries of the live
relations) chooses an operator, the choice is validated, executed, and its
output becomes visible to the next mapping prompt. Any failure is routed
through the recovery module, which either retries the failing step's mapping
or backtracks to planning, within a bounded retry budget.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from . import prompts
from .catalog import Catalog, DatasetDescriptor, discover, load_relation, prune_columns
from .llm import ChatRequest, request_digest
from .operators import (
    DEFAULT_REGISTRY,
    ExecContext,
    FixtureQaBackend,
    OperatorError,
    OperatorRegistry,
)
from .planir import (
    LogicalPlan,
    PhysicalStep,
    PlanParseError,
    parse_logical_plan,
    parse_operator_choice,
    validate_step,
)
from .plotspec import PlotSpec
from .recovery import ErrorReport, analyze_error, apply_recovery
from .relation import Relation, json_cell
from .sqlengine import SqlError, referenced_tables


@dataclass
class ExecutorConfig:
    max_retries: int = 3
    discovery_k: int = 4
    prune: bool = True
    temperature: float = 0.0
    max_tokens: int = 1024
    capabilities: Sequence[str] = prompts.DEFAULT_CAPABILITIES
    fewshot: Sequence[prompts.FewShotExample] = prompts.DEFAULT_FEWSHOT
    qa_backend: object = None
    registry: OperatorRegistry = DEFAULT_REGISTRY

    def resolve_qa_backend(self):
        return self.qa_backend if self.qa_backend is not None else FixtureQaBackend()


@dataclass
class ExecutionState:
    query: str
    descriptors: list[DatasetDescriptor]
    base_env: dict[str, Relation]
    env: dict[str, Relation]
    max_retries: int
    retries_left: int
    plan: LogicalPlan | None = None
    cursor: int = 1
    history: list[PhysicalStep] = field(default_factory=list)
    trace: list[dict] = field(default_factory=list)
    planning_feedback: list[str] = field(default_factory=list)
    mapping_feedback: list[str] = field(default_factory=list)
    plot_result: tuple[PlotSpec, str] | None = None
    error: ErrorReport | None = None

    def record_llm(self, request: ChatRequest, response: str) -> None:
        self.trace.append(
            {
                "event": "llm",
                "tag": request.tag,
                "digest": request_digest(request),
                "response": response,
            }
        )


class QueryFailureError(Exception):
    """Terminal failure; carries the full trace and the last error report."""

    def __init__(self, message: str, trace: list[dict], report: ErrorReport | None):
        super().__init__(message)
        self.trace = trace
        self.report = report


@dataclass(frozen=True)
class QueryResult:
    kind: str  # value | table | plot
    value: object = None
    relation: Relation | None = None
    plot_spec: PlotSpec | None = None
    svg: str | None = None
    trace: tuple[dict, ...] = ()

    def to_json_dict(self) -> dict:
        body: dict = {"kind": self.kind}
        if self.kind == "value":
            body["value"] = json_cell(self.value)
        elif self.kind == "table":
            body["table"] = self.relation.to_json_dict()
        else:
            body["plot"] = self.plot_spec.to_json_dict()
        return body

    def result_digest_payload(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, separators=(",", ":"))


class _TracingClient:
    """Wraps the configured LLM client so every call lands in the trace."""

    def __init__(self, inner, state: ExecutionState):
        self.inner = inner
        self.state = state

    def complete(self, request: ChatRequest) -> str:
        response = self.inner.complete(request)
        self.state.record_llm(request, response)
        return response


def prepare_state(query: str, catalog: Catalog, llm, config: ExecutorConfig) -> ExecutionState:
    """Discovery phase: select datasets, prune table columns, load base relations."""
    if len(catalog) == 0:
        raise ValueError("catalog is empty; nothing to query")
    descriptors = discover(query, catalog, config.discovery_k)
    state = ExecutionState(
        query=query,
        descriptors=[],
        base_env={},
        env={},
        max_retries=config.max_retries,
        retries_left=config.max_retries,
    )
    traced = _TracingClient(llm, state)
    selected: list[DatasetDescriptor] = []
    for descriptor in descriptors:
        if descriptor.kind == "table" and config.prune:
            pruned = prune_columns(query, descriptor, traced)
            selected.append(pruned)
            state.trace.append(
                {
                    "event": "pruning",
                    "dataset": descriptor.name,
                    "columns": list(pruned.column_names()),
                }
            )
        else:
            selected.append(descriptor)
    state.descriptors = selected
    state.trace.insert(
        0, {"event": "discovery", "datasets": [d.name for d in descriptors]}
    )
    for descriptor in selected:
        state.base_env[descriptor.name] = load_relation(descriptor)
    state.env = dict(state.base_env)
    return state


def _plan_phase(state: ExecutionState, llm, config: ExecutorConfig) -> None:
    messages = prompts.build_planning_prompt(
        state.query,
        state.descriptors,
        config.capabilities,
        config.fewshot,
        feedback=state.planning_feedback,
    )
    request = ChatRequest(
        messages=tuple(messages),
        tag="planning",
        temperature=config.temperature,
        max_tokens=config.max_tokens,
        template_hash=prompts.template_hash("planning"),
    )
    response = llm.complete(request)
    try:
        plan = parse_logical_plan(response, query=state.query)
    except PlanParseError as exc:
        state.error = ErrorReport(
            phase="planning", step_index=0, message=f"could not parse the plan: {exc}"
        )
        return
    state.plan = plan
    state.trace.append({"event": "plan", "steps": [s.description for s in plan.steps]})


def step_once(state: ExecutionState, llm, config: ExecutorConfig | None = None) -> ExecutionState:
    """Map and execute the step at the cursor; on failure, tag the state."""
    config = config or ExecutorConfig()
    assert state.plan is not None and state.cursor <= len(state.plan.steps)
    step = state.plan.steps[state.cursor - 1]
    env_summary = prompts.summarize_env(state.env)
    messages = prompts.build_mapping_prompt(
        step,
        prompts.operator_summaries(config.registry),
        env_summary,
        history=state.history,
        feedback=state.mapping_feedback,
    )
    request = ChatRequest(
        messages=tuple(messages),
        tag="mapping",
        temperature=config.temperature,
        max_tokens=config.max_tokens,
        template_hash=prompts.template_hash("mapping"),
    )
    response = llm.complete(request)
    try:
        operator, args = parse_operator_choice(response)
    except PlanParseError as exc:
        state.error = ErrorReport(
            phase="mapping", step_index=state.cursor, message=f"could not parse the operator choice: {exc}"
        )
        return state

    output_id = f"r{state.cursor}"
    inputs = _step_inputs(operator, args, state.env, config.registry)
    physical = PhysicalStep(operator=operator, args=args, inputs=inputs, output=output_id)
    verdict = validate_step(physical, state.env, config.registry)
    if not verdict.ok:
        state.error = ErrorReport(
            phase="mapping",
            step_index=state.cursor,
            message="; ".join(verdict.violations),
            operator=operator,
        )
        return state

    ctx = ExecContext(qa_backend=config.resolve_qa_backend(), llm=llm)
    try:
        result = _execute(physical, state.env, ctx, config.registry)
    except (OperatorError, SqlError) as exc:
        state.error = ErrorReport(
            phase="execution",
            step_index=state.cursor,
            message=str(exc),
            operator=operator,
        )
        return state

    if isinstance(result, Relation):
        state.env[output_id] = result
        schema = [[n, t] for n, t in result.schema]
        rows = len(result)
    else:
        state.plot_result = result
        schema = [["plot", "plot"]]
        rows = len(result[0].data)
    state.history.append(physical)
    state.trace.append(
        {
            "event": "step",
            "index": state.cursor,
            "operator": operator,
            "args": {k: v for k, v in sorted(args.items())},
            "inputs": list(inputs),
            "output": output_id,
            "schema": schema,
            "rows": rows,
        }
    )
    state.cursor += 1
    state.mapping_feedback = []
    return state


def _execute(step: PhysicalStep, env: Mapping[str, Relation], ctx: ExecContext, registry: OperatorRegistry):
    from .operators import execute_step

    return execute_step(step, env, ctx, registry)


def _step_inputs(
    operator: str,
    args: Mapping[str, object],
    env: Mapping[str, Relation],
    registry: OperatorRegistry,
) -> tuple[str, ...]:
    spec = registry.get(operator)
    if spec is None:
        return ()
    if operator == "sql":
        try:
            tables = referenced_tables(str(args.get("query", "")))
        except SqlError:
            return ()
        lowered = {name.lower(): name for name in env}
        return tuple(lowered[t.lower()] for t in tables if t.lower() in lowered)
    inputs = []
    for name, arg_spec in spec.args.items():
        if arg_spec.kind == "relation-ref" and isinstance(args.get(name), str):
            inputs.append(str(args[name]))
    return tuple(inputs)


def run_query(query: str, catalog: Catalog, llm, config: ExecutorConfig | None = None) -> QueryResult:
    """End-to-end: discovery, planning, interleaved mapping/execution, recovery."""
    from .llm import LlmError

    config = config or ExecutorConfig()
    try:
        state = prepare_state(query, catalog, llm, config)
    except LlmError as exc:
        raise QueryFailureError(f"LLM backend error: {exc}", [], None) from exc
    traced = _TracingClient(llm, state)
    try:
        while True:
            if state.error is not None:
                report = state.error
                state.trace.append(
                    {
                        "event": "error",
                        "phase": report.phase,
                        "step": report.step_index,
                        "operator": report.operator,
                        "message": report.message,
                    }
                )
                if state.retries_left <= 0:
                    raise QueryFailureError(
                        f"query failed after {state.max_retries} recovery attempts: {report.message}",
                        state.trace,
                        report,
                    )
                decision = analyze_error(report, state, traced)
                apply_recovery(state, decision, report)
                continue
            if state.plan is None:
                _plan_phase(state, traced, config)
                continue
            if state.cursor <= len(state.plan.steps):
                step_once(state, traced, config)
                continue
            break
    except LlmError as exc:
        raise QueryFailureError(f"LLM backend error: {exc}", state.trace, None) from exc
    return _finalize(state)


def _finalize(state: ExecutionState) -> QueryResult:
    assert state.history, "finalize with empty history"
    last = state.history[-1]
    if last.operator == "plot" and state.plot_result is not None:
        kind = "plot"
    else:
        relation = state.env[last.output]
        kind = "value" if len(relation) == 1 and len(relation.schema) == 1 else "table"
    state.trace.append({"event": "result", "kind": kind})
    trace = tuple(state.trace)
    if kind == "plot":
        spec, svg = state.plot_result
        return QueryResult(kind="plot", plot_spec=spec, svg=svg, trace=trace)
    if kind == "value":
        return QueryResult(kind="value", value=relation.rows[0][0], trace=trace)
    return QueryResult(kind="table", relation=relation, trace=trace)


def render_trace(trace: Sequence[dict]) -> str:
    """Readable multi-line rendering for `explain` and failure output."""
    lines = []
    for event in trace:
        kind = event.get("event")
        if kind == "discovery":
            lines.append(f"discovery: {', '.join(event['datasets'])}")
        elif kind == "pruning":
            lines.append(f"pruning {event['dataset']}: kept {', '.join(event['columns'])}")
        elif kind == "llm":
            lines.append(f"llm[{event['tag']}] digest={event['digest'][:12]}")
        elif kind == "plan":
            lines.append("plan:")
            for i, step in enumerate(event["steps"], start=1):
                lines.append(f"  Step {i}: {step}")
        elif kind == "step":
            args = ", ".join(f"{k}={v!r}" for k, v in event["args"].items())
            lines.append(
                f"{event['output']} = {event['operator']}({args}) -> {event['rows']} rows"
            )
        elif kind == "error":
            lines.append(f"error[{event['phase']}@{event['step']}]: {event['message']}")
        elif kind == "recovery":
            lines.append(
                f"recovery -> {event['target']} (attempt {event['attempt']}"
                + (", defaulted" if event.get("defaulted") else "")
                + ")"
            )
        elif kind == "result":
            lines.append(f"result: {event['kind']}")
    return "\n".join(lines)

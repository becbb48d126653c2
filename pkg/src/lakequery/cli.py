"""Command line entry point.

Subcommands: catalog inspection, querying, plan explanation, deterministic
transcript replay, the benchmark suite, and fixture materialization. With
`--format json` everything on stdout is one JSON document; diagnostics go to
stderr. Exit codes: 0 success, 1 query failure (trace printed), 2 usage
error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .catalog import Catalog, CatalogError, load_catalog
from .executor import ExecutorConfig, QueryFailureError, run_query, render_trace
from .planir import PhysicalStep, render_physical_plan
from .llm import (
    LlmError,
    RecordingClient,
    RemoteChatBackend,
    ReplayBackend,
    ScriptedBackend,
    Transcript,
    load_scripted_fixtures,
    load_transcript,
    save_transcript,
)
from .operators import HttpQaBackend

EXIT_OK = 0
EXIT_QUERY_FAILED = 1
EXIT_USAGE = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lakequery",
        description="Translate natural-language queries over a multi-modal data lake "
        "into executable plans and run them.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_catalog = sub.add_parser("catalog", help="list datasets and columns of a lake")
    p_catalog.add_argument("root", help="catalog root directory (contains catalog.json)")
    p_catalog.add_argument("--format", choices=("text", "json"), default="text")

    for name, help_text in (
        ("query", "run a query and print its result"),
        ("explain", "run a query and print the plan trace"),
        ("replay", "re-run a query deterministically from a recorded transcript"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("root")
        p.add_argument("query")
        p.add_argument("--format", choices=("text", "json"), default="text")
        p.add_argument("--max-retries", type=int, default=3)
        p.add_argument("--no-prune", action="store_true", help="skip LLM column pruning")
        p.add_argument("--out", default=".", help="directory for plot artifacts")
        p.add_argument("--qa-url", help="HTTP QA backend endpoint (default: fixture annotations)")
        p.add_argument(
            "--transcript",
            required=name == "replay",
            help="transcript path (replay source or recording target)",
        )
        if name == "replay":
            continue
        p.add_argument(
            "--backend",
            choices=("remote", "replay", "scripted"),
            default="remote",
        )
        p.add_argument("--scripted", help="scripted fixture JSON file ({tag: [responses...]})")

    p_bench = sub.add_parser("bench", help="run the query suite and print the report")
    p_bench.add_argument("root", help="fixtures root (contains artwork/ and rotowire/)")
    p_bench.add_argument("--suite", required=True, help="suite JSON file")
    p_bench.add_argument("--transcripts", help="directory of per-case recorded transcripts")
    p_bench.add_argument("--scripted-dir", help="directory of per-case scripted JSON files")
    p_bench.add_argument("--flawed-dir", help="directory of scripted overrides to inject failures")
    p_bench.add_argument("--format", choices=("text", "json"), default="text")
    p_bench.add_argument("--report", help="also write the JSON report to this path")
    p_bench.add_argument("--max-retries", type=int, default=3)

    p_fixtures = sub.add_parser(
        "fixtures", help="materialize fixture lakes, suite, gold scripts and transcripts"
    )
    p_fixtures.add_argument("dest")
    p_fixtures.add_argument("--seed", type=int, default=7)

    return parser


class UsageError(Exception):
    pass


def _make_client(args: argparse.Namespace, record: list) -> object:
    backend_kind = getattr(args, "backend", "replay")
    if args.command == "replay":
        backend_kind = "replay"
    if backend_kind == "replay":
        if not args.transcript:
            raise UsageError("the replay backend needs --transcript")
        client: object = ReplayBackend(load_transcript(args.transcript))
        return client
    if backend_kind == "scripted":
        if not args.scripted:
            raise UsageError("the scripted backend needs --scripted FILE")
        client = ScriptedBackend(json.loads(Path(args.scripted).read_text(encoding="utf-8")))
    else:
        client = RemoteChatBackend()
    if args.transcript:
        # Record-by-default: a transcript path plus a live backend records the run.
        transcript = Transcript()
        record.append((transcript, args.transcript))
        client = RecordingClient(client, transcript)
    return client


def _config(args: argparse.Namespace) -> ExecutorConfig:
    qa_backend = HttpQaBackend(args.qa_url) if getattr(args, "qa_url", None) else None
    return ExecutorConfig(
        max_retries=args.max_retries,
        prune=not args.no_prune,
        qa_backend=qa_backend,
    )


def _print_result(result, args: argparse.Namespace) -> None:
    out_dir = Path(args.out)
    paths = {}
    if result.kind == "plot":
        out_dir.mkdir(parents=True, exist_ok=True)
        json_path = out_dir / "plot.json"
        svg_path = out_dir / "plot.svg"
        json_path.write_text(result.plot_spec.to_json() + "\n", encoding="utf-8")
        svg_path.write_text(result.svg, encoding="utf-8")
        paths = {"json": str(json_path), "svg": str(svg_path)}
    if args.format == "json":
        body = result.to_json_dict()
        if paths:
            body["paths"] = paths
        print(json.dumps(body, sort_keys=True))
        return
    if result.kind == "value":
        from .relation import render_cell

        print(render_cell(result.value))
    elif result.kind == "table":
        print(result.relation.pretty())
    else:
        print(f"plot written: {paths['json']} {paths['svg']}")


def _cmd_catalog(args: argparse.Namespace) -> int:
    catalog = load_catalog(args.root)
    if args.format == "json":
        body = [
            {
                "name": d.name,
                "kind": d.kind,
                "columns": [
                    {"name": c.name, "type": c.semantic_type, "samples": list(c.samples)}
                    for c in d.columns
                ],
            }
            for d in catalog.datasets
        ]
        print(json.dumps(body, sort_keys=True))
        return EXIT_OK
    for descriptor in catalog.datasets:
        print(f"{descriptor.name} ({descriptor.kind})")
        for column in descriptor.columns:
            samples = ", ".join(column.samples[:3])
            suffix = f"  e.g. {samples}" if samples else ""
            print(f"  {column.name}: {column.semantic_type}{suffix}")
    return EXIT_OK


def _cmd_query(args: argparse.Namespace) -> int:
    catalog = load_catalog(args.root)
    record: list = []
    client = _make_client(args, record)
    config = _config(args)
    try:
        result = run_query(args.query, catalog, client, config)
    except QueryFailureError as exc:
        _print_failure(exc, args)
        return EXIT_QUERY_FAILED
    for transcript, path in record:
        save_transcript(transcript, path)
        print(f"transcript recorded: {path}", file=sys.stderr)
    if args.command == "explain":
        if args.format == "json":
            print(json.dumps({"trace": list(result.trace)}, sort_keys=True))
        else:
            print(render_trace(result.trace))
            print()
            print("physical plan:")
            print(render_physical_plan(_steps_from_trace(result.trace)))
        return EXIT_OK
    _print_result(result, args)
    return EXIT_OK


def _steps_from_trace(trace) -> list[PhysicalStep]:
    steps = []
    for event in trace:
        if event.get("event") == "plan":
            steps = []  # a replanned run discards the earlier attempt
        elif event.get("event") == "step":
            steps.append(
                PhysicalStep(
                    operator=event["operator"],
                    args=event["args"],
                    inputs=tuple(event["inputs"]),
                    output=event["output"],
                )
            )
    return steps


def _print_failure(exc: QueryFailureError, args: argparse.Namespace) -> None:
    if args.format == "json":
        print(json.dumps({"error": str(exc), "trace": exc.trace}, sort_keys=True))
    else:
        print(render_trace(exc.trace))
        print(f"query failed: {exc}")


def _cmd_bench(args: argparse.Namespace) -> int:
    from .bench.suite import load_suite, run_suite

    root = Path(args.root)
    cases = load_suite(args.suite)
    catalogs: dict[str, Catalog] = {
        "artwork": load_catalog(root / "artwork"),
        "rotowire": load_catalog(root / "rotowire"),
    }
    if args.scripted_dir or args.flawed_dir:
        base_dir = Path(args.scripted_dir) if args.scripted_dir else root / "scripted"
        flawed_dir = Path(args.flawed_dir) if args.flawed_dir else None

        def backend(case_id: str):
            path = base_dir / f"{case_id}.json"
            if flawed_dir is not None and (flawed_dir / f"{case_id}.json").exists():
                path = flawed_dir / f"{case_id}.json"
            return load_scripted_fixtures(path)

    elif args.transcripts or (root / "transcripts").is_dir():
        transcripts_dir = Path(args.transcripts) if args.transcripts else root / "transcripts"

        def backend(case_id: str):
            return ReplayBackend(load_transcript(transcripts_dir / f"{case_id}.jsonl"))

    else:
        remote = RemoteChatBackend()

        def backend(case_id: str):
            return remote

    report = run_suite(cases, backend, catalogs, max_retries=args.max_retries)
    if args.report:
        Path(args.report).write_text(
            json.dumps(report.to_json_dict(), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
    if args.format == "json":
        print(json.dumps(report.to_json_dict(), sort_keys=True))
    else:
        print(report.render_text())
    return EXIT_OK


def _cmd_fixtures(args: argparse.Namespace) -> int:
    from .bench.fixtures import build_fixtures
    from .bench.suite import (
        ANECDOTES,
        anecdote_scripts,
        build_suite,
        flawed_scripts,
        run_suite,
        save_suite,
    )

    dest = Path(args.dest)
    build_fixtures(dest, args.seed)
    cases, scripts = build_suite(dest)
    save_suite(cases, dest / "suite.json")

    scripted_dir = dest / "scripted"
    scripted_dir.mkdir(exist_ok=True)
    for case_id, script in sorted(scripts.items()):
        (scripted_dir / f"{case_id}.json").write_text(
            json.dumps(script, indent=2, sort_keys=True, ensure_ascii=True) + "\n",
            encoding="utf-8",
        )

    flawed, injected = flawed_scripts()
    flawed_dir = dest / "flawed"
    flawed_dir.mkdir(exist_ok=True)
    for case_id, script in sorted(flawed.items()):
        (flawed_dir / f"{case_id}.json").write_text(
            json.dumps(script, indent=2, sort_keys=True, ensure_ascii=True) + "\n",
            encoding="utf-8",
        )
    (flawed_dir / "injected.json").write_text(
        json.dumps(injected, indent=2, sort_keys=True, ensure_ascii=True) + "\n",
        encoding="utf-8",
    )

    # Record gold transcripts by running every case against its gold script.
    catalogs = {
        "artwork": load_catalog(dest / "artwork"),
        "rotowire": load_catalog(dest / "rotowire"),
    }
    transcripts_dir = dest / "transcripts"
    transcripts_dir.mkdir(exist_ok=True)
    recorded: dict[str, Transcript] = {}

    def recording_factory(case_id: str):
        transcript = Transcript()
        recorded[case_id] = transcript
        return RecordingClient(ScriptedBackend(scripts[case_id]), transcript)

    report = run_suite(cases, recording_factory, catalogs)
    bad = [o.case_id for o in report.outcomes if not o.physical_correct]
    if bad:
        print(f"gold runs failed for: {', '.join(bad)}", file=sys.stderr)
        return EXIT_QUERY_FAILED
    for case_id, transcript in recorded.items():
        save_transcript(transcript, transcripts_dir / f"{case_id}.jsonl")

    # Anecdote transcripts exercise the full pipeline including pruning.
    for name, script in anecdote_scripts(dest).items():
        case_id = ANECDOTES[name]
        case = next(c for c in cases if c.id == case_id)
        transcript = Transcript()
        client = RecordingClient(ScriptedBackend(script), transcript)
        run_query(case.query, catalogs[case.dataset], client, ExecutorConfig())
        save_transcript(transcript, transcripts_dir / f"{name}.jsonl")

    print(f"fixtures written under {dest} (48 cases, gold transcripts, flawed scripts)")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.WARNING, format="%(message)s")
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else int(exc.code or 0)
    try:
        if args.command == "catalog":
            return _cmd_catalog(args)
        if args.command in ("query", "explain", "replay"):
            return _cmd_query(args)
        if args.command == "bench":
            return _cmd_bench(args)
        if args.command == "fixtures":
            return _cmd_fixtures(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CatalogError, LlmError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_QUERY_FAILED
    parser.error(f"unknown command {args.command!r}")
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

"""Benchmark: fixture builders, query suite, gold transcripts, reports."""

from .fixtures import build_fixtures
from .oracle import compute_gold
from .suite import (
    BenchReport,
    QueryCase,
    build_suite,
    categorize_failure,
    load_suite,
    run_suite,
)

__all__ = [
    "BenchReport",
    "QueryCase",
    "build_fixtures",
    "build_suite",
    "categorize_failure",
    "compute_gold",
    "load_suite",
    "run_suite",
]

"""In-memory typed relations, the universal value flowing between operators.

Cells are plain scalars (text, number, boolean, null) or references into the
data lake (images, documents). Relations are immutable; operators always build
new ones.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

TEXT = "TEXT"
NUMBER = "NUMBER"
BOOLEAN = "BOOLEAN"
IMAGE = "IMAGE"
DOCUMENT = "DOCUMENT"

#: Types a catalog column may declare.
CATALOG_TYPES = (TEXT, NUMBER, IMAGE, DOCUMENT)
#: Types a relation column may carry (BOOLEAN appears in computed columns).
SEMANTIC_TYPES = CATALOG_TYPES + (BOOLEAN,)

_doc_text_cache: dict[str, str] = {}


class RelationError(ValueError):
    """Raised when a relation would violate its schema invariants."""


@dataclass(frozen=True)
class ImageRef:
    """Reference to an image file; content is only ever read by QA backends.

    `path` is relative to the lake root, so prompts and digests stay stable
    when the lake moves; `base` locates the root on the local filesystem.
    """

    path: str
    base: str = ""

    def resolve(self) -> str:
        return str(Path(self.base) / self.path) if self.base else self.path


@dataclass(frozen=True)
class DocRef:
    """Reference to a text document; text loads lazily on first access."""

    path: str
    base: str = ""

    def resolve(self) -> str:
        return str(Path(self.base) / self.path) if self.base else self.path

    def text(self) -> str:
        location = self.resolve()
        cached = _doc_text_cache.get(location)
        if cached is None:
            cached = Path(location).read_text(encoding="utf-8")
            _doc_text_cache[location] = cached
        return cached


Cell = object  # str | int | float | bool | None | ImageRef | DocRef


def _cell_matches(value: Cell, semantic_type: str) -> bool:
    if value is None:
        return True
    if semantic_type == NUMBER:
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if semantic_type == TEXT:
        return isinstance(value, str)
    if semantic_type == BOOLEAN:
        return isinstance(value, bool)
    if semantic_type == IMAGE:
        return isinstance(value, ImageRef)
    if semantic_type == DOCUMENT:
        return isinstance(value, DocRef)
    return False


@dataclass(frozen=True)
class Relation:
    """Ordered schema of (name, semantic type) plus rows of matching cells."""

    schema: tuple[tuple[str, str], ...]
    rows: tuple[tuple[Cell, ...], ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        names = [name for name, _ in self.schema]
        if len(set(names)) != len(names):
            raise RelationError(f"duplicate column names in schema: {names}")
        for _, stype in self.schema:
            if stype not in SEMANTIC_TYPES:
                raise RelationError(f"unknown semantic type {stype!r}")
        arity = len(self.schema)
        for i, row in enumerate(self.rows):
            if len(row) != arity:
                raise RelationError(
                    f"row {i} has {len(row)} cells, schema has {arity} columns"
                )
            for (name, stype), value in zip(self.schema, row):
                if not _cell_matches(value, stype):
                    raise RelationError(
                        f"row {i}, column {name!r}: {value!r} is not {stype}"
                    )

    @classmethod
    def build(
        cls,
        schema: Sequence[tuple[str, str]],
        rows: Iterable[Sequence[Cell]] = (),
    ) -> "Relation":
        return cls(tuple((n, t) for n, t in schema), tuple(tuple(r) for r in rows))

    @property
    def columns(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.schema)

    @property
    def types(self) -> tuple[str, ...]:
        return tuple(stype for _, stype in self.schema)

    def __len__(self) -> int:
        return len(self.rows)

    def column_index(self, name: str) -> int:
        for i, (col, _) in enumerate(self.schema):
            if col == name:
                return i
        raise RelationError(f"unknown column {name!r}")

    def column_type(self, name: str) -> str:
        return self.schema[self.column_index(name)][1]

    def has_column(self, name: str) -> bool:
        return any(col == name for col, _ in self.schema)

    def column_values(self, name: str) -> list[Cell]:
        idx = self.column_index(name)
        return [row[idx] for row in self.rows]

    def with_column(self, name: str, semantic_type: str, values: Sequence[Cell]) -> "Relation":
        """New relation with one appended column; row count must match."""
        if self.has_column(name):
            raise RelationError(f"column {name!r} already exists")
        if len(values) != len(self.rows):
            raise RelationError("appended column length does not match row count")
        schema = self.schema + ((name, semantic_type),)
        rows = tuple(row + (values[i],) for i, row in enumerate(self.rows))
        return Relation(schema, rows)

    def take_rows(self, indices: Sequence[int]) -> "Relation":
        return Relation(self.schema, tuple(self.rows[i] for i in indices))

    def to_json_dict(self) -> dict:
        return {
            "schema": [[n, t] for n, t in self.schema],
            "rows": [[json_cell(v) for v in row] for row in self.rows],
        }

    def pretty(self) -> str:
        """Fixed-width text table, deterministic for replay output."""
        header = list(self.columns)
        body = [[render_cell(v) for v in row] for row in self.rows]
        widths = [len(h) for h in header]
        for row in body:
            for i, cell in enumerate(row):
                widths[i] = max(widths[i], len(cell))
        def fmt(cells: list[str]) -> str:
            return " | ".join(c.ljust(widths[i]) for i, c in enumerate(cells))
        lines = [fmt(header), "-+-".join("-" * w for w in widths)]
        lines.extend(fmt(row) for row in body)
        return "\n".join(lines)


def render_cell(value: Cell) -> str:
    """Human/prompt rendering; references render as their path."""
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (ImageRef, DocRef)):
        return value.path
    if isinstance(value, float):
        return repr(value)
    return str(value)


def json_cell(value: Cell) -> object:
    """JSON-safe rendering; references collapse to their path string."""
    if isinstance(value, (ImageRef, DocRef)):
        return value.path
    return value


def relation_digest_payload(rel: Relation) -> str:
    """Canonical JSON used when digesting a relation for comparison."""
    return json.dumps(rel.to_json_dict(), sort_keys=True, separators=(",", ":"))

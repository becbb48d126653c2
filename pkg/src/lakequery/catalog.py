"""Data-lake catalog: manifest loading, collection virtualization, discovery.

A catalog root holds a `catalog.json` manifest listing tables (CSV files),
image collections (directories of image files) and text collections
(directories of .txt files). Collections are virtualized as two-column
tables: a TEXT key column plus an IMAGE or DOCUMENT payload column, so they
can take part in joins like any table.
"""

from __future__ import annotations

import csv
import json
import logging
import re
from dataclasses import dataclass
from pathlib import Path

from .relation import (
    CATALOG_TYPES,
    DOCUMENT,
    IMAGE,
    NUMBER,
    TEXT,
    DocRef,
    ImageRef,
    Relation,
    render_cell,
)

logger = logging.getLogger(__name__)

MANIFEST_NAME = "catalog.json"
ANNOTATIONS_NAME = "annotations.json"
SAMPLE_COUNT = 5

_IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".gif", ".bmp")


class CatalogError(Exception):
    pass


@dataclass(frozen=True)
class ColumnDescriptor:
    name: str
    semantic_type: str
    samples: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.name:
            raise CatalogError("column name must be nonempty")
        if self.semantic_type not in CATALOG_TYPES:
            raise CatalogError(f"column {self.name!r}: bad type {self.semantic_type!r}")
        if len(self.samples) > SAMPLE_COUNT:
            raise CatalogError(f"column {self.name!r}: too many samples")


@dataclass(frozen=True)
class DatasetDescriptor:
    name: str
    kind: str  # table | image_collection | text_collection
    columns: tuple[ColumnDescriptor, ...]
    source: str  # filesystem location of the data
    rel_source: str = ""  # location relative to the lake root (rendered in refs)

    def __post_init__(self) -> None:
        if self.kind not in ("table", "image_collection", "text_collection"):
            raise CatalogError(f"dataset {self.name!r}: bad kind {self.kind!r}")
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise CatalogError(f"dataset {self.name!r}: duplicate column names")
        if self.kind != "table":
            payload = IMAGE if self.kind == "image_collection" else DOCUMENT
            if (
                len(self.columns) != 2
                or self.columns[0].semantic_type != TEXT
                or self.columns[1].semantic_type != payload
            ):
                raise CatalogError(
                    f"dataset {self.name!r}: a {self.kind} must have exactly two "
                    f"columns (TEXT key, {payload} payload)"
                )

    def column_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.columns)

    def restrict(self, keep: set[str]) -> "DatasetDescriptor":
        columns = tuple(c for c in self.columns if c.name in keep)
        return DatasetDescriptor(self.name, self.kind, columns, self.source, self.rel_source)


@dataclass(frozen=True)
class Catalog:
    datasets: tuple[DatasetDescriptor, ...]

    def __post_init__(self) -> None:
        names = [d.name for d in self.datasets]
        if len(set(names)) != len(names):
            raise CatalogError("duplicate dataset names in catalog")

    def __len__(self) -> int:
        return len(self.datasets)

    def names(self) -> tuple[str, ...]:
        return tuple(d.name for d in self.datasets)

    def get(self, name: str) -> DatasetDescriptor:
        for d in self.datasets:
            if d.name == name:
                return d
        raise CatalogError(f"unknown dataset {name!r}")


# --- loading -----------------------------------------------------------------

def load_catalog(root: str | Path) -> Catalog:
    root = Path(root)
    manifest_path = root / MANIFEST_NAME
    if not manifest_path.exists():
        raise CatalogError(f"missing manifest {manifest_path}")
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CatalogError(f"malformed manifest {manifest_path}: {exc}") from exc
    if not isinstance(manifest, list):
        raise CatalogError(f"manifest {manifest_path} must be a JSON array")
    datasets = []
    for entry in manifest:
        if not isinstance(entry, dict) or "name" not in entry:
            raise CatalogError(f"malformed manifest entry: {entry!r}")
        name = entry["name"]
        try:
            datasets.append(_load_entry(root, entry))
        except CatalogError:
            raise
        except Exception as exc:
            raise CatalogError(f"malformed manifest entry {name!r}: {exc}") from exc
    return Catalog(tuple(datasets))


def _load_entry(root: Path, entry: dict) -> DatasetDescriptor:
    name = entry["name"]
    kind = entry.get("kind", "table")
    rel = str(entry.get("path", name))
    source = root / rel
    if not source.exists():
        raise CatalogError(f"dataset {name!r}: source {source} does not exist")
    if kind == "table":
        header, types, rows = _read_csv(source, entry.get("columns"))
        columns = tuple(
            ColumnDescriptor(
                col,
                types[i],
                tuple(render_cell(r[i]) for r in rows[:SAMPLE_COUNT] if r[i] is not None),
            )
            for i, col in enumerate(header)
        )
        return DatasetDescriptor(name, kind, columns, str(source), rel)
    if kind in ("image_collection", "text_collection"):
        default_cols = ["img_path", "image"] if kind == "image_collection" else ["doc_id", "document"]
        col_names = entry.get("columns", default_cols)
        if not (isinstance(col_names, list) and len(col_names) == 2):
            raise CatalogError(f"dataset {name!r}: collection columns must be two names")
        keys = _collection_keys(source, kind)
        payload = IMAGE if kind == "image_collection" else DOCUMENT
        if kind == "image_collection":
            paths = [f"{rel}/{k}" for k in keys[:SAMPLE_COUNT]]
        else:
            paths = [f"{rel}/{k}.txt" for k in keys[:SAMPLE_COUNT]]
        columns = (
            ColumnDescriptor(str(col_names[0]), TEXT, tuple(keys[:SAMPLE_COUNT])),
            ColumnDescriptor(str(col_names[1]), payload, tuple(paths)),
        )
        return DatasetDescriptor(name, kind, columns, str(source), rel)
    raise CatalogError(f"dataset {name!r}: unknown kind {kind!r}")


def _collection_keys(source: Path, kind: str) -> list[str]:
    if not source.is_dir():
        raise CatalogError(f"collection source {source} is not a directory")
    if kind == "image_collection":
        return sorted(
            p.name for p in source.iterdir() if p.suffix.lower() in _IMAGE_SUFFIXES
        )
    return sorted(p.stem for p in source.iterdir() if p.suffix == ".txt")


def _read_csv(path: Path, declared: list | None) -> tuple[list[str], list[str], list[tuple]]:
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise CatalogError(f"{path}: empty CSV (missing header row)")
        raw_rows = [row for row in reader]
    if declared is not None:
        by_name = {}
        for item in declared:
            if not isinstance(item, dict) or "name" not in item or "type" not in item:
                raise CatalogError(f"{path}: declared columns must be {{name, type}} objects")
            by_name[item["name"]] = item["type"]
        types = [by_name.get(col, TEXT) for col in header]
    else:
        types = [_sniff_type(i, raw_rows) for i in range(len(header))]
    rows = []
    for row in raw_rows:
        if len(row) != len(header):
            raise CatalogError(f"{path}: row has {len(row)} cells, header has {len(header)}")
        rows.append(tuple(_parse_cell(value, types[i]) for i, value in enumerate(row)))
    return header, types, rows


def _sniff_type(index: int, rows: list[list[str]]) -> str:
    saw_value = False
    for row in rows:
        value = row[index] if index < len(row) else ""
        if value == "":
            continue
        saw_value = True
        if not re.fullmatch(r"-?\d+(\.\d+)?", value.strip()):
            return TEXT
    return NUMBER if saw_value else TEXT


def _parse_cell(value: str, semantic_type: str):
    if value == "":
        return None
    if semantic_type == NUMBER:
        text = value.strip()
        return float(text) if "." in text else int(text)
    return value


def load_relation(descriptor: DatasetDescriptor) -> Relation:
    """Materialize a descriptor's data as a relation (restricted to its columns)."""
    source = Path(descriptor.source)
    if descriptor.kind == "table":
        header, types, rows = _read_csv(source, None)
        declared = {c.name: c.semantic_type for c in descriptor.columns}
        keep = [i for i, col in enumerate(header) if col in declared]
        schema = tuple((header[i], declared[header[i]]) for i in keep)
        out_rows = []
        for row in rows:
            out_rows.append(
                tuple(_parse_cell_typed(row[i], declared[header[i]]) for i in keep)
            )
        return Relation(schema, tuple(out_rows))
    keys = _collection_keys(source, descriptor.kind)
    key_col, payload_col = descriptor.columns
    rel = descriptor.rel_source or source.name
    lake_root = source
    for _ in Path(rel).parts:
        lake_root = lake_root.parent
    base = str(lake_root)
    if descriptor.kind == "image_collection":
        rows = tuple((k, ImageRef(f"{rel}/{k}", base)) for k in keys)
    else:
        rows = tuple((k, DocRef(f"{rel}/{k}.txt", base)) for k in keys)
    return Relation(
        ((key_col.name, TEXT), (payload_col.name, payload_col.semantic_type)), rows
    )


def _parse_cell_typed(value, semantic_type: str):
    if value is None:
        return None
    if semantic_type == NUMBER and isinstance(value, str):
        text = value.strip()
        try:
            return float(text) if "." in text else int(text)
        except ValueError:
            return None
    if semantic_type == TEXT and not isinstance(value, str):
        return render_cell(value)
    return value


# --- discovery ---------------------------------------------------------------

_NAME_WEIGHT = 3
_COLUMN_WEIGHT = 2
_SAMPLE_WEIGHT = 1


def _tokens(text: str) -> set[str]:
    words = re.findall(r"[a-z0-9]+", text.lower())
    normalized = set()
    for word in words:
        normalized.add(word)
        if len(word) > 3 and word.endswith("s"):
            normalized.add(word[:-1])
    return normalized


def relevance_score(query: str, descriptor: DatasetDescriptor) -> int:
    """Deterministic lexical overlap between a query and a dataset."""
    query_tokens = _tokens(query)
    name_tokens = _tokens(descriptor.name)
    column_tokens = set()
    sample_tokens = set()
    for column in descriptor.columns:
        column_tokens |= _tokens(column.name)
        for sample in column.samples:
            sample_tokens |= _tokens(sample)
    column_tokens -= name_tokens
    sample_tokens -= name_tokens | column_tokens
    return (
        _NAME_WEIGHT * len(query_tokens & name_tokens)
        + _COLUMN_WEIGHT * len(query_tokens & column_tokens)
        + _SAMPLE_WEIGHT * len(query_tokens & sample_tokens)
    )


def discover(query: str, catalog: Catalog, k: int) -> list[DatasetDescriptor]:
    """Top-k datasets by lexical relevance; ties break on name ascending."""
    if k < 1:
        raise ValueError("k must be >= 1")
    scored = [(-relevance_score(query, d), d.name, d) for d in catalog.datasets]
    scored.sort(key=lambda item: (item[0], item[1]))
    return [d for _, _, d in scored[:k]]


# --- column pruning ----------------------------------------------------------

def prune_columns(query: str, descriptor: DatasetDescriptor, llm) -> DatasetDescriptor:
    """Ask the LLM which columns matter for the query; degrade to unpruned.

    Collections are never pruned: their two columns are structural.
    """
    if descriptor.kind != "table":
        raise CatalogError(f"cannot prune columns of a {descriptor.kind}")
    from . import prompts  # deferred: prompts renders descriptors
    from .llm import ChatMessage, ChatRequest

    messages = prompts.build_pruning_prompt(query, descriptor)
    request = ChatRequest(
        messages=tuple(messages),
        tag="discovery",
        template_hash=prompts.template_hash("discovery"),
    )
    for attempt in range(2):
        response = llm.complete(request)
        selected = _parse_column_list(response)
        if selected is None:
            if attempt == 0:
                retry_text = (
                    messages[-1].content
                    + "\n\nYour previous reply could not be parsed. Respond with only a "
                    "fenced JSON array of column names."
                )
                request = ChatRequest(
                    messages=tuple(messages[:-1]) + (ChatMessage("user", retry_text),),
                    tag="discovery",
                    template_hash=prompts.template_hash("discovery"),
                )
                continue
            logger.warning(
                "column pruning for %s: unparseable response; keeping all columns",
                descriptor.name,
            )
            return descriptor
        keep = {c.name for c in descriptor.columns} & set(selected)
        if not keep:
            logger.warning(
                "column pruning for %s selected nothing; keeping all columns",
                descriptor.name,
            )
            return descriptor
        return descriptor.restrict(keep)
    return descriptor


def _parse_column_list(response: str) -> list[str] | None:
    fenced = re.findall(r"```[a-zA-Z]*\n?(.*?)```", response, re.DOTALL)
    for block in fenced:
        block = block.strip()
        try:
            data = json.loads(block)
            if isinstance(data, list):
                return [str(x) for x in data]
        except json.JSONDecodeError:
            pass
        if block and "\n" not in block and "," in block:
            return [part.strip().strip("\"'") for part in block.split(",") if part.strip()]
        if block:
            lines = [l.strip().lstrip("-* ").strip("\"'") for l in block.splitlines() if l.strip()]
            if lines and all(re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", l) for l in lines):
                return lines
    return None

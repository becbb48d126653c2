"""Natural-language query planning and execution over multi-modal data lakes."""

from .catalog import Catalog, ColumnDescriptor, DatasetDescriptor, discover, load_catalog
from .executor import ExecutorConfig, QueryFailureError, QueryResult, run_query
from .llm import (
    ChatMessage,
    ChatRequest,
    RecordingClient,
    RemoteChatBackend,
    ReplayBackend,
    ScriptedBackend,
    Transcript,
    load_transcript,
    save_transcript,
)
from .relation import Relation

__version__ = "0.1.0"

__all__ = [
    "Catalog",
    "ChatMessage",
    "ChatRequest",
    "ColumnDescriptor",
    "DatasetDescriptor",
    "ExecutorConfig",
    "QueryFailureError",
    "QueryResult",
    "RecordingClient",
    "RemoteChatBackend",
    "Relation",
    "ReplayBackend",
    "ScriptedBackend",
    "Transcript",
    "discover",
    "load_catalog",
    "load_transcript",
    "run_query",
    "save_transcript",
    "__version__",
]

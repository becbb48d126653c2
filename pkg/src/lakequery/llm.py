"""Chat-completion client: remote HTTP, transcript replay, scripted fixtures.

Every request is digested (sha256 over its canonical JSON) so a replayed run
can prove it is byte-identical to the recorded one: replay consumes transcript
entries in order and fails loudly on the first digest mismatch, which is how
prompt-template drift surfaces.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import requests

PHASE_TAGS = ("discovery", "planning", "mapping", "recovery", "udf")

API_KEY_ENV = "LAKEQUERY_API_KEY"
BASE_URL_ENV = "LAKEQUERY_BASE_URL"
MODEL_ENV = "LAKEQUERY_MODEL"


class LlmError(Exception):
    """Base class for client failures."""


class RemoteBackendError(LlmError):
    pass


class ReplayMissError(LlmError):
    """The live request diverged from the recorded transcript."""


class ScriptExhaustedError(LlmError):
    """The scripted fixture has no response left for a tag."""


class TranscriptError(LlmError):
    pass


@dataclass(frozen=True)
class ChatMessage:
    role: str  # system | user | assistant
    content: str

    def __post_init__(self) -> None:
        if self.role not in ("system", "user", "assistant"):
            raise ValueError(f"invalid role {self.role!r}")
        if self.role in ("system", "user") and not self.content:
            raise ValueError(f"empty content for {self.role} message")


@dataclass(frozen=True)
class ChatRequest:
    messages: tuple[ChatMessage, ...]
    tag: str
    temperature: float = 0.0
    max_tokens: int = 1024
    template_hash: str | None = None

    def __post_init__(self) -> None:
        if not self.messages:
            raise ValueError("request needs at least one message")
        if self.tag not in PHASE_TAGS:
            raise ValueError(f"unknown phase tag {self.tag!r}")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_tokens <= 0:
            raise ValueError("max_tokens must be positive")


def request_digest(request: ChatRequest) -> str:
    payload = {
        "tag": request.tag,
        "messages": [{"role": m.role, "content": m.content} for m in request.messages],
        "temperature": request.temperature,
        "max_tokens": request.max_tokens,
        "template_hash": request.template_hash,
    }
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=True)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class TranscriptEntry:
    tag: str
    request_digest: str
    request_messages: tuple[tuple[str, str], ...]  # (role, content) pairs
    response: str
    template_hash: str | None = None


@dataclass
class Transcript:
    entries: list[TranscriptEntry] = field(default_factory=list)

    def append(self, request: ChatRequest, response: str) -> None:
        self.entries.append(
            TranscriptEntry(
                tag=request.tag,
                request_digest=request_digest(request),
                request_messages=tuple((m.role, m.content) for m in request.messages),
                response=response,
                template_hash=request.template_hash,
            )
        )

    def __len__(self) -> int:
        return len(self.entries)


def save_transcript(transcript: Transcript, path: str | Path) -> None:
    lines = []
    for entry in transcript.entries:
        record = {
            "tag": entry.tag,
            "request_digest": entry.request_digest,
            "request_messages": [
                {"role": role, "content": content} for role, content in entry.request_messages
            ],
            "response": entry.response,
        }
        if entry.template_hash is not None:
            record["template_hash"] = entry.template_hash
        lines.append(json.dumps(record, sort_keys=True, ensure_ascii=True))
    Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")


def load_transcript(path: str | Path) -> Transcript:
    transcript = Transcript()
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
            entry = TranscriptEntry(
                tag=record["tag"],
                request_digest=record["request_digest"],
                request_messages=tuple(
                    (m["role"], m["content"]) for m in record["request_messages"]
                ),
                response=record["response"],
                template_hash=record.get("template_hash"),
            )
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise TranscriptError(f"{path}: malformed transcript line {lineno}: {exc}") from exc
        transcript.entries.append(entry)
    return transcript


class RemoteChatBackend:
    """OpenAI-compatible chat-completions wire shape over HTTP.

    Retries transient network/HTTP failures up to 3 times with backoff.
    Safe for concurrent use (no mutable state beyond the session).
    """

    MAX_ATTEMPTS = 3

    def __init__(
        self,
        base_url: str | None = None,
        model: str | None = None,
        api_key: str | None = None,
        timeout: float = 60.0,
        backoff: float = 1.0,
    ):
        self.base_url = (base_url or os.environ.get(BASE_URL_ENV, "")).rstrip("/")
        if not self.base_url:
            raise RemoteBackendError(f"no base URL configured (set {BASE_URL_ENV})")
        self.model = model or os.environ.get(MODEL_ENV, "gpt-4")
        self.api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV, "")
        self.timeout = timeout
        self.backoff = backoff

    def complete(self, request: ChatRequest) -> str:
        payload = {
            "model": self.model,
            "messages": [{"role": m.role, "content": m.content} for m in request.messages],
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        }
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        url = f"{self.base_url}/chat/completions"
        last_error: Exception | None = None
        for attempt in range(1, self.MAX_ATTEMPTS + 1):
            try:
                response = requests.post(url, json=payload, headers=headers, timeout=self.timeout)
                if response.status_code >= 500 or response.status_code == 429:
                    raise RemoteBackendError(f"HTTP {response.status_code}: {response.text[:200]}")
                if response.status_code != 200:
                    raise RemoteBackendError(
                        f"HTTP {response.status_code}: {response.text[:200]}"
                    ) from None
                body = response.json()
                return body["choices"][0]["message"]["content"]
            except (requests.RequestException, RemoteBackendError, KeyError, ValueError) as exc:
                last_error = exc
                if isinstance(exc, RemoteBackendError) and "HTTP 4" in str(exc) and "HTTP 429" not in str(exc):
                    break  # client errors are not retryable
                if attempt < self.MAX_ATTEMPTS:
                    time.sleep(self.backoff * attempt)
        raise RemoteBackendError(f"remote completion failed after retries: {last_error}")


class ReplayBackend:
    """Serves recorded responses in order, matched by request digest."""

    def __init__(self, transcript: Transcript):
        self.transcript = transcript
        self._cursor = 0
        self._lock = threading.Lock()

    def complete(self, request: ChatRequest) -> str:
        with self._lock:
            if self._cursor >= len(self.transcript.entries):
                raise ReplayMissError(
                    f"transcript exhausted: no entry left for a {request.tag!r} request"
                )
            entry = self.transcript.entries[self._cursor]
            digest = request_digest(request)
            if entry.request_digest != digest:
                detail = ""
                if entry.template_hash and request.template_hash and entry.template_hash != request.template_hash:
                    detail = " (prompt template changed since recording)"
                raise ReplayMissError(
                    f"replay miss at entry {self._cursor + 1}: recorded tag {entry.tag!r}, "
                    f"got tag {request.tag!r} with different request digest{detail}"
                )
            self._cursor += 1
            return entry.response


class ScriptedBackend:
    """Test fixture backend: responses looked up by phase tag and ordinal."""

    def __init__(self, fixtures: Mapping[str, Sequence[str]]):
        unknown = set(fixtures) - set(PHASE_TAGS)
        if unknown:
            raise ValueError(f"unknown fixture tags: {sorted(unknown)}")
        self._fixtures = {tag: list(responses) for tag, responses in fixtures.items()}
        self._counters = {tag: 0 for tag in self._fixtures}
        self._lock = threading.Lock()

    def complete(self, request: ChatRequest) -> str:
        with self._lock:
            responses = self._fixtures.get(request.tag)
            ordinal = self._counters.get(request.tag, 0)
            if not responses or ordinal >= len(responses):
                raise ScriptExhaustedError(
                    f"scripted fixture exhausted for tag {request.tag!r} (request #{ordinal + 1})"
                )
            self._counters[request.tag] = ordinal + 1
            return responses[ordinal]


class RecordingClient:
    """Wraps a backend and appends every exchange to a transcript.

    A recorder is exclusive to one run; do not share across queries.
    """

    def __init__(self, inner, transcript: Transcript):
        self.inner = inner
        self.transcript = transcript

    def complete(self, request: ChatRequest) -> str:
        response = self.inner.complete(request)
        self.transcript.append(request, response)
        return response


def load_scripted_fixtures(path: str | Path) -> ScriptedBackend:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, dict):
        raise ValueError(f"{path}: scripted fixture file must be a JSON object")
    return ScriptedBackend(data)

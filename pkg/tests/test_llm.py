"""Chat client backends, digests, transcript persistence."""

import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest

from lakequery.llm import (
    ChatMessage,
    ChatRequest,
    RecordingClient,
    RemoteChatBackend,
    ReplayBackend,
    ReplayMissError,
    ScriptExhaustedError,
    ScriptedBackend,
    Transcript,
    TranscriptError,
    load_transcript,
    request_digest,
    save_transcript,
)


def _request(text: str, tag: str = "planning") -> ChatRequest:
    return ChatRequest(messages=(ChatMessage("user", text),), tag=tag)


class TestTypes:
    def test_empty_user_content_rejected(self):
        with pytest.raises(ValueError):
            ChatMessage("user", "")

    def test_assistant_content_may_be_empty(self):
        ChatMessage("assistant", "")

    def test_unknown_tag_rejected(self):
        with pytest.raises(ValueError):
            ChatRequest(messages=(ChatMessage("user", "x"),), tag="nonsense")

    def test_no_messages_rejected(self):
        with pytest.raises(ValueError):
            ChatRequest(messages=(), tag="planning")

    def test_digest_is_content_sensitive(self):
        base = _request("hello")
        assert request_digest(base) == request_digest(_request("hello"))
        assert request_digest(base) != request_digest(_request("hello!"))
        assert request_digest(base) != request_digest(_request("hello", tag="mapping"))
        tweaked = ChatRequest(messages=base.messages, tag="planning", template_hash="abc")
        assert request_digest(base) != request_digest(tweaked)


class TestScripted:
    def test_responses_by_tag_and_ordinal(self):
        backend = ScriptedBackend({"planning": ["Step 1: do X"], "mapping": ["a", "b"]})
        assert backend.complete(_request("q")) == "Step 1: do X"
        assert backend.complete(_request("q", "mapping")) == "a"
        assert backend.complete(_request("other", "mapping")) == "b"

    def test_exhaustion_raises(self):
        backend = ScriptedBackend({"planning": ["only"]})
        backend.complete(_request("q"))
        with pytest.raises(ScriptExhaustedError, match="planning"):
            backend.complete(_request("q"))

    def test_unknown_tag_in_fixtures_rejected(self):
        with pytest.raises(ValueError):
            ScriptedBackend({"bogus": ["x"]})


class TestTranscripts:
    def test_round_trip(self, tmp_path):
        transcript = Transcript()
        transcript.append(_request("one"), "first response")
        transcript.append(_request("two", "mapping"), "second response")
        path = tmp_path / "t.jsonl"
        save_transcript(transcript, path)
        loaded = load_transcript(path)
        assert loaded.entries == transcript.entries

    def test_empty_round_trip(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        save_transcript(Transcript(), path)
        assert path.read_text() == ""
        assert load_transcript(path).entries == []

    def test_truncated_line_reports_its_number(self, tmp_path):
        transcript = Transcript()
        transcript.append(_request("one"), "resp")
        transcript.append(_request("two"), "resp2")
        path = tmp_path / "t.jsonl"
        save_transcript(transcript, path)
        content = path.read_text().splitlines()
        content[1] = content[1][: len(content[1]) // 2]
        path.write_text("\n".join(content) + "\n")
        with pytest.raises(TranscriptError, match="line 2"):
            load_transcript(path)


class TestReplay:
    def test_replays_in_order(self):
        transcript = Transcript()
        transcript.append(_request("one"), "first")
        transcript.append(_request("two", "mapping"), "second")
        backend = ReplayBackend(transcript)
        assert backend.complete(_request("one")) == "first"
        assert backend.complete(_request("two", "mapping")) == "second"

    def test_modified_prompt_is_a_replay_miss_naming_the_tag(self):
        transcript = Transcript()
        transcript.append(_request("original prompt"), "resp")
        backend = ReplayBackend(transcript)
        with pytest.raises(ReplayMissError, match="planning"):
            backend.complete(_request("edited prompt"))

    def test_exhausted_transcript(self):
        backend = ReplayBackend(Transcript())
        with pytest.raises(ReplayMissError, match="exhausted"):
            backend.complete(_request("x"))

    def test_record_then_replay_reproduces_responses(self, tmp_path):
        transcript = Transcript()
        client = RecordingClient(ScriptedBackend({"planning": ["alpha", "beta"]}), transcript)
        first = [client.complete(_request("p1")), client.complete(_request("p2"))]
        path = tmp_path / "t.jsonl"
        save_transcript(transcript, path)
        replay = ReplayBackend(load_transcript(path))
        second = [replay.complete(_request("p1")), replay.complete(_request("p2"))]
        assert first == second


class _Handler(BaseHTTPRequestHandler):
    calls = []
    fail_first = 0

    def do_POST(self):
        body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
        _Handler.calls.append((self.path, body, self.headers.get("Authorization")))
        if _Handler.fail_first > 0:
            _Handler.fail_first -= 1
            self.send_response(503)
            self.end_headers()
            self.wfile.write(b"overloaded")
            return
        payload = {
            "choices": [
                {"message": {"role": "assistant", "content": f"echo: {body['messages'][-1]['content']}"}}
            ]
        }
        raw = json.dumps(payload).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(raw)))
        self.end_headers()
        self.wfile.write(raw)

    def log_message(self, *args):
        pass


@pytest.fixture()
def http_backend():
    server = HTTPServer(("127.0.0.1", 0), _Handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    _Handler.calls = []
    _Handler.fail_first = 0
    yield f"http://127.0.0.1:{server.server_port}"
    server.shutdown()


class TestRemote:
    def test_wire_shape_and_response_extraction(self, http_backend):
        client = RemoteChatBackend(base_url=http_backend, model="test-model", api_key="secret")
        response = client.complete(_request("ping"))
        assert response == "echo: ping"
        path, body, auth = _Handler.calls[0]
        assert path == "/chat/completions"
        assert body["model"] == "test-model"
        assert body["messages"] == [{"role": "user", "content": "ping"}]
        assert body["temperature"] == 0.0
        assert auth == "Bearer secret"

    def test_retries_transient_failures(self, http_backend):
        _Handler.fail_first = 2
        client = RemoteChatBackend(base_url=http_backend, model="m", api_key="", backoff=0.0)
        assert client.complete(_request("ping")) == "echo: ping"
        assert len(_Handler.calls) == 3

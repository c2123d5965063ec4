import json
import threading

import httpx
import pytest

from nomad.backends import (
    API_KEY_ENV,
    BackendError,
    ConfigError,
    HttpBackend,
    LlmRequest,
    MockBackend,
    RecordingBackend,
    ScriptedBackend,
    request_key,
)

REQ = LlmRequest("sys", "user", stage="concept_extractor")


def test_request_defaults_and_validation():
    assert (REQ.temperature, REQ.max_tokens) == (0.0, 4096)
    with pytest.raises(ValueError):
        LlmRequest("s", "u", temperature=-1)
    with pytest.raises(ValueError):
        LlmRequest("s", "u", max_tokens=0)


def test_request_key_shape():
    key = request_key(REQ)
    stage, digest = key.rsplit("-", 1)
    assert stage == "concept_extractor" and len(digest) == 20
    assert request_key(LlmRequest("sys", "user", temperature=0.7, stage="concept_extractor")) == key
    assert request_key(LlmRequest("sys", "user!", stage="concept_extractor")) != key
    assert request_key(LlmRequest("sys", "user", stage="validator")) != key


def test_record_then_replay(tmp_path):
    inner = ScriptedBackend({"concept_extractor": "answer"})
    rec = RecordingBackend(inner, tmp_path / "fx")
    assert rec.complete(REQ) == "answer"
    assert (tmp_path / "fx" / f"{request_key(REQ)}.txt").read_text() == "answer"
    mock = MockBackend(tmp_path / "fx")
    assert len(mock) == 1
    assert mock.complete(REQ) == "answer"
    with pytest.raises(BackendError, match="no fixture"):
        mock.complete(LlmRequest("other", "user", stage="concept_extractor"))


def test_mock_requires_directory(tmp_path):
    with pytest.raises(ConfigError):
        MockBackend(tmp_path / "missing")


def test_mock_is_safe_to_share(fixtures_dir):
    mock = MockBackend(fixtures_dir / "shop" / "mock")
    key = next(iter(sorted((fixtures_dir / "shop" / "mock").glob("*.txt"))))
    assert len(mock) == 5
    results = []

    def worker():
        results.append(mock._responses[key.stem])

    threads = [threading.Thread(target=worker) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len(set(results)) == 1


def test_scripted_queue_and_callables():
    b = ScriptedBackend({"a": ["one", lambda r: r.user_prompt.upper()], "b": "fixed"})
    ask = lambda stage: b.complete(LlmRequest("s", "hi", stage=stage))
    assert [ask("a"), ask("a"), ask("a"), ask("b")] == ["one", "HI", "HI", "fixed"]
    assert [r.stage for r in b.requests] == ["a", "a", "a", "b"]
    with pytest.raises(BackendError):
        ask("c")


def test_http_backend_requires_key(monkeypatch):
    monkeypatch.delenv(API_KEY_ENV, raising=False)
    with pytest.raises(ConfigError, match=API_KEY_ENV):
        HttpBackend("http://llm.local/v1/chat/completions", "m")
    with pytest.raises(ConfigError):
        HttpBackend("", "m", api_key="k")


def test_http_backend_request_and_response(monkeypatch):
    seen = {}

    def handler(request: httpx.Request):
        seen["auth"] = request.headers["authorization"]
        seen["body"] = json.loads(request.content)
        return httpx.Response(200, json={"choices": [{"message": {"content": "hello"}}]})

    monkeypatch.setenv(API_KEY_ENV, "secret")
    b = HttpBackend("http://llm.local/v1/chat/completions", "tiny", transport=httpx.MockTransport(handler))
    assert b.complete(REQ) == "hello"
    assert seen["auth"] == "Bearer secret"
    assert seen["body"]["model"] == "tiny"
    assert seen["body"]["temperature"] == 0.0 and seen["body"]["max_tokens"] == 4096
    assert [m["role"] for m in seen["body"]["messages"]] == ["system", "user"]
    b.close()


@pytest.mark.parametrize(
    "response",
    [httpx.Response(500, text="boom"), httpx.Response(200, json={"choices": []}), httpx.Response(200, text="not json")],
)
def test_http_backend_failures(response):
    b = HttpBackend("http://llm.local/x", "m", api_key="k", transport=httpx.MockTransport(lambda r: response))
    with pytest.raises(BackendError):
        b.complete(REQ)

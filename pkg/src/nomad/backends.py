"""LLM completion backends.

``HttpBackend`` talks to an OpenAI-style chat-completion endpoint.
``MockBackend`` replays responses from a fixture directory keyed by a hash
of the request; ``RecordingBackend`` writes such fixtures from any other
backend.  ``ScriptedBackend`` answers per stage from in-memory lists and is
meant for authoring fixtures and for tests.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Optional, Protocol, Sequence, Union

import httpx

__all__ = [
    "DEFAULT_TEMPERATURE",
    "DEFAULT_MAX_TOKENS",
    "API_KEY_ENV",
    "LlmRequest",
    "LlmBackend",
    "BackendError",
    "ConfigError",
    "request_key",
    "HttpBackend",
    "MockBackend",
    "RecordingBackend",
    "ScriptedBackend",
]

DEFAULT_TEMPERATURE = 0.0
DEFAULT_MAX_TOKENS = 4096
API_KEY_ENV = "NOMAD_API_KEY"


class BackendError(RuntimeError):
    """Transport failure or missing fixture."""


class ConfigError(ValueError):
    """Backend cannot be constructed from the given settings."""


@dataclass(frozen=True)
class LlmRequest:
    system_prompt: str
    user_prompt: str
    temperature: float = DEFAULT_TEMPERATURE
    max_tokens: int = DEFAULT_MAX_TOKENS
    # pipeline stage issuing the request; part of the fixture key
    stage: str = ""

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_tokens <= 0:
            raise ValueError("max_tokens must be positive")

    def to_dict(self) -> dict:
        return {
            "stage": self.stage,
            "system_prompt": self.system_prompt,
            "user_prompt": self.user_prompt,
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
        }


class LlmBackend(Protocol):
    def complete(self, request: LlmRequest) -> str: ...


def request_key(request: LlmRequest) -> str:
    """Stable fixture key: ``<stage>-<sha256 prefix of stage and prompts>``.

    Sampling parameters are deliberately not part of the key so that a
    fixture set recorded at one temperature replays at another.
    """
    payload = json.dumps(
        [request.stage, request.system_prompt, request.user_prompt],
        ensure_ascii=False,
        separators=(",", ":"),
    )
    digest = hashlib.sha256(payload.encode("utf-8")).hexdigest()[:20]
    stage = request.stage or "request"
    return f"{stage}-{digest}"


class HttpBackend:
    """OpenAI-compatible ``/chat/completions`` client.

    ``endpoint`` is the full URL of the completion route.  The API key is
    read from ``NOMAD_API_KEY`` unless passed explicitly.
    """

    def __init__(
        self,
        endpoint: str,
        model: str,
        api_key: Optional[str] = None,
        timeout: float = 120.0,
        transport: Optional[httpx.BaseTransport] = None,
    ):
        if not endpoint or not model:
            raise ConfigError("http backend needs both an endpoint and a model name")
        api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV)
        if not api_key:
            raise ConfigError(f"http backend needs the {API_KEY_ENV} environment variable")
        self.endpoint = endpoint
        self.model = model
        self._client = httpx.Client(
            timeout=timeout,
            transport=transport,
            headers={"Authorization": f"Bearer {api_key}"},
        )

    def complete(self, request: LlmRequest) -> str:
        body = {
            "model": self.model,
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
            "messages": [
                {"role": "system", "content": request.system_prompt},
                {"role": "user", "content": request.user_prompt},
            ],
        }
        try:
            resp = self._client.post(self.endpoint, json=body)
            resp.raise_for_status()
            data = resp.json()
            return data["choices"][0]["message"]["content"] or ""
        except httpx.HTTPError as exc:
            raise BackendError(f"{request.stage}: request failed: {exc}") from exc
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise BackendError(f"{request.stage}: malformed completion response: {exc}") from exc

    def close(self):
        self._client.close()


class MockBackend:
    """Replays ``<key>.txt`` files from a fixture directory.

    All fixtures are read at construction; the instance is immutable
    afterwards and safe to share between threads.
    """

    def __init__(self, fixture_dir: Union[str, Path]):
        self.fixture_dir = Path(fixture_dir)
        if not self.fixture_dir.is_dir():
            raise ConfigError(f"fixture directory not found: {self.fixture_dir}")
        self._responses: Mapping[str, str] = {
            p.stem: p.read_text(encoding="utf-8") for p in sorted(self.fixture_dir.glob("*.txt"))
        }

    def __len__(self) -> int:
        return len(self._responses)

    def complete(self, request: LlmRequest) -> str:
        key = request_key(request)
        try:
            return self._responses[key]
        except KeyError:
            raise BackendError(f"no fixture {key}.txt in {self.fixture_dir}") from None


class RecordingBackend:
    """Forwards to ``inner`` and stores every response as a fixture file."""

    def __init__(self, inner: LlmBackend, fixture_dir: Union[str, Path]):
        self.inner = inner
        self.fixture_dir = Path(fixture_dir)
        self.fixture_dir.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def complete(self, request: LlmRequest) -> str:
        response = self.inner.complete(request)
        path = self.fixture_dir / f"{request_key(request)}.txt"
        with self._lock:
            path.write_text(response, encoding="utf-8", newline="")
        return response


Responder = Union[str, Callable[[LlmRequest], str]]


class ScriptedBackend:
    """Answers each stage from a queue of canned responses.

    A response may be a string or a callable taking the request.  The last
    entry of a stage's queue is reused once the queue is exhausted.
    """

    def __init__(self, script: Mapping[str, Union[Responder, Sequence[Responder]]]):
        self._script = {
            stage: [v] if isinstance(v, str) or callable(v) else list(v) for stage, v in script.items()
        }
        self._calls: dict[str, int] = {}
        self.requests: list[LlmRequest] = []
        self._lock = threading.Lock()

    def complete(self, request: LlmRequest) -> str:
        with self._lock:
            queue = self._script.get(request.stage)
            if not queue:
                raise BackendError(f"no scripted response for stage {request.stage!r}")
            n = self._calls.get(request.stage, 0)
            self._calls[request.stage] = n + 1
            self.requests.append(request)
            item = queue[min(n, len(queue) - 1)]
        return item(request) if callable(item) else item

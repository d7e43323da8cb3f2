"""Chat-completions client: HTTP endpoint or deterministic mock fixtures.

The HTTP side speaks the common ``POST {base_url}/chat/completions`` shape
with a JSON body of ``{model, messages, temperature, top_p, max_tokens}`` and
reads the reply at ``choices[0].message.content``.  Authentication is a
bearer token taken from the ``TLP_API_KEY`` environment variable (or the
config).  Transport failures and 5xx responses are retried three times with
exponential backoff (1s, 2s, 4s); other non-2xx responses fail immediately
with a body excerpt.

Mock mode replaces the network entirely: the response for a request is the
content of ``<mock_dir>/<digest>.txt`` where the digest is the SHA-256 of
the request's final user message.  This keeps pipeline runs byte-for-byte
reproducible and lets tests can the exact transcripts they need.
"""

from __future__ import annotations

import hashlib
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import requests

ENDPOINT_ENV_VAR = "TLP_ENDPOINT"
API_KEY_ENV_VAR = "TLP_API_KEY"

DEFAULT_TEMPERATURE = 0.6
DEFAULT_TOP_P = 0.9
DEFAULT_MAX_TOKENS = 2048


class LlmError(Exception):
    pass


class TransportError(LlmError):
    pass


class FixtureMissError(LlmError):
    def __init__(self, digest: str, path: Path) -> None:
        super().__init__(f"no mock fixture for request digest {digest} (expected {path})")
        self.digest = digest


@dataclass(frozen=True)
class ChatMessage:
    role: str
    content: str

    def __post_init__(self) -> None:
        if self.role not in ("system", "user", "assistant"):
            raise ValueError(f"unknown chat role {self.role!r}")


@dataclass(frozen=True)
class ChatRequest:
    messages: tuple[ChatMessage, ...]
    temperature: float = DEFAULT_TEMPERATURE
    top_p: float = DEFAULT_TOP_P
    max_tokens: int = DEFAULT_MAX_TOKENS

    def __post_init__(self) -> None:
        if not (0.0 <= self.temperature <= 2.0):
            raise ValueError("temperature must be in [0, 2]")
        if not (0.0 < self.top_p <= 1.0):
            raise ValueError("top_p must be in (0, 1]")
        object.__setattr__(self, "messages", tuple(self.messages))

    def final_user_content(self) -> str:
        for message in reversed(self.messages):
            if message.role == "user":
                return message.content
        raise ValueError("request has no user message")


@dataclass(frozen=True)
class ChatResponse:
    content: str
    finish_reason: str = "stop"
    usage: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ClientConfig:
    """Where completions come from: exactly one of endpoint or mock_dir."""

    endpoint: str | None = None
    mock_dir: str | Path | None = None
    model: str = "llama3-8b-instruct"
    api_key: str | None = None
    timeout: float = 120.0
    retries: int = 3
    backoff_base: float = 1.0

    def __post_init__(self) -> None:
        if (self.endpoint is None) == (self.mock_dir is None):
            raise ValueError("configure exactly one of endpoint or mock_dir")


def request_digest(request: ChatRequest) -> str:
    """SHA-256 of the final user message; the mock fixture key."""
    return hashlib.sha256(request.final_user_content().encode("utf-8")).hexdigest()


def fixture_path(mock_dir: str | Path, request: ChatRequest) -> Path:
    return Path(mock_dir) / f"{request_digest(request)}.txt"


def write_fixture(mock_dir: str | Path, request: ChatRequest, content: str) -> Path:
    """Store a canned response for a request; returns the fixture path."""
    path = fixture_path(mock_dir, request)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(content, encoding="utf-8")
    return path


def complete(config: ClientConfig, request: ChatRequest,
             sleep: Callable[[float], None] = time.sleep) -> ChatResponse:
    """Run one chat completion against the configured backend."""
    if config.mock_dir is not None:
        return _complete_mock(config, request)
    return _complete_http(config, request, sleep)


def _complete_mock(config: ClientConfig, request: ChatRequest) -> ChatResponse:
    path = fixture_path(config.mock_dir, request)
    if not path.is_file():
        raise FixtureMissError(request_digest(request), path)
    return ChatResponse(content=path.read_text(encoding="utf-8"))


def _complete_http(config: ClientConfig, request: ChatRequest,
                   sleep: Callable[[float], None]) -> ChatResponse:
    url = config.endpoint.rstrip("/") + "/chat/completions"
    headers = {"Content-Type": "application/json"}
    api_key = config.api_key or os.environ.get(API_KEY_ENV_VAR)
    if api_key:
        headers["Authorization"] = f"Bearer {api_key}"
    body = {
        "model": config.model,
        "messages": [{"role": m.role, "content": m.content} for m in request.messages],
        "temperature": request.temperature,
        "top_p": request.top_p,
        "max_tokens": request.max_tokens,
    }
    last_error = "unknown"
    for attempt in range(config.retries + 1):
        if attempt:
            sleep(config.backoff_base * 2 ** (attempt - 1))
        try:
            response = requests.post(url, json=body, headers=headers,
                                     timeout=config.timeout)
        except requests.RequestException as exc:
            last_error = f"transport failure: {exc}"
            continue
        if 500 <= response.status_code < 600:
            last_error = f"server error {response.status_code}: {response.text[:200]}"
            continue
        if not (200 <= response.status_code < 300):
            raise TransportError(
                f"endpoint returned {response.status_code}: {response.text[:200]}"
            )
        try:
            payload = response.json()
            choice = payload["choices"][0]
            content = choice["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise TransportError(f"malformed completion response: {exc}") from exc
        return ChatResponse(
            content=content,
            finish_reason=choice.get("finish_reason", "stop"),
            usage=payload.get("usage", {}) or {},
        )
    raise TransportError(
        f"giving up after {config.retries + 1} attempts; last error: {last_error}"
    )

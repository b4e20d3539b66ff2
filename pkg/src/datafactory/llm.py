"""Chat-completion port: replay mock for tests, HTTP provider for live use.

Everything above this module talks to a port object with a single
``complete`` method, so tests swap in :class:`ReplayLlm` and never touch
the network. Replay entries key on a stable hash of the full message
list, which makes prompt drift fail loudly instead of silently matching
a stale transcript.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import threading
import time
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Protocol, Sequence, Union

import httpx

from .errors import (
    LlmTimeout,
    LlmUnavailable,
    ProviderError,
    ReplayExhausted,
    ReplayKeyMismatch,
)

DEFAULT_TEMPERATURE = 0.1
DEFAULT_MAX_TOKENS = 1024
TRANSPORT_RETRIES = 2

ROLES = ("system", "user", "assistant")


@dataclass(frozen=True)
class Message:
    role: str
    content: str

    def __post_init__(self) -> None:
        if self.role not in ROLES:
            raise ValueError(f"unknown role {self.role!r}")


@dataclass
class ChatRequest:
    messages: list[Message]
    temperature: float = DEFAULT_TEMPERATURE
    max_tokens: int = DEFAULT_MAX_TOKENS

    def __post_init__(self) -> None:
        if not self.messages:
            raise ValueError("a chat request needs at least one message")
        if self.temperature < 0:
            raise ValueError("temperature must be non-negative")


@dataclass
class Usage:
    input_tokens: int = 0
    output_tokens: int = 0

    def __add__(self, other: "Usage") -> "Usage":
        return Usage(
            self.input_tokens + other.input_tokens,
            self.output_tokens + other.output_tokens,
        )

    @property
    def total(self) -> int:
        return self.input_tokens + self.output_tokens


@dataclass
class ChatResponse:
    text: str
    usage: Usage = field(default_factory=Usage)


class LlmPort(Protocol):
    def complete(self, request: ChatRequest) -> ChatResponse: ...


def estimate_tokens(text: str) -> int:
    """Rough count for reporting only: ceil(utf8 bytes / 4)."""
    return math.ceil(len(text.encode("utf-8")) / 4)


def request_key(messages: Sequence[Message]) -> str:
    payload = json.dumps([[m.role, m.content] for m in messages], ensure_ascii=False)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def _request_usage(request: ChatRequest, text: str) -> Usage:
    prompt = "".join(m.content for m in request.messages)
    return Usage(estimate_tokens(prompt), estimate_tokens(text))


class ReplayLlm:
    """Canned responses, either keyed by prompt hash or strictly sequential.

    Keyed entries come from transcript files ({"key" or "messages",
    "response"} objects, one per line); sequential entries are plain
    response strings consumed in order. Keyed lookups that miss raise
    ReplayKeyMismatch when a transcript was loaded, otherwise the
    sequential queue serves the call until it runs dry.
    """

    def __init__(
        self,
        responses: Optional[Iterable[str]] = None,
        transcript: Optional[Iterable[dict]] = None,
    ) -> None:
        self._sequential: deque[str] = deque(responses or [])
        self._keyed: dict[str, deque[str]] = {}
        self._has_transcript = False
        self._lock = threading.Lock()
        self.total_usage = Usage()
        self.calls: list[ChatRequest] = []
        for entry in transcript or []:
            self._add_entry(entry)

    def _add_entry(self, entry: dict) -> None:
        self._has_transcript = True
        if "key" in entry:
            key = entry["key"]
        elif "messages" in entry:
            msgs = [Message(m["role"], m["content"]) for m in entry["messages"]]
            key = request_key(msgs)
        else:
            self._sequential.append(entry["response"])
            return
        self._keyed.setdefault(key, deque()).append(entry["response"])

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "ReplayLlm":
        entries = []
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            if line.strip():
                entries.append(json.loads(line))
        return cls(transcript=entries)

    def complete(self, request: ChatRequest) -> ChatResponse:
        key = request_key(request.messages)
        with self._lock:
            self.calls.append(request)
            bucket = self._keyed.get(key)
            if bucket:
                text = bucket.popleft()
            elif self._sequential:
                text = self._sequential.popleft()
            elif self._has_transcript and self._keyed:
                raise ReplayKeyMismatch(f"no replay entry for prompt key {key[:12]}")
            else:
                raise ReplayExhausted("replay transcript has no responses left")
            usage = _request_usage(request, text)
            self.total_usage = self.total_usage + usage
        return ChatResponse(text, usage)

    def remaining(self) -> int:
        return len(self._sequential) + sum(len(d) for d in self._keyed.values())


class HttpLlm:
    """OpenAI-style chat-completions client with bounded retries."""

    def __init__(
        self,
        base_url: str,
        model: str,
        api_key: str = "",
        timeout: float = 60.0,
        client: Optional[httpx.Client] = None,
    ) -> None:
        if not base_url or not model:
            raise LlmUnavailable("provider base URL and model are required")
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.api_key = api_key
        self.timeout = timeout
        self._client = client or httpx.Client(timeout=timeout)
        self._lock = threading.Lock()
        self.total_usage = Usage()

    @classmethod
    def from_env(cls) -> "HttpLlm":
        base = os.environ.get("DATAFACTORY_LLM_BASE_URL", "")
        model = os.environ.get("DATAFACTORY_LLM_MODEL", "")
        key = os.environ.get("DATAFACTORY_LLM_API_KEY", "")
        if not base or not model:
            raise LlmUnavailable(
                "set DATAFACTORY_LLM_BASE_URL and DATAFACTORY_LLM_MODEL for live mode"
            )
        return cls(base, model, key)

    def complete(self, request: ChatRequest) -> ChatResponse:
        payload = {
            "model": self.model,
            "messages": [{"role": m.role, "content": m.content} for m in request.messages],
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        }
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"

        last_exc: Optional[Exception] = None
        for attempt in range(TRANSPORT_RETRIES + 1):
            try:
                resp = self._client.post(
                    f"{self.base_url}/chat/completions", json=payload, headers=headers
                )
            except httpx.TimeoutException as exc:
                last_exc = LlmTimeout(str(exc))
            except httpx.TransportError as exc:
                last_exc = ProviderError(0, str(exc))
            else:
                if resp.status_code >= 500:
                    last_exc = ProviderError(resp.status_code, resp.text)
                elif resp.status_code >= 400:
                    raise ProviderError(resp.status_code, resp.text)
                else:
                    return self._parse(request, resp)
            if attempt < TRANSPORT_RETRIES:
                time.sleep(0.25 * (2**attempt))
        assert last_exc is not None
        raise last_exc

    def _parse(self, request: ChatRequest, resp: httpx.Response) -> ChatResponse:
        try:
            doc = resp.json()
            text = doc["choices"][0]["message"]["content"]
        except (KeyError, IndexError, ValueError) as exc:
            raise ProviderError(resp.status_code, resp.text) from exc
        raw = doc.get("usage") or {}
        usage = Usage(
            int(raw.get("prompt_tokens", 0)) or _request_usage(request, text).input_tokens,
            int(raw.get("completion_tokens", 0)) or estimate_tokens(text),
        )
        with self._lock:
            self.total_usage = self.total_usage + usage
        return ChatResponse(text, usage)

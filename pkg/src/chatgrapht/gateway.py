"""Provider-agnostic chat completion gateway.

Three interchangeable backends:

* ``ScriptedGateway`` — deterministic rule-based mock for offline runs.
* ``OpenAIChatGateway`` — real provider adapter (OpenAI-compatible HTTP API)
  with bounded retries.
* ``RecordingGateway`` / ``ReplayGateway`` — record/replay wrappers keyed by a
  whitespace-normalized request fingerprint.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Protocol

import httpx


class GatewayError(Exception):
    """Base for all gateway failures; `retryable` drives the retry loop."""

    retryable = False


class AuthError(GatewayError):
    retryable = False


class RateLimited(GatewayError):
    retryable = True


class ProviderError(GatewayError):
    retryable = False


class Timeout(GatewayError):
    retryable = True


class CacheMiss(GatewayError):
    retryable = False


class StorageError(GatewayError):
    retryable = False


@dataclass(frozen=True)
class ChatMessage:
    role: str  # "system" | "user" | "assistant"
    content: str

    def __post_init__(self):
        if self.role not in ("system", "user", "assistant"):
            raise ValueError(f"bad role: {self.role}")
        if self.role != "system" and not self.content:
            raise ValueError("user/assistant content must be non-empty")


@dataclass(frozen=True)
class ChatRequest:
    messages: tuple[ChatMessage, ...]
    model: str = "default"
    temperature: float = 0.0
    max_tokens: int = 1024

    def __post_init__(self):
        if not self.messages:
            raise ValueError("messages must be non-empty")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_tokens <= 0:
            raise ValueError("max_tokens must be > 0")

    def full_text(self) -> str:
        return "\n".join(m.content for m in self.messages)


class Gateway(Protocol):
    def complete(self, request: ChatRequest) -> str: ...


_WS = re.compile(r"\s+")


def request_fingerprint(request: ChatRequest) -> str:
    """Stable key for record/replay: whitespace-normalized, temperature-free."""
    canon = {
        "model": request.model,
        "messages": [
            {"role": m.role, "content": _WS.sub(" ", m.content).strip()}
            for m in request.messages
        ],
    }
    blob = json.dumps(canon, sort_keys=True, ensure_ascii=False)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


# -- scripted mock ----------------------------------------------------------


@dataclass(frozen=True)
class MockRule:
    """First matching rule wins. `matcher` is a substring of the request text,
    or a full request fingerprint (64 hex chars) prefixed with "sha256:".
    When `relevance` is set the reply is wrapped/augmented into the structured
    reviewer format so the intervention gate can read it."""

    matcher: str
    reply: str
    relevance: float | None = None

    def matches(self, request: ChatRequest) -> bool:
        if self.matcher.startswith("sha256:"):
            return request_fingerprint(request) == self.matcher[len("sha256:"):]
        return self.matcher in request.full_text()

    def render_reply(self) -> str:
        if self.relevance is None:
            return self.reply
        try:
            obj = json.loads(self.reply)
            if not isinstance(obj, dict):
                raise ValueError
        except ValueError:
            obj = {"kind": "advice", "text": self.reply}
        obj.setdefault("relevance", self.relevance)
        return json.dumps(obj, sort_keys=True)


@dataclass
class MockScript:
    rules: list[MockRule] = field(default_factory=list)
    default_reply: str = "OK."

    @classmethod
    def from_file(cls, path: str | Path) -> "MockScript":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        rules = [
            MockRule(r["matcher"], r["reply"], r.get("relevance"))
            for r in data.get("rules", [])
        ]
        return cls(rules=rules, default_reply=data.get("default_reply", "OK."))


class ScriptedGateway:
    """Pure function of (request, script). Also keeps the calls it served,
    which tests use as a recording probe."""

    def __init__(self, script: MockScript | None = None):
        self.script = script or MockScript()
        self.calls: list[ChatRequest] = []
        self._lock = threading.Lock()

    def complete(self, request: ChatRequest) -> str:
        with self._lock:
            self.calls.append(request)
        for rule in self.script.rules:
            if rule.matches(request):
                return rule.render_reply()
        return self.script.default_reply


class CallableGateway:
    """Adapter for test doubles: complete() delegates to a plain function."""

    def __init__(self, fn: Callable[[ChatRequest], str]):
        self._fn = fn
        self.calls: list[ChatRequest] = []

    def complete(self, request: ChatRequest) -> str:
        self.calls.append(request)
        return self._fn(request)


# -- real provider ----------------------------------------------------------


@dataclass
class ProviderConfig:
    base_url: str = "https://api.openai.com/v1"
    model: str = "gpt-4o-mini"
    api_key_env: str = "CHATGRAPHT_API_KEY"
    temperature: float = 0.0
    max_tokens: int = 1024
    timeout_seconds: float = 60.0

    @classmethod
    def from_file(cls, path: str | Path) -> "ProviderConfig":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(**{k: v for k, v in data.items() if k in cls.__dataclass_fields__})


MAX_RETRIES = 2
BACKOFF_BASE_SECONDS = 0.5


class OpenAIChatGateway:
    """Adapter for OpenAI-compatible /chat/completions endpoints.

    Every failure maps to exactly one GatewayError subclass; retryable
    failures are retried twice with exponential backoff.
    """

    def __init__(
        self,
        config: ProviderConfig,
        transport: Callable[[dict], httpx.Response] | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.config = config
        self._sleep = sleep
        self._transport = transport or self._http_post

    def _http_post(self, payload: dict) -> httpx.Response:
        key = os.environ.get(self.config.api_key_env)
        if not key:
            raise AuthError(f"missing API key in ${self.config.api_key_env}")
        return httpx.post(
            self.config.base_url.rstrip("/") + "/chat/completions",
            json=payload,
            headers={"Authorization": f"Bearer {key}"},
            timeout=self.config.timeout_seconds,
        )

    def _one_call(self, request: ChatRequest) -> str:
        payload = {
            "model": request.model or self.config.model,
            "messages": [{"role": m.role, "content": m.content} for m in request.messages],
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        }
        try:
            resp = self._transport(payload)
        except GatewayError:
            raise
        except httpx.TimeoutException as exc:
            raise Timeout(str(exc)) from exc
        except Exception as exc:  # network layer; never leaks raw
            raise ProviderError(str(exc)) from exc
        if resp.status_code in (401, 403):
            raise AuthError(f"provider returned {resp.status_code}")
        if resp.status_code == 429:
            raise RateLimited("provider rate limit")
        if resp.status_code >= 400:
            raise ProviderError(f"provider returned {resp.status_code}")
        try:
            return resp.json()["choices"][0]["message"]["content"]
        except Exception as exc:
            raise ProviderError(f"malformed provider response: {exc}") from exc

    def complete(self, request: ChatRequest) -> str:
        attempt = 0
        while True:
            try:
                return self._one_call(request)
            except GatewayError as exc:
                if not exc.retryable or attempt >= MAX_RETRIES:
                    raise
                self._sleep(BACKOFF_BASE_SECONDS * (2**attempt))
                attempt += 1


# -- record / replay ---------------------------------------------------------


class RecordingGateway:
    """Proxies to an inner gateway and appends (fingerprint, reply) records."""

    def __init__(self, inner: Gateway, store: str | Path):
        self.inner = inner
        self.store = Path(store)
        self._lock = threading.Lock()
        try:
            self.store.parent.mkdir(parents=True, exist_ok=True)
            self.store.touch()
        except OSError as exc:
            raise StorageError(str(exc)) from exc

    def complete(self, request: ChatRequest) -> str:
        reply = self.inner.complete(request)
        record = json.dumps(
            {"fingerprint": request_fingerprint(request), "reply": reply},
            ensure_ascii=False,
        )
        with self._lock:
            try:
                with self.store.open("a", encoding="utf-8") as fh:
                    fh.write(record + "\n")
            except OSError as exc:
                raise StorageError(str(exc)) from exc
        return reply


class ReplayGateway:
    """Serves recorded replies; unseen requests are a hard CacheMiss."""

    def __init__(self, store: str | Path):
        self.store = Path(store)
        self._replies: dict[str, str] = {}
        try:
            text = self.store.read_text(encoding="utf-8")
        except OSError as exc:
            raise StorageError(str(exc)) from exc
        for line in text.splitlines():
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                self._replies[rec["fingerprint"]] = rec["reply"]
            except (ValueError, KeyError) as exc:
                raise StorageError(f"bad record in {self.store}: {exc}") from exc

    def complete(self, request: ChatRequest) -> str:
        fp = request_fingerprint(request)
        if fp not in self._replies:
            raise CacheMiss(f"no recorded reply for request {fp}")
        return self._replies[fp]


def record_replay(mode: str, store: str | Path, inner: Gateway | None = None) -> Gateway:
    """Build a record or replay wrapper. mode: "record" | "replay"."""
    if mode == "record":
        if inner is None:
            raise ValueError("record mode requires an inner gateway")
        return RecordingGateway(inner, store)
    if mode == "replay":
        return ReplayGateway(store)
    raise ValueError(f"unknown mode: {mode}")

"""Uniform access point to language-model backends.

Every outbound call runs under a five-attempt exponential backoff policy.
Backends are either hosted (JSON over HTTPS) or scripted mocks that answer
identical requests identically, which keeps the whole system testable
offline.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import time
from dataclasses import dataclass, field
from typing import Any, Callable

from .errors import (
    DuplicateBackend,
    FixtureMissing,
    NoBackend,
    RetriesExhausted,
    TransientBackendError,
    UnknownBackend,
)

logger = logging.getLogger(__name__)

PURPOSES = ("classify", "opine", "extract", "rewrite", "generate")


def prompt_digest(prompt: str) -> str:
    """SHA-256 hex digest used as the fixture key for a prompt."""
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class ModelRequest:
    """One request to a backend. ``purpose`` is fixed at construction."""

    purpose: str
    prompt: str
    parameters: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.purpose not in PURPOSES:
            raise ValueError(f"unknown purpose {self.purpose!r}; expected one of {PURPOSES}")
        if not self.prompt.strip():
            raise ValueError("prompt must be non-empty")

    def digest(self) -> str:
        return prompt_digest(self.prompt)


@dataclass(frozen=True)
class ModelResponse:
    text: str
    backend_id: str
    attempts: int


@dataclass(frozen=True)
class BackoffPolicy:
    """Exponential backoff: attempt a (a >= 2) waits base_delay * multiplier**(a-2)."""

    max_attempts: int = 5
    base_delay: float = 0.5
    multiplier: float = 2.0
    jitter: bool = False

    def __post_init__(self):
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")
        if self.multiplier <= 1:
            raise ValueError("multiplier must be > 1")

    def delay_before(self, attempt: int) -> float:
        """Seconds to wait before the given attempt number (first attempt waits nothing)."""
        if attempt < 2:
            return 0.0
        return self.base_delay * self.multiplier ** (attempt - 2)


class Backend:
    """Adapter contract: a single send(prompt, parameters) -> text operation."""

    backend_id: str
    kind: str

    def send(self, prompt: str, parameters: dict[str, Any]) -> str:
        raise NotImplementedError


class ScriptedMockBackend(Backend):
    """Deterministic offline backend.

    Responses come from, in order: exact fixtures keyed by SHA-256 prompt
    digest, substring rules, then an optional default handler. Identical
    requests always receive identical responses. ``fail_times`` makes the
    first N calls raise a retryable error, for exercising the backoff path.
    """

    kind = "scripted-mock"

    def __init__(
        self,
        backend_id: str = "scripted-mock",
        fixtures: dict[str, str] | None = None,
        default_handler: Callable[[str, dict[str, Any]], str] | None = None,
        fail_times: int = 0,
    ):
        self.backend_id = backend_id
        self.fixtures = dict(fixtures or {})
        self.rules: list[tuple[str, str]] = []
        self.default_handler = default_handler
        self._failures_left = fail_times
        self.calls: list[str] = []

    @classmethod
    def from_file(cls, path: str, backend_id: str = "scripted-mock") -> "ScriptedMockBackend":
        """Load fixtures from a JSON file mapping SHA-256 prompt digests to responses."""
        with open(path, encoding="utf-8") as fh:
            fixtures = json.load(fh)
        if not isinstance(fixtures, dict):
            raise ValueError(f"fixture file {path} must contain a JSON object")
        return cls(backend_id=backend_id, fixtures=fixtures)

    def script(self, prompt: str, response: str) -> None:
        """Register an exact-prompt fixture."""
        self.fixtures[prompt_digest(prompt)] = response

    def script_rule(self, substring: str, response: str) -> None:
        """Register a substring rule, checked in registration order after fixtures."""
        self.rules.append((substring, response))

    def send(self, prompt: str, parameters: dict[str, Any]) -> str:
        self.calls.append(prompt)
        if self._failures_left > 0:
            self._failures_left -= 1
            raise TransientBackendError(f"{self.backend_id}: scripted failure")
        key = prompt_digest(prompt)
        if key in self.fixtures:
            return self.fixtures[key]
        for substring, response in self.rules:
            if substring in prompt:
                return response
        if self.default_handler is not None:
            return self.default_handler(prompt, parameters)
        raise FixtureMissing(f"{self.backend_id}: no fixture for prompt {key[:12]}…")


class HostedBackend(Backend):
    """Hosted model over a JSON/HTTPS wire call.

    Sends ``{"prompt": ..., "parameters": ...}`` to the endpoint and expects
    ``{"text": ...}`` back. Credentials come from the environment, never from
    configuration files.
    """

    kind = "hosted"

    def __init__(
        self,
        backend_id: str,
        endpoint: str,
        api_key_env: str = "SWINEDX_API_KEY",
        timeout: float = 30.0,
    ):
        self.backend_id = backend_id
        self.endpoint = endpoint
        self.api_key_env = api_key_env
        self.timeout = timeout

    def send(self, prompt: str, parameters: dict[str, Any]) -> str:
        import requests

        headers = {}
        api_key = os.environ.get(self.api_key_env)
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        try:
            resp = requests.post(
                self.endpoint,
                json={"prompt": prompt, "parameters": parameters},
                headers=headers,
                timeout=self.timeout,
            )
            resp.raise_for_status()
            body = resp.json()
        except requests.RequestException as exc:
            raise TransientBackendError(f"{self.backend_id}: {exc}") from exc
        if "text" not in body:
            raise TransientBackendError(f"{self.backend_id}: response missing 'text'")
        return body["text"]


class Gateway:
    """Backend registry plus the retrying call path.

    ``sleep`` and the optional ``validator`` are injectable: tests pass a fake
    clock, and a validator may reject a syntactically successful response so
    that it is retried like a failure.
    """

    def __init__(
        self,
        policy: BackoffPolicy | None = None,
        sleep: Callable[[float], None] = time.sleep,
        validator: Callable[[str], bool] | None = None,
    ):
        self.policy = policy or BackoffPolicy()
        self._sleep = sleep
        self._validator = validator
        self._backends: dict[str, Backend] = {}
        self._selected: str | None = None

    def register_backend(self, backend: Backend) -> None:
        if backend.backend_id in self._backends:
            raise DuplicateBackend(f"backend {backend.backend_id!r} already registered")
        self._backends[backend.backend_id] = backend
        if self._selected is None:
            self._selected = backend.backend_id

    def select_backend(self, backend_id: str) -> None:
        if backend_id not in self._backends:
            raise UnknownBackend(f"backend {backend_id!r} is not registered")
        self._selected = backend_id

    @property
    def selected_backend(self) -> Backend:
        if self._selected is None:
            raise NoBackend("no backend registered")
        return self._backends[self._selected]

    def call(self, request: ModelRequest) -> ModelResponse:
        return self.call_with_backoff(request, self.policy)

    def call_with_backoff(self, request: ModelRequest, policy: BackoffPolicy) -> ModelResponse:
        backend = self.selected_backend
        errors: list[Exception] = []
        for attempt in range(1, policy.max_attempts + 1):
            delay = policy.delay_before(attempt)
            if delay > 0:
                if policy.jitter:
                    import random

                    delay *= 1.0 + random.random()
                self._sleep(delay)
            try:
                text = backend.send(request.prompt, request.parameters)
            except TransientBackendError as exc:
                errors.append(exc)
                logger.warning(
                    "backend %s attempt %d/%d failed: %s",
                    backend.backend_id, attempt, policy.max_attempts, exc,
                )
                continue
            if self._validator is not None and not self._validator(text):
                err = TransientBackendError(
                    f"{backend.backend_id}: response rejected by validator"
                )
                errors.append(err)
                logger.warning("backend %s attempt %d rejected by validator", backend.backend_id, attempt)
                continue
            return ModelResponse(text=text, backend_id=backend.backend_id, attempts=attempt)
        raise RetriesExhausted(
            f"backend {backend.backend_id!r} failed after {policy.max_attempts} attempts",
            errors,
        )

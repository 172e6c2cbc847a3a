"""LLM transports: live chat-completions endpoint, fixture replay, recording.

Fixtures are one JSON file per query, named by the sha256 of the prompt and
holding ``{"prompt_sha256": ..., "raw_response": ...}``.  Replay mode performs
no network I/O at all, which the test harness asserts.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from pathlib import Path
from typing import Protocol

import httpx

from sketchpipe.errors import SketchPipeError

ENV_BASE_URL = "SKETCHPIPE_LLM_BASE_URL"
ENV_API_KEY = "SKETCHPIPE_LLM_API_KEY"
ENV_MODEL = "SKETCHPIPE_LLM_MODEL"


class TransportError(SketchPipeError):
    """The transport could not produce a response (network, auth, fixture)."""

    code = "TransportError"


class Transport(Protocol):
    def complete(self, prompt: str) -> str:
        """Return the raw model response text for a prompt."""


def prompt_key(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


class FixtureTransport:
    """Replays recorded responses from a directory, keyed by prompt hash."""

    def __init__(self, fixtures_dir: str | Path):
        self.fixtures_dir = Path(fixtures_dir)

    def complete(self, prompt: str) -> str:
        key = prompt_key(prompt)
        path = self.fixtures_dir / f"{key}.json"
        if not path.is_file():
            raise TransportError(f"no fixture for prompt hash {key} in {self.fixtures_dir}")
        try:
            obj = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise TransportError(f"unreadable fixture {path}: {exc}") from exc
        if obj.get("prompt_sha256") != key:
            raise TransportError(f"fixture {path} is keyed for a different prompt")
        raw = obj.get("raw_response")
        if not isinstance(raw, str):
            raise TransportError(f"fixture {path} has no raw_response string")
        return raw


class RecordingTransport:
    """Wraps another transport and saves each response as a replay fixture."""

    def __init__(self, inner: Transport, fixtures_dir: str | Path):
        self.inner = inner
        self.fixtures_dir = Path(fixtures_dir)
        self.fixtures_dir.mkdir(parents=True, exist_ok=True)

    def complete(self, prompt: str) -> str:
        raw = self.inner.complete(prompt)
        key = prompt_key(prompt)
        payload = {"prompt_sha256": key, "raw_response": raw}
        (self.fixtures_dir / f"{key}.json").write_text(
            json.dumps(payload, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
        )
        return raw


class HttpTransport:
    """OpenAI-style chat-completions client with retry on 5xx/timeouts."""

    def __init__(
        self,
        base_url: str,
        model: str,
        api_key: str | None = None,
        max_attempts: int = 3,
        backoff_s: float = 0.5,
        timeout_s: float = 120.0,
        _transport: httpx.BaseTransport | None = None,
    ):
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.api_key = api_key
        self.max_attempts = max_attempts
        self.backoff_s = backoff_s
        self.timeout_s = timeout_s
        self._httpx_transport = _transport  # injection point for tests

    @classmethod
    def from_env(cls, **kwargs) -> "HttpTransport":
        base_url = os.environ.get(ENV_BASE_URL)
        model = os.environ.get(ENV_MODEL)
        if not base_url or not model:
            raise TransportError(
                f"live transport needs {ENV_BASE_URL} and {ENV_MODEL} set "
                f"(and usually {ENV_API_KEY})"
            )
        return cls(base_url=base_url, model=model, api_key=os.environ.get(ENV_API_KEY), **kwargs)

    def complete(self, prompt: str) -> str:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        body = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
        }
        last_error = "no attempt made"
        with httpx.Client(timeout=self.timeout_s, transport=self._httpx_transport) as client:
            for attempt in range(self.max_attempts):
                if attempt:
                    time.sleep(self.backoff_s * (2 ** (attempt - 1)))
                try:
                    resp = client.post(
                        f"{self.base_url}/chat/completions", json=body, headers=headers
                    )
                except httpx.TimeoutException as exc:
                    last_error = f"timeout: {exc}"
                    continue
                except httpx.HTTPError as exc:
                    raise TransportError(f"request failed: {exc}") from exc
                if resp.status_code >= 500:
                    last_error = f"server error {resp.status_code}"
                    continue
                if resp.status_code != 200:
                    raise TransportError(f"endpoint returned {resp.status_code}: {resp.text[:200]}")
                try:
                    return resp.json()["choices"][0]["message"]["content"]
                except (KeyError, IndexError, TypeError, ValueError) as exc:
                    raise TransportError(f"malformed completion payload: {exc}") from exc
        raise TransportError(f"gave up after {self.max_attempts} attempts ({last_error})")

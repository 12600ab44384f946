"""Completion-client plumbing shared by the pattern provider, the structurer,
and the unfolding rewriter.

Every model-facing component talks to a :class:`CompletionClient`: one prompt
in, one text reply out. The HTTP client posts to a JSON endpoint; the scripted
client replays canned replies for deterministic tests.
"""

from __future__ import annotations

import time
from typing import Protocol

import httpx


class TransportError(Exception):
    """Completion or embedding backend unreachable or persistently failing."""


class CompletionClient(Protocol):
    def complete(self, prompt: str) -> str: ...


class ScriptedCompletionClient:
    """Replays a fixed list of replies in order and records every prompt."""

    def __init__(self, replies: list[str] | None = None, fail_times: int = 0) -> None:
        self.replies = list(replies or [])
        self.prompts: list[str] = []
        self._fail_times = fail_times

    def complete(self, prompt: str) -> str:
        self.prompts.append(prompt)
        if self._fail_times > 0:
            self._fail_times -= 1
            raise TransportError("scripted transport failure")
        if not self.replies:
            raise TransportError("scripted client ran out of replies")
        return self.replies.pop(0)


class HttpCompletionClient:
    """POSTs ``{"prompt": ...}`` to a completion endpoint and returns the
    ``"text"`` field of the JSON reply. Retries transient failures with a
    short backoff before giving up."""

    def __init__(
        self,
        url: str,
        max_retries: int = 3,
        timeout: float = 60.0,
        backoff: float = 0.5,
        client: httpx.Client | None = None,
    ) -> None:
        self.url = url
        self.max_retries = max_retries
        self.backoff = backoff
        self._client = client or httpx.Client(timeout=timeout)

    def complete(self, prompt: str) -> str:
        last: Exception | None = None
        for attempt in range(self.max_retries):
            try:
                resp = self._client.post(self.url, json={"prompt": prompt})
                if resp.status_code >= 500:
                    raise TransportError(f"completion service returned {resp.status_code}")
                resp.raise_for_status()
                return str(resp.json()["text"])
            except (httpx.HTTPError, TransportError, KeyError, ValueError) as exc:
                last = exc
                if attempt + 1 < self.max_retries:
                    time.sleep(self.backoff * (attempt + 1))
        raise TransportError(f"completion request failed after {self.max_retries} attempts: {last}")

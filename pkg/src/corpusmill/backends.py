"""Model backends for the adversarial loop.

A backend is anything with ``complete(messages) -> str`` where messages
are role-tagged dicts. The HTTP backend posts ``{"messages": [...]}`` to
a configured endpoint and expects ``{"text": "..."}`` back; credentials
travel only through an environment variable named in the configuration.

The mock backends make the whole loop runnable and testable offline.
They are deterministic: the generator derives all mutation choices from
its seed integer plus the item content, and the discriminator scores
from item content alone, so identical inputs always produce identical
outputs regardless of call order.
"""

from __future__ import annotations

import json
import os
import random
import re
import time

import requests

Message = dict[str, str]

_FENCE_RE = re.compile(r"```json\n(.*?)\n```", re.DOTALL)
_COUNT_RE = re.compile(r"Generate exactly (\d+)")

_QUERY_TEMPLATES = (
    "Please {q}",
    "{q} as soon as possible",
    "Kindly {q}",
    "{q}, and double-check the result",
)


class BackendError(RuntimeError):
    """Transport-level failure talking to a backend."""


class HttpBackend:
    """Minimal messages-in, text-out HTTP client; no vendor features."""

    def __init__(
        self,
        endpoint: str,
        credential_env: str | None = None,
        timeout_s: float = 60.0,
    ) -> None:
        self.endpoint = endpoint
        self.credential_env = credential_env
        self.timeout_s = timeout_s

    def complete(self, messages: list[Message]) -> str:
        headers = {}
        if self.credential_env:
            token = os.environ.get(self.credential_env)
            if not token:
                raise BackendError(
                    f"credential environment variable {self.credential_env} is unset"
                )
            headers["Authorization"] = f"Bearer {token}"
        try:
            resp = requests.post(
                self.endpoint,
                json={"messages": messages},
                headers=headers,
                timeout=self.timeout_s,
            )
            resp.raise_for_status()
            body = resp.json()
        except requests.RequestException as exc:
            raise BackendError(f"backend request failed: {exc}") from exc
        except ValueError as exc:
            raise BackendError(f"backend returned non-JSON body: {exc}") from exc
        if not isinstance(body, dict) or not isinstance(body.get("text"), str):
            raise BackendError("backend response missing 'text' field")
        return body["text"]


def complete_with_retries(
    backend, messages: list[Message], retries: int = 2, backoff_s: float = 0.2
) -> str:
    attempt = 0
    while True:
        try:
            return backend.complete(messages)
        except BackendError:
            attempt += 1
            if attempt > retries:
                raise
            if backoff_s:
                time.sleep(backoff_s * attempt)


def _last_user_content(messages: list[Message]) -> str:
    for msg in reversed(messages):
        if msg.get("role") == "user":
            return msg.get("content", "")
    return ""


def _fenced_json(messages: list[Message]) -> object:
    match = _FENCE_RE.search(_last_user_content(messages))
    if match is None:
        raise BackendError("mock backend found no fenced JSON in prompt")
    return json.loads(match.group(1))


def _mutate_value(value: object, rng: random.Random) -> object:
    if isinstance(value, bool):
        return not value
    if isinstance(value, int):
        return value + rng.choice((1, 2, 3))
    if isinstance(value, float):
        return value + 0.5
    if isinstance(value, str):
        return value + rng.choice(("-alt", " v2", " now"))
    if isinstance(value, list):
        return list(value) + [len(value)]
    if isinstance(value, dict):
        mutated = dict(value)
        mutated["extra"] = True
        return mutated
    return value


def _is_reference(value: object) -> bool:
    return isinstance(value, str) and re.fullmatch(r"\{\{call_\d+\}\}", value) is not None


class MockGeneratorBackend:
    """Deterministic generator: paraphrases the query and perturbs one argument.

    For candidate ``i`` the seed item is taken round-robin from the fenced
    seed list; all random choices come from a RNG keyed on
    ``(mock_seed, seed id, i)``. The query gets a template paraphrase, the
    argument entries of each call are reversed, and one literal
    (non-reference) argument value is mutated type-preservingly.
    """

    def __init__(self, seed: int = 0) -> None:
        self.seed = seed

    def complete(self, messages: list[Message]) -> str:
        seeds = _fenced_json(messages)
        if not isinstance(seeds, list) or not seeds:
            raise BackendError("mock generator needs a non-empty seed list")
        count_match = _COUNT_RE.search(_last_user_content(messages))
        n = int(count_match.group(1)) if count_match else 1
        lines = []
        for i in range(n):
            seed_obj = seeds[i % len(seeds)]
            lines.append(json.dumps(self._mutate(seed_obj, i), ensure_ascii=False))
        return "\n".join(lines)

    def _mutate(self, seed_obj: dict, index: int) -> dict:
        rng = random.Random(f"{self.seed}:{seed_obj.get('id', '')}:{index}")
        out = json.loads(json.dumps(seed_obj))  # deep copy, nothing shared
        out.pop("id", None)
        template = rng.choice(_QUERY_TEMPLATES)
        out["query"] = template.format(q=out.get("query", ""))

        calls = out.get("calls", [])
        literal_slots = [
            (ci, name)
            for ci, call in enumerate(calls)
            for name, value in call.get("arguments", {}).items()
            if not _is_reference(value)
        ]
        for call in calls:
            args = call.get("arguments", {})
            call["arguments"] = dict(reversed(list(args.items())))
        if literal_slots:
            ci, name = literal_slots[rng.randrange(len(literal_slots))]
            args = calls[ci]["arguments"]
            args[name] = _mutate_value(args[name], rng)
        return out


class MockDiscriminatorBackend:
    """Deterministic discriminator: full marks unless the thought is empty."""

    def complete(self, messages: list[Message]) -> str:
        item = _fenced_json(messages)
        if not isinstance(item, dict):
            raise BackendError("mock discriminator needs a fenced item object")
        thought_quality = 0.0 if not str(item.get("thought", "")).strip() else 1.0
        verdict = {
            "scores": {
                "thought_quality": thought_quality,
                "complexity": 1.0,
                "realism": 1.0,
                "consistency": 1.0,
            },
            "rationale": "mock scoring: content-derived, deterministic",
        }
        return json.dumps(verdict)


class FlakyBackend:
    """Test helper: fails a fixed number of times, then delegates."""

    def __init__(self, inner, failures: int) -> None:
        self.inner = inner
        self.failures = failures
        self.calls = 0

    def complete(self, messages: list[Message]) -> str:
        self.calls += 1
        if self.calls <= self.failures:
            raise BackendError("injected transport failure")
        return self.inner.complete(messages)

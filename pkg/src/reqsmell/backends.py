"""Completion backends: remote chat HTTP for live use, scripted/oracle for tests.

The deterministic backends key off the "Requirement ID:" / "Weak word:"
lines that the prompt engine puts into every user prompt, so end-to-end
runs exercise the real pipeline with controlled outcomes.
"""

from __future__ import annotations

import os
import re
import threading
import time
from dataclasses import dataclass

from .errors import BackendUnavailable, ConfigError, ScriptMiss
from .model import Label
from .prompts import LABEL_WORDS, render_answer

FindingKey = tuple[str, str]  # (requirement_id, weak_word)

_KEY_ID = re.compile(r"^Requirement ID:\s*(.*)$", re.MULTILINE)
_KEY_WORD = re.compile(r"^Weak word:\s*(.*)$", re.MULTILINE)

DEFAULT_REASONING_TEMPLATE = (
    "The word '{word}' in requirement {rid} was assessed as {label} "
    "against the validated gold annotation."
)


@dataclass(frozen=True)
class CompletionRequest:
    system_text: str
    user_text: str
    max_output_tokens: int = 256

    def __post_init__(self) -> None:
        if not self.system_text or not self.user_text:
            raise ValueError("system_text and user_text must be non-empty")


def finding_key(user_text: str) -> FindingKey:
    """Extract (requirement_id, weak_word) from a prompt's key lines."""
    id_match = _KEY_ID.search(user_text)
    word_match = _KEY_WORD.search(user_text)
    if not id_match or not word_match:
        raise ScriptMiss("user prompt carries no Requirement ID / Weak word key lines")
    return id_match.group(1).strip(), word_match.group(1).strip()


class ScriptedBackend:
    """Returns pre-recorded raw outputs by finding key."""

    kind = "scripted"
    deterministic = True

    def __init__(self, script: dict[FindingKey, str]):
        self.script = dict(script)

    def complete(self, request: CompletionRequest) -> str:
        key = finding_key(request.user_text)
        try:
            return self.script[key]
        except KeyError:
            raise ScriptMiss(f"no scripted output for finding {key!r}") from None


class OracleBackend:
    """Answers from gold labels, flipping the findings in ``flips``.

    Output always follows the two-line grammar (reasoning then label) so it
    parses in both CoT and non-CoT mode.
    """

    kind = "oracle"
    deterministic = True

    def __init__(
        self,
        labels: dict[FindingKey, Label],
        flips: frozenset[FindingKey] | set[FindingKey] = frozenset(),
        reasoning_template: str = DEFAULT_REASONING_TEMPLATE,
    ):
        self.labels = dict(labels)
        self.flips = frozenset(flips)
        self.reasoning_template = reasoning_template

    def label_for(self, key: FindingKey) -> Label:
        try:
            label = self.labels[key]
        except KeyError:
            raise ScriptMiss(f"oracle has no gold label for finding {key!r}") from None
        if key in self.flips:
            label = Label.NOT_DEFECT if label is Label.DEFECT else Label.DEFECT
        return label

    def complete(self, request: CompletionRequest) -> str:
        rid, word = key = finding_key(request.user_text)
        label = self.label_for(key)
        reasoning = self.reasoning_template.format(
            word=word, rid=rid, label=LABEL_WORDS[label]
        )
        return render_answer(reasoning, label, cot=True)


class RemoteChatBackend:
    """Single-turn chat completion over HTTP, retried on transient failures."""

    kind = "remote_chat"
    deterministic = False

    def __init__(
        self,
        endpoint_url: str,
        model_name: str,
        api_key_env: str = "LLM_API_KEY",
        temperature: float = 0.0,
        timeout: float = 60.0,
        max_retries: int = 3,
        max_concurrency: int = 4,
    ):
        if not endpoint_url or not model_name:
            raise ConfigError("remote backend requires endpoint_url and model_name")
        self.endpoint_url = endpoint_url
        self.model_name = model_name
        self.api_key_env = api_key_env
        self.temperature = temperature
        self.timeout = timeout
        self.max_retries = max_retries
        self._gate = threading.Semaphore(max_concurrency)

    def complete(self, request: CompletionRequest) -> str:
        import requests

        payload = {
            "model": self.model_name,
            "messages": [
                {"role": "system", "content": request.system_text},
                {"role": "user", "content": request.user_text},
            ],
            "temperature": self.temperature,
            "max_tokens": request.max_output_tokens,
        }
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.api_key_env, "")
        if key:
            headers["Authorization"] = f"Bearer {key}"
        last_error: Exception | None = None
        for attempt in range(self.max_retries):
            if attempt:
                time.sleep(0.5 * 2 ** (attempt - 1))
            try:
                with self._gate:
                    resp = requests.post(
                        self.endpoint_url, json=payload, headers=headers, timeout=self.timeout
                    )
            except requests.RequestException as exc:
                last_error = exc
                continue
            if resp.status_code in (429, 500, 502, 503, 504):
                last_error = BackendUnavailable(f"HTTP {resp.status_code} from chat endpoint")
                continue
            if resp.status_code != 200:
                raise BackendUnavailable(
                    f"chat endpoint returned HTTP {resp.status_code}: {resp.text[:200]}"
                )
            try:
                return resp.json()["choices"][0]["message"]["content"]
            except (KeyError, IndexError, TypeError, ValueError) as exc:
                raise BackendUnavailable(f"malformed chat response: {exc}") from None
        raise BackendUnavailable(
            f"chat request failed after {self.max_retries} attempts: {last_error}"
        )


def complete(request: CompletionRequest, backend) -> str:
    return backend.complete(request)


def backend_from_config(config: dict):
    """Build a backend from a plain config mapping (CLI / config file)."""
    kind = config.get("kind")
    if kind == "remote_chat":
        try:
            return RemoteChatBackend(
                endpoint_url=config["endpoint_url"],
                model_name=config["model_name"],
                api_key_env=config.get("api_key_env", "LLM_API_KEY"),
                temperature=float(config.get("temperature", 0.0)),
            )
        except KeyError as exc:
            raise ConfigError(f"remote backend config missing {exc.args[0]}") from None
    if kind == "scripted":
        script = {
            (entry["requirement_id"], entry["weak_word"]): entry["output"]
            for entry in config.get("script", [])
        }
        return ScriptedBackend(script)
    if kind == "oracle":
        labels = {
            (entry["requirement_id"], entry["weak_word"]): Label(entry["label"])
            for entry in config.get("labels", [])
        }
        flips = frozenset((rid, word) for rid, word in config.get("flips", []))
        return OracleBackend(
            labels,
            flips,
            config.get("reasoning_template", DEFAULT_REASONING_TEMPLATE),
        )
    raise ConfigError(f"unknown backend kind: {kind!r}")
